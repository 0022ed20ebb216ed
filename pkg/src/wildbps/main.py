import argparse
import json
import logging
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

from pydantic import BaseModel, ValidationError

from . import __version__, cache
from .bps import (
    BpsPolynomial,
    compare_hmw,
    gv_extract,
    gv_extract_many,
    hmw_extract,
    hmw_z,
    structural_checks,
)
from .errors import PartitionError, PreconditionError, WildBpsError
from .gw import WildCurveData, z_gw
from .partitions import Partition
from .refined import RefinedContext, z_pt_refined
from .rings import LaurentBivar, render
from .schemas import (
    BpsDocument,
    CheckResult,
    Command,
    ErrorDocument,
    JobConfig,
    Pipeline,
    SelftestReport,
    Verdict,
    XSeriesDocument,
    XSeriesTerm,
)
from .selftest import run_selftest
from .settings import get_settings, load_env
from .xseries import XSeries

logger = logging.getLogger(__name__)
timing_logger = logging.getLogger("timing")

Handler = Callable[[JobConfig], List[BaseModel]]
COMMANDS: Dict[str, Handler] = {}


def command(name: str):
    def decorator(func: Handler):
        COMMANDS[name] = func
        return func
    return decorator


def _config_dict(config: JobConfig) -> Dict[str, Any]:
    # 输出文档与线程数、输出路径无关
    return config.model_dump(mode="json", exclude={"threads", "output"})


def _targets(config: JobConfig):
    return tuple(Partition(p) for p in config.mu)


def _data(config: JobConfig) -> WildCurveData:
    return WildCurveData(g=config.g, n=tuple(config.n), l=tuple(config.l))


def _poly_terms(poly, pair_) -> List:
    return [(a, b, str(c)) for (a, b), c in LaurentBivar.from_poly(pair_, poly).items()]


def series_document(series: XSeries, config: JobConfig) -> XSeriesDocument:
    terms = []
    for key, value in series.items():
        terms.append(XSeriesTerm(
            exponents=[list(row) for row in key],
            coefficient=render(value, series.pair),
            numerator=_poly_terms(value.numer, series.pair),
            denominator=_poly_terms(value.denom, series.pair),
        ))
    return XSeriesDocument(version=__version__, config=_config_dict(config),
                           variables=list(series.pair.names), shape=list(series.shape),
                           r_max=series.r_max, terms=terms)


@command(Command.COMPUTE_Z.value)
def cmd_compute_z(config: JobConfig) -> List[BaseModel]:
    """按管线计算配分函数并序列化"""
    data = _data(config)
    docs = []
    pipelines = [Pipeline.GW, Pipeline.REFINED] if config.pipeline == Pipeline.BOTH else [config.pipeline]
    for pipeline in pipelines:
        start = time.perf_counter()
        if pipeline == Pipeline.GW:
            if not data.equal_n:
                raise PreconditionError(f"gw 管线要求 n_a 全部相等: {data.n}")
            series = z_gw(data, config.r_max, threads=config.threads)
        elif pipeline == Pipeline.REFINED:
            series = z_pt_refined(RefinedContext(data=data, r_max=config.r_max, threads=config.threads))
        else:
            series = hmw_z(data, config.r_max, swap=get_settings().htilde_swap)
        timing_logger.info(f"compute-z {pipeline.value}: {time.perf_counter() - start:.3f}s")
        docs.append(series_document(series, config))
    return docs


@command(Command.EXTRACT_BPS.value)
def cmd_extract_bps(config: JobConfig) -> List[BaseModel]:
    """提取 P_{μ,n}(u,v) 并附带结构检验"""
    ctx = RefinedContext(data=_data(config), r_max=config.r_max, threads=config.threads)
    start = time.perf_counter()
    polys = gv_extract_many(ctx, [_targets(config)])
    timing_logger.info(f"extract-bps {config.mu}: {time.perf_counter() - start:.3f}s")
    docs = []
    for p in polys:
        checks = structural_checks(p)
        doc = p.to_document(_config_dict(config), __version__, checks)
        if doc.checks_failed:
            logger.warning(f"P_{config.mu} 有 {doc.checks_failed} 项检验未通过")
        docs.append(doc)
    return docs


@command(Command.COMPARE_HMW.value)
def cmd_compare_hmw(config: JobConfig) -> List[BaseModel]:
    """GV 与 HMW 两条管线并行运行，在代换后比较"""
    mus = _targets(config)
    if not all(all(p == 1 for p in mu) for mu in mus):
        raise PreconditionError(f"compare-hmw 要求 μ_a = (1^r): {config.mu}")
    data = _data(config)
    ctx = RefinedContext(data=data, r_max=config.r_max, threads=config.threads)
    swap = get_settings().htilde_swap
    start = time.perf_counter()
    with ThreadPoolExecutor(max_workers=2) as pool:
        gv = pool.submit(gv_extract, ctx, mus)
        hmw = pool.submit(hmw_extract, data, mus, swap)
        p, h = gv.result(), hmw.result()
    timing_logger.info(f"compare-hmw {config.mu}: {time.perf_counter() - start:.3f}s")
    if config.perturb:
        h = h.perturbed()
    verdict, diff = compare_hmw(p, h)
    checks = structural_checks(p)
    if h.failure:
        checks.append(CheckResult(name="hmw_polynomial", passed=False, detail=h.failure))
    if verdict != "equal":
        logger.warning(f"GV 与 HMW 不一致: μ={config.mu}, {len(diff)} 项差异")
    return [Verdict(version=__version__, config=_config_dict(config), mu=config.mu, n=config.n,
                    g=config.g, verdict=verdict, diff=diff, checks=checks)]


@command(Command.SELFTEST.value)
def cmd_selftest(config: JobConfig) -> List[BaseModel]:
    """运行全部内部一致性恒等式"""
    results = run_selftest(large=config.sizes == "large")
    failed = [r.name for r in results if not r.passed and not r.informational]
    if failed:
        logger.warning(f"selftest 未通过: {failed}")
    return [SelftestReport(version=__version__, config=_config_dict(config),
                           results=results, passed=not failed)]


@command(Command.GOLDEN.value)
def cmd_golden(config: JobConfig) -> List[BaseModel]:
    """重新提取并与 golden 文件逐项比较"""
    golden = BpsPolynomial.from_document(
        BpsDocument.model_validate_json(Path(config.golden).read_text(encoding="utf-8")))
    shape = tuple(max(mu.length(), 1) for mu in golden.mu)
    data = WildCurveData(g=golden.g, n=golden.n, l=shape)
    ctx = RefinedContext(data=data, r_max=golden.mu[0].size(), threads=config.threads)
    p = gv_extract(ctx, golden.mu)
    diff = []
    for key in sorted(set(p.terms) | set(golden.terms)):
        a, b = p.coefficient(*key), golden.coefficient(*key)
        if a != b:
            diff.append((key[0], key[1], str(a), str(b)))
    return [Verdict(version=__version__, config=_config_dict(config),
                    mu=[list(mu) for mu in golden.mu], n=list(golden.n), g=golden.g,
                    verdict="equal" if not diff and not p.failure else "diff",
                    diff=diff, checks=structural_checks(p))]


def _add_common(parser: argparse.ArgumentParser):
    parser.add_argument('--mode', choices=['dev', 'prod'], default=None,
                        help='加载 .env.<mode> 环境变量文件')
    parser.add_argument('--cache-dir', default=None, help='表格缓存目录')
    parser.add_argument('--no-cache', action='store_true', help='只使用内存缓存')
    parser.add_argument('--output', default=None, help='输出文件，缺省写到标准输出')
    parser.add_argument('--threads', type=int, default=None, help='工作线程数')


def _add_curve(parser: argparse.ArgumentParser, with_mu: bool):
    parser.add_argument('--g', type=int, default=0, help='亏格')
    parser.add_argument('--n', required=True, help='n_a 列表，例如 3,4')
    parser.add_argument('--l', default=None, help='ℓ_a 列表，缺省取 l(μ_a)')
    parser.add_argument('--rmax', type=int, default=None, help='截断次数')
    if with_mu:
        parser.add_argument('--mu', required=True, help='目标分拆元组，例如 [2,1],[2,1]')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wildbps", description="野退化局部曲线的精确配分函数与 BPS 提取")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser(Command.COMPUTE_Z.value, help='计算配分函数')
    _add_common(p)
    _add_curve(p, with_mu=False)
    p.add_argument('--pipeline', choices=[e.value for e in Pipeline], default=Pipeline.REFINED.value)

    p = sub.add_parser(Command.EXTRACT_BPS.value, help='提取 P_{μ,n}(u,v)')
    _add_common(p)
    _add_curve(p, with_mu=True)

    p = sub.add_parser(Command.COMPARE_HMW.value, help='GV 与 HMW 交叉验证')
    _add_common(p)
    _add_curve(p, with_mu=True)
    p.add_argument('--perturb', action='store_true', help='测试模式：扰动 ℍ')

    p = sub.add_parser(Command.SELFTEST.value, help='运行内部一致性恒等式')
    _add_common(p)
    p.add_argument('--sizes', choices=['small', 'large'], default='small')

    p = sub.add_parser(Command.GOLDEN.value, help='与 golden 文件比较')
    _add_common(p)
    p.add_argument('golden', help='BpsPolynomial JSON 文件')
    return parser


def _job_config(args: argparse.Namespace, threads: int) -> JobConfig:
    values: Dict[str, Any] = {"command": args.command, "threads": threads,
                              "output": args.output}
    for name in ("g", "n", "l", "mu", "pipeline", "sizes", "golden", "perturb"):
        value = getattr(args, name, None)
        if value is not None:
            values[name] = value
    if getattr(args, "rmax", None) is not None:
        values["r_max"] = args.rmax
    return JobConfig(**values)


def _install_cache(args: argparse.Namespace):
    if args.no_cache:
        cache.install(None)
        return
    directory = Path(args.cache_dir).expanduser() if args.cache_dir else get_settings().cache_dir
    cache.install(cache.TableCache(directory))


def _emit(docs: List[BaseModel], output: Optional[str]):
    payload = [doc.model_dump(mode="json") for doc in docs]
    text = json.dumps(payload[0] if len(payload) == 1 else payload, ensure_ascii=False, indent=2)
    if output:
        Path(output).write_text(text + "\n", encoding="utf-8")
        logger.info(f"结果已写入 {output}")
    else:
        sys.stdout.write(text + "\n")


def _error(code: str, message: str, detail: Optional[Dict] = None):
    doc = ErrorDocument(error_code=code, error_message=message, detail=detail)
    sys.stderr.write(doc.model_dump_json() + "\n")


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    load_env(args.mode)
    settings = get_settings()
    threads = args.threads or settings.threads
    try:
        config = _job_config(args, threads)
        _install_cache(args)
        handler = COMMANDS[config.command.value]
        docs = handler(config)
        _emit(docs, config.output)
        return 0
    except ValidationError as e:
        logging.exception(f"配置无效: {e}")
        _error("usage", "配置无效", {"errors": json.loads(e.json())})
        return 2
    except (PreconditionError, PartitionError) as e:
        logging.exception(f"前置条件不满足: {e}")
        _error("precondition", str(e))
        return 2
    except WildBpsError as e:
        logging.exception(f"运行失败: {e}")
        _error(type(e).__name__, str(e), getattr(e, "diff", None))
        return 1
    except OSError as e:
        logging.exception(f"文件读写失败: {e}")
        _error("io", str(e))
        return 1


if __name__ == "__main__":
    sys.exit(main())
