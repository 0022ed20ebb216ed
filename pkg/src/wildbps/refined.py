"""精细化稳定对配分函数：亏格因子 T、精细化野因子 G 与 Z_PT^ref

n_a 可以互不相同。Macdonald 融合系数在 (s,t) 中符号计算一次，之后代入 (qy, q/y)。
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, Optional

from pydantic import BaseModel, ConfigDict, Field

from .errors import ConsistencyError, LatticeError
from .gw import WildCurveData, z_gw
from .partitions import Partition, distributions, partitions_of
from .rings import QY, binomial_denominator, equal, on_integer_lattice, power, render, second_to_one, st_to_qy
from .symfunc import framing, macdonald_fusion, specialization_R_L
from .xseries import Key, XSeries, single_group

logger = logging.getLogger(__name__)


class RefinedContext(BaseModel):
    """精细化管线的输入：曲线数据与截断次数"""
    model_config = ConfigDict(frozen=True)

    data: WildCurveData = Field(..., description="曲线数据，不要求 n_a 相等")
    r_max: int = Field(..., ge=1, description="截断次数")
    threads: int = Field(1, ge=1, description="按 λ 并行的线程数")


def genus_factor_T(g: int, lam: Partition):
    """T_{g,λ}(q,y) = Π_□ (qy)^{-(2a+1)g} (1 − y^{a−l} q^{h})^{2g}"""
    lam = Partition(lam)
    if g < 0:
        raise ValueError(f"亏格必须非负: {g}")
    value = QY.one
    for i, j in lam.boxes():
        a, l, h = lam.arm(i, j), lam.leg(i, j), lam.hook(i, j)
        box = QY.one_minus(2 * h, 2 * (a - l)) ** (2 * g)
        value = value * power(QY, QY.monomial(2, 2), -(2 * a + 1) * g) * box
    return value


def _g(mu: Partition):
    return framing(mu)[1]


def _L_t(mu: Partition):
    return specialization_R_L(Partition(mu).conjugate(), "L")


def fusion_qy(lam: Partition, *mus: Partition):
    """Ñ^λ_{μ_1..μ_ℓ}(q,y) = N^λ_{μ_1..μ_ℓ}(qy, q/y)"""
    n = macdonald_fusion(*mus).get(Partition(lam))
    return st_to_qy(n) if n is not None else QY.zero


def refined_wild_factor_G(k: int, ell: int, lam: Partition, r_max: Optional[int] = None) -> XSeries:
    """G_{k,ℓ,λ} = Σ Ñ^λ_{μ_1..μ_ℓ} g_λ^{-k} Π x_i^{|μ_i|} g_{μ_i}^k L_{μ_i^t}"""
    lam = Partition(lam)
    r = lam.size()
    prefactor = power(QY, _g(lam), -k)
    terms = []
    for mus in distributions(r, ell):
        n = fusion_qy(lam, *mus)
        if not n:
            continue
        value = prefactor * n
        for mu in mus:
            value = value * power(QY, _g(mu), k) * _L_t(mu)
        terms.append((tuple(mu.size() for mu in mus), value))
    return single_group(QY, ell, r if r_max is None else r_max, terms)


def _lambda_coefficient(g: int, m: int, lam: Partition):
    """g_λ R_λ T_{g,λ} L_{λ^t}^{1−m}"""
    return (_g(lam) * specialization_R_L(lam, "R") * genus_factor_T(g, lam)
            * power(QY, _L_t(lam), 1 - m))


def _assert_normalized(series: XSeries):
    for key, value in series.terms.items():
        if not on_integer_lattice(value):
            raise LatticeError(f"Z 的系数不在整数 (q,y) 格上: {key} -> {render(value, QY)}")
        if not binomial_denominator(value):
            raise ConsistencyError(f"Z 的系数分母含非 (1 − q^a y^b) 型因子: {key}")


def z_pt_refined(ctx: RefinedContext, bound: Optional[Key] = None) -> XSeries:
    """Z = 1 + Σ_{|λ|>0} g_λ R_λ T_{g,λ} L_{λ^t}^{1−m} Π_a G_{n_a−1,ℓ_a,λ}(x_a, q, y)"""
    data, r_max = ctx.data, ctx.r_max

    def term(lam: Partition) -> XSeries:
        blocks = [refined_wild_factor_G(n - 1, ell, lam, r_max) for n, ell in zip(data.n, data.l)]
        series = XSeries.tensor(blocks, r_max, bound)
        return series.scale(_lambda_coefficient(data.g, data.m, lam))

    lams = [lam for r in range(1, r_max + 1) for lam in partitions_of(r)]
    logger.info(f"z_pt_refined: g={data.g}, n={data.n}, ℓ={data.l}, r_max={r_max}, {len(lams)} 个 λ")
    if ctx.threads > 1 and len(lams) > 1:
        with ThreadPoolExecutor(max_workers=ctx.threads) as pool:
            parts = list(pool.map(term, lams))
    else:
        parts = [term(lam) for lam in lams]
    out = XSeries.one(QY, data.l, r_max, bound)
    for part in parts:
        _assert_normalized(part)
        out = out + part
    return out


def closed_curve_refined(g: int, r: int):
    """无标记点时第 r 层：Σ_{|λ|=r} g_λ R_λ T_{g,λ} L_{λ^t}"""
    total = QY.zero
    for lam in partitions_of(r):
        total = total + _lambda_coefficient(g, 0, lam)
    return total


def marked_point_reduction_check(g: int, r_max: int) -> bool:
    """m = 1、ℓ = 1、n = 1 时 G 退化为 x^{|λ|} L_{λ^t}，Z 的 x^r 系数回到闭曲线形式"""
    ctx = RefinedContext(data=WildCurveData(g=g, n=(1,), l=(1,)), r_max=r_max)
    z = z_pt_refined(ctx)
    for r in range(1, r_max + 1):
        got = z.coefficient(((r,),))
        if not equal(got, closed_curve_refined(g, r)):
            raise ConsistencyError(f"单标记点退化与闭曲线形式不符: g={g}, r={r}")
    return True


def collapse_report(data: WildCurveData, r_max: int) -> Dict[str, object]:
    """y = 1 特殊化与非精细化 Z 的比较；结果为 exact，或给出统一的单项式比值"""
    refined = z_pt_refined(RefinedContext(data=data, r_max=r_max))
    unrefined = z_gw(data, r_max)
    specialized = refined.map_coefficients(lambda c: second_to_one(c, QY))
    if specialized == unrefined:
        return {"status": "exact", "monomial": None}
    ratios = set()
    for key, value in specialized.terms.items():
        if key == specialized.zero_key:
            continue
        other = unrefined.coefficient(key)
        if not other:
            return {"status": "mismatch", "monomial": None, "key": str(key)}
        ratio = value / other
        if len(ratio.numer.terms()) != 1 or len(ratio.denom.terms()) != 1:
            return {"status": "mismatch", "monomial": None, "key": str(key)}
        ratios.add(render(ratio, QY))
    if len(ratios) == 1:
        monomial = ratios.pop()
        logger.warning(f"y = 1 特殊化与非精细化 Z 相差统一因子 {monomial}")
        return {"status": "monomial", "monomial": monomial}
    return {"status": "mismatch", "monomial": None, "ratios": sorted(ratios)}
