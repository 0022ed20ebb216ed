"""内部一致性恒等式套件

每个恒等式用 @identity 注册，返回覆盖的尺寸说明；失败时抛出 ConsistencyError 或返回 False。
"""
import logging
import time
from typing import Callable, Dict, List, Optional

from .bps import (
    bidegree_audit,
    compare_hmw,
    gv_extract,
    hmw_extract,
    r1_closed_form,
    round_trip_closure,
    synthetic_round_trip,
)
from .errors import ConsistencyError, WildBpsError
from .gw import (
    WildCurveData,
    assemble_z_r,
    cap_v_basis_check,
    central_normalization_check,
    hurwitz_brute_force,
    hurwitz_count,
    relative_cap,
    rubber_taylor_check,
    simple_and_cap,
    to_e_basis,
    to_v_basis,
    wildcap_check,
)
from .partitions import Partition, content, distributions, partitions_of
from .refined import RefinedContext, collapse_report, genus_factor_T, marked_point_reduction_check
from .rings import QY, ST, equal, monomial_map
from .schemas import IdentityResult
from .symfunc import (
    framing,
    lr_coefficients,
    principal_schur,
    stabilization_check,
    vertex,
    vertex_by_content,
)

logger = logging.getLogger(__name__)
timing_logger = logging.getLogger("timing")

Identity = Callable[[bool], str]
IDENTITIES: Dict[str, Identity] = {}


def identity(name: str):
    def decorator(func: Identity):
        IDENTITIES[name] = func
        return func
    return decorator


@identity("fusion_characters_vs_lr")
def check_fusion(large: bool) -> str:
    top = 6 if large else 4
    for ell in (2, 3):
        for n in range(1, top + 1):
            for nus in distributions(n, ell):
                lr_coefficients(*nus, check=True)
    return f"|λ| ≤ {top}, ℓ ≤ 3"


@identity("cap_convolution")
def check_cap(large: bool) -> str:
    top = 4 if large else 3
    for k in (1, 2, 3):
        for r in range(1, top + 1):
            for mu in partitions_of(r):
                simple_and_cap(mu, k, check=True)
    return f"|μ| ≤ {top}, k ≤ 3"


@identity("wildcap_convolution")
def check_wildcap(large: bool) -> str:
    top, ells = (4, (1, 2, 3)) if large else (3, (1, 2))
    for k in (1, 2, 3):
        for ell in ells:
            for r in range(1, top + 1):
                for lam in partitions_of(r):
                    wildcap_check(k, ell, lam)
    return f"|λ| ≤ {top}, ℓ ≤ {ells[-1]}, k ≤ 3"


@identity("hurwitz_brute_force")
def check_hurwitz(large: bool) -> str:
    top = 4 if large else 3
    for d in range(1, top + 1):
        for n in range(0, top + 1):
            for rho in partitions_of(d):
                for mu in partitions_of(d):
                    if hurwitz_count(n, rho, mu) != hurwitz_brute_force(n, rho, mu):
                        raise ConsistencyError(f"Hurwitz 数不符: n={n}, ρ={rho.text()}, μ={mu.text()}")
    return f"d ≤ {top}, n ≤ {top}"


@identity("rubber_taylor")
def check_rubber(large: bool) -> str:
    top = 3 if large else 2
    for r in range(1, top + 1):
        for rho in partitions_of(r):
            for lam in partitions_of(r):
                if not rubber_taylor_check(rho, lam, 2, 3):
                    return False
    return f"|ρ| ≤ {top}, k = 2, L^3"


@identity("vertex_dual_forms")
def check_vertex(large: bool) -> str:
    for r in range(0, 7):
        for nu in partitions_of(r):
            for k in (0, 1, 2):
                if not equal(vertex(nu, k), vertex_by_content(nu, k)):
                    raise ConsistencyError(f"顶点两种写法不符: ν={nu.text()}, k={k}")
    return "|ν| ≤ 6, k ≤ 2"


@identity("content_transpose")
def check_content_transpose(large: bool) -> str:
    for r in range(0, 7):
        for nu in partitions_of(r):
            lhs = QY.monomial(2 * content(nu), 0) * principal_schur(nu)
            if not equal(lhs, principal_schur(nu.conjugate())):
                raise ConsistencyError(f"q^c(ν) s_ν ≠ s_ν^t: ν={nu.text()}")
    return "|ν| ≤ 6"


@identity("framing_transpose")
def check_framing(large: bool) -> str:
    for r in range(0, 7):
        for mu in partitions_of(r):
            f_t = framing(mu.conjugate())[0]
            f = monomial_map(framing(mu)[0], ST, ST, ((0, -1), (-1, 0)))
            if not equal(f_t, f):
                raise ConsistencyError(f"f_μ^t(s,t) ≠ f_μ(t^-1, s^-1): μ={mu.text()}")
    return "|μ| ≤ 6"


@identity("specialization_stabilization")
def check_stabilization(large: bool) -> str:
    top = 4 if large else 3
    for r in range(1, top + 1):
        for mu in partitions_of(r):
            stabilization_check(mu, 12)
    return f"|μ| ≤ {top}, N = 12"


@identity("genus_factor_multiplicative")
def check_genus(large: bool) -> str:
    for r in range(1, 5):
        for lam in partitions_of(r):
            for g1 in range(3):
                for g2 in range(3):
                    lhs = genus_factor_T(g1, lam) * genus_factor_T(g2, lam)
                    if not equal(lhs, genus_factor_T(g1 + g2, lam)):
                        raise ConsistencyError(f"T 不满足乘法性: λ={lam.text()}")
    return "|λ| ≤ 4, g ≤ 2"


@identity("basis_change_inverse")
def check_basis(large: bool) -> str:
    top = 4 if large else 3
    for d in range(1, top + 1):
        e = {mu: relative_cap(mu).shift(2 * mu.length()) for mu in partitions_of(d)}
        back = to_e_basis(to_v_basis(e, d), d)
        for mu, value in e.items():
            got = back.get(mu)
            if got is None or got.eps != value.eps or not equal(got.value, value.value):
                raise ConsistencyError(f"v 基与 e 基变换不互逆: d={d}, μ={mu.text()}")
    return f"d ≤ {top}"


@identity("cap_v_basis")
def check_cap_v(large: bool) -> str:
    top = 4 if large else 3
    for d in range(1, top + 1):
        cap_v_basis_check(d)
    return f"d ≤ {top}"


@identity("tqft_normalization")
def check_tqft(large: bool) -> str:
    for g in range(3):
        for m in (1, 2, 3):
            for d in (1, 2, 3):
                central_normalization_check(g, m, d)
    data = WildCurveData(g=1, n=(2, 2), l=(1, 2))
    for r in (1, 2):
        assemble_z_r(data, r)
    return "g ≤ 2, m ≤ 3, d ≤ 3；组装 r ≤ 2"


@identity("marked_point_reduction")
def check_reduction(large: bool) -> str:
    top = 3 if large else 2
    for g in (0, 1):
        marked_point_reduction_check(g, top)
    return f"g ≤ 1, r ≤ {top}"


@identity("y1_collapse")
def check_collapse(large: bool) -> str:
    genera, top = ((0, 1, 2), 3) if large else ((0, 1), 2)
    cases = [((2,), (1,)), ((2, 2), (1, 2)), ((3, 3), (1, 1))]
    for g in genera:
        for n, l in cases:
            report = collapse_report(WildCurveData(g=g, n=n, l=l), top)
            if report["status"] != "exact":
                raise ConsistencyError(f"y = 1 特殊化不精确: g={g}, n={n}: {report}")
    return f"g ≤ {genera[-1]}, m ≤ 2, r ≤ {top}: exact"


@identity("gv_round_trip_closure")
def check_closure(large: bool) -> str:
    top = 3 if large else 2
    round_trip_closure(RefinedContext(data=WildCurveData(g=1, n=(2, 3), l=(2, 2)), r_max=top))
    return f"g = 1, n = (2,3), r ≤ {top}"


@identity("synthetic_extraction")
def check_synthetic(large: bool) -> str:
    top = 4 if large else 3
    synthetic_round_trip(WildCurveData(g=1, n=(2, 3), l=(2, 2)), top, seed=7)
    return f"r ≤ {top}"


@identity("r1_closed_form")
def check_r1(large: bool) -> str:
    for g in (0, 1, 2):
        data = WildCurveData(g=g, n=(2, 3), l=(1, 1))
        target = (Partition((1,)), Partition((1,)))
        expected = r1_closed_form(g)
        p = gv_extract(RefinedContext(data=data, r_max=1), target)
        h = hmw_extract(data, target)
        verdict, _ = compare_hmw(p, h)
        if p.terms != expected or verdict != "equal":
            raise ConsistencyError(f"r = 1 时与 (1 − uv)^(2g) 不符: g={g}")
    return "g ≤ 2"


@identity("bidegree_audit")
def check_bidegree(large: bool) -> str:
    return "; ".join(c.detail for c in bidegree_audit())


def run_identity(name: str, large: bool) -> IdentityResult:
    func = IDENTITIES[name]
    start = time.perf_counter()
    sizes, passed, detail = "", True, None
    try:
        outcome = func(large)
        if outcome is False:
            passed = False
        else:
            sizes = outcome
    except (WildBpsError, ArithmeticError, ValueError) as e:
        passed = False
        detail = str(e)
        logger.error(f"恒等式 {name} 失败: {e}")
    seconds = time.perf_counter() - start
    timing_logger.info(f"selftest {name}: {seconds:.3f}s")
    return IdentityResult(name=name, passed=passed, detail=detail, sizes=sizes,
                          seconds=round(seconds, 3), informational=name == "bidegree_audit")


def run_selftest(large: bool = False, names: Optional[List[str]] = None) -> List[IdentityResult]:
    """按注册顺序运行恒等式"""
    selected = names or list(IDENTITIES)
    unknown = [n for n in selected if n not in IDENTITIES]
    if unknown:
        raise KeyError(f"未知的恒等式: {unknown}，可选: {', '.join(IDENTITIES)}")
    return [run_identity(name, large) for name in selected]
