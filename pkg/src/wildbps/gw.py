"""非精细化管线：拓扑顶点、野因子、主配分函数，以及 Hurwitz 数、橡皮级数、帽与 TQFT 组装

所有由代数推出的恒等式都在小尺寸上作为运行期自检重新执行。
"""
import logging
import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from functools import lru_cache
from itertools import permutations
from typing import Dict, List, Optional, Sequence, Tuple

import sympy
from pydantic import BaseModel, ConfigDict, Field, model_validator
from sympy.combinatorics import Permutation
from sympy.polys.fields import FracElement

from .errors import ConsistencyError, PartitionError, PreconditionError
from .partitions import (
    Partition,
    character,
    content,
    distributions,
    partitions_of,
    splittings,
    zeta,
)
from .rings import QY, EpsilonTracked, equal, power
from .symfunc import lr_coefficients, principal_schur, vertex
from .xseries import Key, XSeries, single_group

logger = logging.getLogger(__name__)


class WildCurveData(BaseModel):
    """退化野曲线的离散数据 (g, n_a, ℓ_a)"""
    model_config = ConfigDict(frozen=True)

    g: int = Field(..., ge=0, description="亏格")
    n: Tuple[int, ...] = Field(..., description="每个标记点的极点阶 n_a")
    l: Tuple[int, ...] = Field(..., description="每个标记点的变量数 ℓ_a")

    @model_validator(mode="after")
    def _check(self):
        if not self.n:
            raise ValueError("至少需要一个标记点")
        if len(self.n) != len(self.l):
            raise ValueError(f"n 与 ℓ 长度不同: {self.n} / {self.l}")
        if any(x < 1 for x in self.n):
            raise ValueError(f"n_a 必须 ≥ 1: {self.n}")
        if any(x < 1 for x in self.l):
            raise ValueError(f"ℓ_a 必须 ≥ 1: {self.l}")
        return self

    @property
    def m(self) -> int:
        return len(self.n)

    @property
    def equal_n(self) -> bool:
        return len(set(self.n)) == 1

    @property
    def k(self) -> int:
        if not self.equal_n:
            raise PreconditionError(f"n_a 不全相等 {self.n}，请改用精细化管线")
        return self.n[0] - 1

    @property
    def deg_d(self) -> int:
        return sum(self.n)


def wild_factor_F(k: int, ell: int, lam: Partition, r_max: Optional[int] = None) -> XSeries:
    """F_{k,ℓ,λ}(x, q) = q^{-k c(λ)} Σ c^λ_{ν_1..ν_ℓ} Π x_i^{|ν_i|} q^{k c(ν_i)} s_{ν_i^t}(q̲)"""
    lam = Partition(lam)
    r = lam.size()
    prefactor = QY.monomial(-2 * k * content(lam), 0)
    terms = []
    for nus in distributions(r, ell):
        c = lr_coefficients(*nus).get(lam, 0)
        if not c:
            continue
        value = prefactor * c
        for nu in nus:
            value = value * QY.monomial(2 * k * content(nu), 0) * principal_schur(nu.conjugate())
        terms.append((tuple(nu.size() for nu in nus), value))
    return single_group(QY, ell, r if r_max is None else r_max, terms)


def _lambda_sum(fn, lams: Sequence[Partition], threads: int, zero: XSeries) -> XSeries:
    # 按 λ 并行，结果按输入顺序求和，保证确定性
    if threads > 1 and len(lams) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(fn, lams))
    else:
        parts = [fn(lam) for lam in lams]
    total = zero
    for part in parts:
        total = total + part
    return total


def z_gw(data: WildCurveData, r_max: int, bound: Optional[Key] = None, threads: int = 1) -> XSeries:
    """Z = 1 + Σ_{|λ|>0} s_{λ^t}(q̲)^{2-2g-m} Π_a F_{n-1,ℓ_a,λ}(x_a, q)"""
    if not data.equal_n:
        raise PreconditionError(f"非精细化公式要求 n_1 = … = n_m，当前 n = {data.n}；请改用精细化管线")
    k = data.k
    exponent = 2 - 2 * data.g - data.m

    def term(lam: Partition) -> XSeries:
        coef = power(QY, principal_schur(lam.conjugate()), exponent)
        blocks = [wild_factor_F(k, ell, lam, r_max) for ell in data.l]
        return XSeries.tensor(blocks, r_max, bound).scale(coef)

    lams = [lam for r in range(1, r_max + 1) for lam in partitions_of(r)]
    out = XSeries.one(QY, data.l, r_max, bound)
    logger.info(f"z_gw: g={data.g}, n={data.n}, ℓ={data.l}, r_max={r_max}, {len(lams)} 个 λ")
    return _lambda_sum(term, lams, threads, out)


def hurwitz_count(n: int, rho: Partition, mu: Partition) -> Fraction:
    """Σ_ν c(ν)^n χ^ν(ρ) χ^ν(μ) / (ζ(ρ) ζ(μ))，n 为单分支点个数"""
    rho, mu = Partition(rho), Partition(mu)
    if rho.size() != mu.size():
        raise PartitionError(f"Hurwitz 数要求 |ρ| = |μ|: {rho.text()} / {mu.text()}")
    if n < 0:
        return Fraction(0)
    total = Fraction(0)
    for nu in partitions_of(rho.size()):
        total += Fraction(content(nu) ** n * character(nu, rho) * character(nu, mu))
    return total / (zeta(rho) * zeta(mu))


def hurwitz_double(h: int, rho: Partition, mu: Partition) -> Fraction:
    """H•_h(ρ, μ)，单分支点个数 n = 2h − 2 + l(ρ) + l(μ)"""
    rho, mu = Partition(rho), Partition(mu)
    return hurwitz_count(2 * h - 2 + rho.length() + mu.length(), rho, mu)


def _cycle_type(p: Permutation) -> Partition:
    return Partition(length for length, count in p.cycle_structure.items() for _ in range(count))


def _transpositions(d: int) -> List[Permutation]:
    return [Permutation(i, j, size=d) for i in range(d) for j in range(i + 1, d)]


@lru_cache(maxsize=None)
def _factorization_counts(n: int, rho: Partition) -> Dict[Partition, int]:
    """σ ∈ C_ρ 右乘 n 个对换后，按乘积的轮换型计数"""
    d = rho.size()
    states = Counter(p for p in (Permutation(list(w)) for w in permutations(range(d)))
                     if _cycle_type(p) == rho)
    transpositions = _transpositions(d)
    for _ in range(n):
        step = Counter()
        for p, c in states.items():
            for tau in transpositions:
                step[p * tau] += c
        states = step
    counts: Dict[Partition, int] = Counter()
    for p, c in states.items():
        counts[_cycle_type(p)] += c
    return dict(counts)


def hurwitz_brute_force(n: int, rho: Partition, mu: Partition) -> Fraction:
    """(1/d!)·#{(σ ∈ C_ρ, τ_1..τ_n 对换) : στ_1⋯τ_n 的轮换型为 μ}"""
    rho, mu = Partition(rho), Partition(mu)
    d = rho.size()
    if d != mu.size():
        raise PartitionError(f"Hurwitz 数要求 |ρ| = |μ|: {rho.text()} / {mu.text()}")
    if n < 0:
        return Fraction(0)
    if d == 0:
        return Fraction(1 if n == 0 else 0)
    return Fraction(_factorization_counts(n, rho).get(mu, 0), math.factorial(d))


def rubber_series(rho: Partition, lam: Partition, k: int) -> EpsilonTracked:
    """R_{ρ,λ} = ε^{-(l(ρ)+l(λ))} Σ_ν (q^{-k c(ν)} − 1) χ^ν(ρ) χ^ν(λ) / (ζ(ρ) ζ(λ))"""
    rho, lam = Partition(rho), Partition(lam)
    if rho.size() != lam.size():
        raise PartitionError(f"橡皮级数要求 |ρ| = |λ|: {rho.text()} / {lam.text()}")
    value = QY.zero
    for nu in partitions_of(rho.size()):
        chi = character(nu, rho) * character(nu, lam)
        if chi:
            value = value + (QY.monomial(-2 * k * content(nu), 0) - 1) * chi
    value = value / (zeta(rho) * zeta(lam))
    return EpsilonTracked(value, -(rho.length() + lam.length()))


def rubber_taylor_check(rho: Partition, lam: Partition, k: int, order: int) -> bool:
    """q = e^L 展开后，L^n 的系数等于 (−k)^n/n! 乘以 n 个单分支点的 Hurwitz 数"""
    L = sympy.Symbol("L")
    value = rubber_series(rho, lam, k).value
    qh = QY.field.symbols[0]
    expr = value.as_expr().subs(qh, sympy.exp(L / 2))
    series = sympy.series(expr, L, 0, order + 1).removeO()
    for n in range(0, order + 1):
        got = sympy.Rational(sympy.simplify(series.coeff(L, n)))
        expected = Fraction(0)
        if n:
            expected = hurwitz_count(n, rho, lam) * Fraction((-k) ** n, math.factorial(n))
        if got != sympy.Rational(expected.numerator, expected.denominator):
            logger.warning(f"橡皮级数与 Hurwitz 数在 L^{n} 处不符: {got} / {expected}")
            return False
    return True


def simple_series(mu: Partition, k: int) -> EpsilonTracked:
    """S_μ = ε^{-l(μ)} Σ_ν χ^ν(μ)/ζ(μ) V_ν^{(k+1)}(q)"""
    mu = Partition(mu)
    if not mu:
        return EpsilonTracked(QY.one, 0)
    value = QY.zero
    for nu in partitions_of(mu.size()):
        chi = character(nu, mu)
        if chi:
            value = value + vertex(nu, k) * chi
    return EpsilonTracked(value / zeta(mu), -mu.length())


def relative_cap(mu: Partition) -> EpsilonTracked:
    """Z_μ = ε^{-l(μ)} Σ_ν χ^ν(μ)/ζ(μ) q^{c(ν)} s_ν(q̲)"""
    mu = Partition(mu)
    value = QY.zero
    for nu in partitions_of(mu.size()):
        chi = character(nu, mu)
        if chi:
            value = value + QY.monomial(2 * content(nu), 0) * principal_schur(nu) * chi
    return EpsilonTracked(value / zeta(mu), -mu.length())


def cap_convolution(mu: Partition, k: int) -> EpsilonTracked:
    """Z_μ = S_μ + Σ_ρ ε^{2l(ρ)} ζ(ρ) S_ρ R_{ρ,μ}"""
    mu = Partition(mu)
    total = simple_series(mu, k)
    for rho in partitions_of(mu.size()):
        term = simple_series(rho, k) * rubber_series(rho, mu, k)
        total = total + term.shift(2 * rho.length()) * zeta(rho)
    return total


def simple_and_cap(mu: Partition, k: int, check: bool = True) -> Tuple[EpsilonTracked, EpsilonTracked]:
    """(S_μ, Z_μ)；check 时验证卷积重现 Z_μ"""
    mu = Partition(mu)
    s, z = simple_series(mu, k), relative_cap(mu)
    if check:
        conv = cap_convolution(mu, k)
        if conv.eps != z.eps or not equal(conv.value, z.value):
            raise ConsistencyError(f"帽卷积与闭式不符: μ={mu.text()}, k={k}",
                                   diff={"convolution": str(conv.value), "closed": str(z.value)})
    return s, z


def _x_power(ell: int, sizes: Sequence[int], r_max: int, value: FracElement) -> XSeries:
    return single_group(QY, ell, r_max, [(tuple(sizes), value)])


def wild_simple(k: int, ell: int, lam: Partition) -> EpsilonTracked:
    """S_λ(x) = Σ_{∪ρ_i = λ} Π x_i^{|ρ_i|} S_{ρ_i}，S_∅ = 1"""
    lam = Partition(lam)
    r = lam.size()
    total = EpsilonTracked(XSeries(QY, (ell,), r), -lam.length())
    for rhos in splittings(lam, ell):
        value = QY.one
        eps = 0
        for rho in rhos:
            s = simple_series(rho, k)
            value = value * s.value
            eps += s.eps
        total = total + EpsilonTracked(_x_power(ell, [rho.size() for rho in rhos], r, value), eps)
    return total


def _closed_wildcap(k: int, ell: int, lam: Partition) -> EpsilonTracked:
    r = lam.size()
    total = XSeries(QY, (ell,), r)
    for mu in partitions_of(r):
        chi = character(mu, lam)
        if chi:
            total = total + wild_factor_F(k, ell, mu).scale(Fraction(chi, zeta(lam)))
    return EpsilonTracked(total, -lam.length())


def _convolution_wildcap(k: int, ell: int, lam: Partition) -> EpsilonTracked:
    total = wild_simple(k, ell, lam)
    for rho in partitions_of(lam.size()):
        s = wild_simple(k, ell, rho)
        rub = rubber_series(rho, lam, k)
        term = EpsilonTracked(s.value.scale(rub.value), s.eps + rub.eps)
        total = total + EpsilonTracked(term.value.scale(zeta(rho)), term.eps + 2 * rho.length())
    return total


def wildcap_W(k: int, ell: int, lam: Partition, route: str = "closed") -> EpsilonTracked:
    """野帽配分函数 W_λ(x)，route 为 closed 或 convolution"""
    lam = Partition(lam)
    if route == "closed":
        return _closed_wildcap(k, ell, lam)
    if route == "convolution":
        return _convolution_wildcap(k, ell, lam)
    raise PreconditionError(f"未知的 route: {route}")


def wildcap_check(k: int, ell: int, lam: Partition) -> bool:
    closed = wildcap_W(k, ell, lam, "closed")
    conv = wildcap_W(k, ell, lam, "convolution")
    if closed.eps != conv.eps or closed.value != conv.value:
        raise ConsistencyError(f"野帽两条路径不一致: k={k}, ℓ={ell}, λ={lam.text()}")
    return True


def _times(et: EpsilonTracked, x: Fraction) -> EpsilonTracked:
    if isinstance(et.value, XSeries):
        return EpsilonTracked(et.value.scale(x), et.eps)
    return EpsilonTracked(et.value * QY.scalar(x), et.eps)


def to_v_basis(e_coeffs: Dict[Partition, EpsilonTracked], d: int) -> Dict[Partition, EpsilonTracked]:
    """e_α = ε^{d-l(α)} ζ(α)^{-1} Σ_λ ζ(λ) χ^λ(α) v_λ"""
    out = {}
    for lam in partitions_of(d):
        total = None
        for alpha, c in e_coeffs.items():
            chi = character(lam, alpha)
            if not chi or not c:
                continue
            term = _times(c, Fraction(zeta(lam) * chi, zeta(alpha))).shift(d - alpha.length())
            total = term if total is None else total + term
        if total is not None and total:
            out[lam] = total
    return out


def to_e_basis(v_coeffs: Dict[Partition, EpsilonTracked], d: int) -> Dict[Partition, EpsilonTracked]:
    """v_λ = ζ(λ)^{-1} Σ_α ε^{l(α)-d} χ^λ(α) e_α"""
    out = {}
    for alpha in partitions_of(d):
        total = None
        for lam, c in v_coeffs.items():
            chi = character(lam, alpha)
            if not chi or not c:
                continue
            term = _times(c, Fraction(chi, zeta(lam))).shift(alpha.length() - d)
            total = term if total is None else total + term
        if total is not None and total:
            out[alpha] = total
    return out


def cap_v_basis_check(d: int) -> bool:
    """Σ_μ ε^{2l(μ)} ζ(μ) Z_μ e_μ = Σ_ρ ε^d ζ(ρ) s_{ρ^t}(q̲) v_ρ"""
    e_coeffs = {mu: relative_cap(mu).shift(2 * mu.length()) * zeta(mu) for mu in partitions_of(d)}
    v = to_v_basis(e_coeffs, d)
    for rho in partitions_of(d):
        expected = EpsilonTracked(principal_schur(rho.conjugate()) * zeta(rho), d)
        got = v.get(rho)
        if got is None or got.eps != expected.eps or not equal(got.value, expected.value):
            raise ConsistencyError(f"(0,-1) 帽在 v 基下不符: ρ={rho.text()}")
    return True


def annulus(lam: Partition) -> EpsilonTracked:
    """A^λ_λ = ε^{-d} ζ(λ)^{-1} s_{λ^t}(q̲)^{-1}"""
    value = QY.one / (principal_schur(lam.conjugate()) * zeta(lam))
    return EpsilonTracked(value, -lam.size())


def genus_operator(lam: Partition) -> EpsilonTracked:
    """G_{λ,λ} = ε^{2d} ζ(λ)²"""
    return EpsilonTracked(QY.scalar(zeta(lam) ** 2), 2 * lam.size())


def counit(lam: Partition) -> EpsilonTracked:
    """C_λ = ε^{-2d} ζ(λ)^{-2}"""
    return EpsilonTracked(QY.scalar(Fraction(1, zeta(lam) ** 2)), -2 * lam.size())


def _check_sizes(d: int, lams: Sequence[Partition]):
    if any(lam.size() != d for lam in lams):
        raise PartitionError(f"所有 λ_a 的尺寸必须为 {d}: {[lam.text() for lam in lams]}")


def tqft_operator_central(g: int, m: int, d: int, lams: Sequence[Partition]) -> EpsilonTracked:
    """C · A^{2g-2+m} · G^g · P^m 在 v 基下的系数；亏格算子每个柄作用一次"""
    lams = [Partition(lam) for lam in lams]
    _check_sizes(d, lams)
    if len(set(lams)) != 1:
        return EpsilonTracked(QY.zero, 0)
    lam = lams[0]
    return counit(lam) * annulus(lam) ** (2 * g - 2 + m) * genus_operator(lam) ** g


def tqft_central(g: int, m: int, d: int, lams: Sequence[Partition], k: int = 1) -> EpsilonTracked:
    """Z_{λ_1..λ_m} = ε^{-(2g-2+m)d} Σ_ρ s_{ρ^t}(q̲)^{-(2g-2+m)} Π δ^ρ_{λ_a}

    ε 代表 (ik𝗎)，k 只出现在 ε 中，因此这里不显式参与计算。
    """
    lams = [Partition(lam) for lam in lams]
    _check_sizes(d, lams)
    n = 2 * g - 2 + m
    if len(set(lams)) != 1:
        return EpsilonTracked(QY.zero, -n * d)
    return EpsilonTracked(power(QY, principal_schur(lams[0].conjugate()), -n), -n * d)


def pairing_normalization(g: int, m: int, lam: Partition) -> EpsilonTracked:
    """算子组装 = 闭式中心系数 × ε^{(2g-2)d} ζ(λ)^{-m}"""
    return EpsilonTracked(QY.scalar(Fraction(1, zeta(lam) ** m)), (2 * g - 2) * lam.size())


def central_normalization_check(g: int, m: int, d: int) -> bool:
    for lam in partitions_of(d):
        lams = [lam] * m
        operator = tqft_operator_central(g, m, d, lams)
        closed = tqft_central(g, m, d, lams) * pairing_normalization(g, m, lam)
        if operator.eps != closed.eps or not equal(operator.value, closed.value):
            raise ConsistencyError(f"中心系数归一化不符: g={g}, m={m}, λ={lam.text()}")
    return True


def wildcap_v_coefficients(k: int, ell: int, r: int) -> Dict[Partition, EpsilonTracked]:
    """w = Σ_α ε^{2l(α)} ζ(α) W_α e_α 在 v 基下的系数 w^λ"""
    e_coeffs = {}
    for alpha in partitions_of(r):
        w = wildcap_W(k, ell, alpha, "closed")
        e_coeffs[alpha] = EpsilonTracked(w.value.scale(zeta(alpha)), w.eps + 2 * alpha.length())
    v = to_v_basis(e_coeffs, r)
    for lam in partitions_of(r):
        expected = wild_factor_F(k, ell, lam).scale(zeta(lam))
        got = v.get(lam)
        if got is None or got.eps != r or got.value != expected:
            raise ConsistencyError(f"野帽 v 基系数与 ε^r ζ(λ) F_λ 不符: λ={lam.text()}")
    return v


def assemble_z_r(data: WildCurveData, r: int, check: bool = True) -> XSeries:
    """用 TQFT 算子与野帽的 v 基系数组装第 r 层，并与 z_gw 的同层比对"""
    k = data.k
    caps = [wildcap_v_coefficients(k, ell, r) for ell in data.l]
    total = XSeries(QY, data.l, r)
    for lam in partitions_of(r):
        central = tqft_operator_central(data.g, data.m, r, [lam] * data.m)
        blocks = [cap[lam] for cap in caps]
        eps = central.eps + sum(b.eps for b in blocks)
        if eps != 0:
            raise ConsistencyError(f"组装后 ε 指数非零: {eps}, λ={lam.text()}")
        total = total + XSeries.tensor([b.value for b in blocks], r).scale(central.value)
    if check:
        expected = z_gw(data, r).stratum(r)
        if total != expected:
            raise ConsistencyError(f"TQFT 组装与 z_gw 第 {r} 层不符: {data}")
    logger.info(f"assemble_z_r: r={r} 与 z_gw 一致，配对归一化 ε^((2g-2)r) ζ(λ)^(-m)")
    return total
