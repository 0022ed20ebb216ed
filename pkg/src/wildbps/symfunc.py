"""对称函数：单项式基为唯一内部表示，Schur 与 Macdonald 基按需计算并缓存"""
import json
import logging
from fractions import Fraction
from functools import lru_cache
from typing import Any, Dict, Iterable, List, Optional, Tuple

from sympy import Matrix
from sympy.polys.fields import FracElement
from sympy.utilities.iterables import multiset_permutations

from . import cache
from .errors import ConsistencyError, PreconditionError
from .partitions import (
    EMPTY,
    Partition,
    character,
    content,
    partition_tuples,
    partitions_of,
    union,
    zeta,
)
from .rings import (
    QY,
    ST,
    VariablePair,
    monomial_map,
    parse_rational,
    st_to_qy,
    swap,
)
from .xseries import XSeries, single_group

logger = logging.getLogger(__name__)


def _mul_scalar(c, x: Fraction):
    if isinstance(c, FracElement):
        return c * x.numerator / x.denominator
    return c * x


def _normalize(c):
    if isinstance(c, Fraction) and c.denominator == 1:
        return int(c)
    return c


class SymFunc:
    """单项式基展开 Σ c_λ m_λ；系数为 BigRational 或有理函数"""

    basis = "monomial"

    def __init__(self, degree: int, coeffs: Optional[Dict[Partition, Any]] = None):
        self.degree = degree
        self.coeffs: Dict[Partition, Any] = {}
        for lam, c in (coeffs or {}).items():
            if lam.size() != degree:
                raise PreconditionError(f"{lam.text()} 的尺寸不是 {degree}")
            if c:
                self.coeffs[lam] = _normalize(c)

    def __repr__(self):
        body = " + ".join(f"({c})*m{lam.text()}" for lam, c in self.items())
        return f"SymFunc[{self.degree}]({body or '0'})"

    def __bool__(self):
        return bool(self.coeffs)

    def coefficient(self, lam: Partition):
        return self.coeffs.get(Partition(lam), 0)

    def items(self) -> List[Tuple[Partition, Any]]:
        return sorted(self.coeffs.items(), reverse=True)

    def leading(self) -> Partition:
        """字典序最大的支撑分拆"""
        return max(self.coeffs)

    def __add__(self, other: "SymFunc") -> "SymFunc":
        if other.degree != self.degree:
            raise PreconditionError("次数不同的对称函数不能相加")
        out = dict(self.coeffs)
        for lam, c in other.coeffs.items():
            out[lam] = out[lam] + c if lam in out else c
        return SymFunc(self.degree, out)

    def __neg__(self):
        return SymFunc(self.degree, {k: -v for k, v in self.coeffs.items()})

    def __sub__(self, other: "SymFunc") -> "SymFunc":
        return self + (-other)

    def scale(self, c) -> "SymFunc":
        if isinstance(c, Fraction):
            return SymFunc(self.degree, {k: _mul_scalar(v, c) for k, v in self.coeffs.items()})
        return SymFunc(self.degree, {k: v * c for k, v in self.coeffs.items()})

    def map_coefficients(self, fn) -> "SymFunc":
        return SymFunc(self.degree, {k: fn(v) for k, v in self.coeffs.items()})

    def __mul__(self, other: "SymFunc") -> "SymFunc":
        out: Dict[Partition, Any] = {}
        for lam, a in self.coeffs.items():
            for mu, b in other.coeffs.items():
                for nu, n in monomial_product(lam, mu).items():
                    term = a * b * n
                    out[nu] = out[nu] + term if nu in out else term
        return SymFunc(self.degree + other.degree, out)

    def equals(self, other: "SymFunc") -> bool:
        return self.degree == other.degree and not (self - other)


def one() -> SymFunc:
    return SymFunc(0, {EMPTY: 1})


def monomial(lam: Partition, coeff: Any = 1) -> SymFunc:
    lam = Partition(lam)
    return SymFunc(lam.size(), {lam: coeff})


@lru_cache(maxsize=None)
def monomial_product(lam: Partition, mu: Partition) -> Dict[Partition, int]:
    """m_λ m_μ = Σ a_ν m_ν；a_ν 为 x^ν 的系数"""
    n = lam.size() + mu.size()
    out = {}
    target_mu = None
    for nu in partitions_of(n):
        length = len(nu)
        if length < max(len(lam), len(mu)) or length > len(lam) + len(mu):
            continue
        target_mu = sorted(tuple(mu) + (0,) * (length - len(mu)))
        count = 0
        for alpha in multiset_permutations(list(lam) + [0] * (length - len(lam))):
            rest = [a - b for a, b in zip(nu, alpha)]
            if min(rest) >= 0 and sorted(rest) == target_mu:
                count += 1
        if count:
            out[nu] = count
    return out


def _assignments(parts: Tuple[int, ...], target: Tuple[int, ...]) -> int:
    """把 parts 分配到 target 各位置、和恰为 target 的方式数"""
    if not parts:
        return 1 if not any(target) else 0
    first, rest = parts[0], parts[1:]
    total = 0
    for i, t in enumerate(target):
        if t >= first:
            total += _assignments(rest, target[:i] + (t - first,) + target[i + 1:])
    return total


@lru_cache(maxsize=None)
def _transition(n: int) -> Tuple[Tuple[Partition, ...], Dict, Dict]:
    """p_ρ = Σ_μ M[ρ][μ] m_μ 及其逆矩阵"""
    basis = partitions_of(n)
    forward = {rho: {mu: _assignments(tuple(rho), tuple(mu)) for mu in basis} for rho in basis}
    matrix = Matrix([[forward[rho][mu] for mu in basis] for rho in basis])
    inverse_matrix = matrix.inv()
    inverse = {mu: {rho: Fraction(int(inverse_matrix[i, j].p), int(inverse_matrix[i, j].q))
                    for j, rho in enumerate(basis)}
               for i, mu in enumerate(basis)}
    return basis, forward, inverse


def power_sum(rho: Partition) -> SymFunc:
    rho = Partition(rho)
    _, forward, _ = _transition(rho.size())
    return SymFunc(rho.size(), forward[rho])


def to_power_sums(f: SymFunc) -> Dict[Partition, Any]:
    _, _, inverse = _transition(f.degree)
    out: Dict[Partition, Any] = {}
    for mu, c in f.coeffs.items():
        for rho, x in inverse[mu].items():
            if x:
                term = _mul_scalar(c, x)
                out[rho] = out[rho] + term if rho in out else term
    return {k: v for k, v in out.items() if v}


def from_power_sums(coeffs: Dict[Partition, Any], degree: int) -> SymFunc:
    _, forward, _ = _transition(degree)
    out: Dict[Partition, Any] = {}
    for rho, c in coeffs.items():
        for mu, n in forward[rho].items():
            if n:
                term = c * n
                out[mu] = out[mu] + term if mu in out else term
    return SymFunc(degree, out)


def _encode_symfunc(f: SymFunc) -> str:
    return json.dumps({"degree": f.degree,
                       "terms": [[lam.text(), str(c)] for lam, c in f.items()]})


def _decoder(pair_: Optional[VariablePair]):
    def decode(text: str) -> SymFunc:
        data = json.loads(text)
        coeffs = {}
        for lam, c in data["terms"]:
            coeffs[Partition.parse(lam)] = (parse_rational(c, pair_) if pair_ is not None
                                            else Fraction(c))
        return SymFunc(data["degree"], coeffs)
    return decode


_character = cache.persistent("character", str, int)(character)


def _schur_power_coefficient(lam: Partition, rho: Partition) -> Fraction:
    return Fraction(_character(lam, rho), zeta(rho))


@lru_cache(maxsize=None)
def schur(lam: Partition) -> SymFunc:
    """s_λ = Σ_ρ ζ(ρ)^{-1} χ^λ(ρ) p_ρ，展开到单项式基"""
    lam = Partition(lam)
    coeffs = {rho: _schur_power_coefficient(lam, rho) for rho in partitions_of(lam.size())}
    return from_power_sums(coeffs, lam.size())


def schur_coefficients(f: SymFunc) -> Dict[Partition, Any]:
    """⟨f, s_λ⟩ = Σ_ρ f_ρ χ^λ(ρ)"""
    p = to_power_sums(f)
    out = {}
    for lam in partitions_of(f.degree):
        total = 0
        for rho, c in p.items():
            chi = _character(lam, rho)
            if chi:
                total = total + c * chi
        if total:
            out[lam] = _normalize(total)
    return out


def hall_inner(f: SymFunc, g: SymFunc):
    pf, pg = to_power_sums(f), to_power_sums(g)
    total = 0
    for rho, c in pf.items():
        if rho in pg:
            total = total + c * pg[rho] * zeta(rho)
    return total


def _lr_by_product(nus: Tuple[Partition, ...]) -> Dict[Partition, int]:
    prod = one()
    for nu in nus:
        prod = prod * schur(nu)
    return {lam: int(c) for lam, c in schur_coefficients(prod).items()}


def _lr_by_characters(nus: Tuple[Partition, ...]) -> Dict[Partition, int]:
    """Σ_{ρ_i} χ^λ(∪ρ_i) Π ζ(ρ_i)^{-1} χ^{ν_i}(ρ_i)"""
    n = sum(nu.size() for nu in nus)
    weights: Dict[Partition, Fraction] = {}
    for rhos in partition_tuples(nu.size() for nu in nus):
        w = Fraction(1)
        for nu, rho in zip(nus, rhos):
            w *= Fraction(_character(nu, rho), zeta(rho))
            if not w:
                break
        if w:
            key = union(*rhos)
            weights[key] = weights.get(key, 0) + w
    out = {}
    for lam in partitions_of(n):
        total = sum((w * _character(lam, rho) for rho, w in weights.items()), Fraction(0))
        if total:
            if total.denominator != 1:
                raise ConsistencyError(f"LR 系数不是整数: {lam.text()} -> {total}")
            out[lam] = int(total)
    return out


def _encode_lr(table: Dict[Partition, int]) -> str:
    return json.dumps([[lam.text(), c] for lam, c in sorted(table.items(), reverse=True)])


def _decode_lr(text: str) -> Dict[Partition, int]:
    return {Partition.parse(lam): int(c) for lam, c in json.loads(text)}


@cache.persistent("lr", _encode_lr, _decode_lr)
def _lr(nus: Tuple[Partition, ...], check: bool) -> Dict[Partition, int]:
    by_characters = _lr_by_characters(nus)
    if check:
        by_product = _lr_by_product(nus)
        if by_product != by_characters:
            raise ConsistencyError(
                f"LR 两条路径不一致: {[nu.text() for nu in nus]}",
                diff={"product": {k.text(): v for k, v in by_product.items()},
                      "characters": {k.text(): v for k, v in by_characters.items()}})
    return by_characters


def lr_coefficients(*nus: Partition, check: bool = True) -> Dict[Partition, int]:
    """融合系数 c^λ_{ν_1..ν_ℓ}；空分拆不参与"""
    nus = tuple(Partition(nu) for nu in nus if nu)
    if not nus:
        return {EMPTY: 1}
    if len(nus) == 1:
        return {nus[0]: 1}
    return _lr(nus, check)


def _mac_norm(rho: Partition) -> FracElement:
    """⟨p_ρ, p_ρ⟩_{s,t} = ζ(ρ) Π (1 − s^{ρ_i}) / (1 − t^{ρ_i})"""
    value = ST.scalar(zeta(rho))
    for part in rho:
        value = value * ST.one_minus(2 * part, 0) / ST.one_minus(0, 2 * part)
    return value


def macdonald_inner(f: SymFunc, g: SymFunc) -> FracElement:
    pf, pg = to_power_sums(f), to_power_sums(g)
    total = ST.zero
    for rho, c in pf.items():
        if rho in pg:
            total = total + ST.scalar(c) * ST.scalar(pg[rho]) * _mac_norm(rho)
    return total


@lru_cache(maxsize=None)
def _macdonald_basis(n: int) -> Dict[Partition, SymFunc]:
    # 按字典序从小到大做 Gram-Schmidt，字典序细化了优势序
    basis: Dict[Partition, SymFunc] = {}
    norms: Dict[Partition, FracElement] = {}
    for lam in sorted(partitions_of(n)):
        p = monomial(lam, ST.one)
        for mu, pm in basis.items():
            coeff = macdonald_inner(monomial(lam, ST.one), pm) / norms[mu]
            if coeff:
                p = p - pm.scale(coeff)
        basis[lam] = p
        norms[lam] = macdonald_inner(p, p)
    logger.debug(f"Macdonald P 基完成: degree {n}")
    return basis


@cache.persistent("macdonald_P", _encode_symfunc, _decoder(ST))
def macdonald_P(lam: Partition) -> SymFunc:
    """P_λ(s,t; x)，m_λ 的系数为 1"""
    lam = Partition(lam)
    if not lam:
        return SymFunc(0, {EMPTY: ST.one})
    return _macdonald_basis(lam.size())[lam]


def _encode_fusion(table: Dict[Partition, FracElement]) -> str:
    return json.dumps([[lam.text(), str(c)] for lam, c in sorted(table.items(), reverse=True)])


def _decode_fusion(text: str) -> Dict[Partition, FracElement]:
    return {Partition.parse(lam): parse_rational(c, ST) for lam, c in json.loads(text)}


@cache.persistent("macdonald_N", _encode_fusion, _decode_fusion)
def _fusion(mus: Tuple[Partition, ...]) -> Dict[Partition, FracElement]:
    product = SymFunc(0, {EMPTY: ST.one})
    for mu in mus:
        product = product * macdonald_P(mu)
    out = {}
    remainder = product
    while remainder:
        lam = remainder.leading()
        c = remainder.coeffs[lam]
        out[lam] = c
        remainder = remainder - macdonald_P(lam).scale(c)
    return out


def macdonald_fusion(*mus: Partition) -> Dict[Partition, FracElement]:
    """Π P_{μ_i} = Σ_λ N^λ_{μ_1..μ_ℓ}(s,t) P_λ"""
    mus = tuple(Partition(mu) for mu in mus if mu)
    if not mus:
        return {EMPTY: ST.one}
    if len(mus) == 1:
        return {mus[0]: ST.one}
    return _fusion(mus)


def integral_factor(lam: Partition) -> FracElement:
    """c_λ = Π (1 − s^{a} t^{l+1})，J_λ = c_λ P_λ"""
    value = ST.one
    for a, l in lam.arm_legs():
        value = value * ST.one_minus(2 * a, 2 * (l + 1))
    return value


def integral_form(lam: Partition) -> SymFunc:
    return macdonald_P(lam).scale(integral_factor(lam))


def _invert_t(f: FracElement) -> FracElement:
    return monomial_map(f, ST, ST, ((1, 0), (0, -1)))


@cache.persistent("htilde", _encode_symfunc, _decoder(ST))
def _modified(lam: Partition, swap_args: bool) -> SymFunc:
    j = to_power_sums(integral_form(lam))
    plethysm = {}
    for rho, c in j.items():
        denom = ST.one
        for part in rho:
            denom = denom * ST.one_minus(0, 2 * part)
        plethysm[rho] = c / denom
    shift = ST.monomial(0, 2 * lam.n_weight())
    h = from_power_sums({rho: shift * _invert_t(c) for rho, c in plethysm.items()}, lam.size())
    if swap_args:
        h = h.map_coefficients(lambda c: swap(c, ST))
    _assert_schur_positive(lam, h)
    return h


def _assert_schur_positive(lam: Partition, h: SymFunc):
    for nu, c in schur_coefficients(h).items():
        if c.denom != 1:
            raise ConsistencyError(f"H̃_{lam.text()} 的 Schur 系数不是多项式: {nu.text()} -> {c}")
        if any(int(v) < 0 for v in c.numer.values()):
            raise ConsistencyError(f"H̃_{lam.text()} 的 Schur 系数含负系数: {nu.text()} -> {c}")


def modified_macdonald(lam: Partition, n_vars: int, swap_args: bool = False) -> SymFunc:
    """H̃_λ(x; q, t) = t^{n(λ)} J_λ[X/(1 − t^{-1}); q, t^{-1}]，参数记为 ST 域的 (s, t)"""
    lam = Partition(lam)
    if n_vars < lam.size():
        raise PreconditionError(f"变量数 {n_vars} 小于 |λ| = {lam.size()}")
    return _modified(lam, swap_args)


def _principal(lam: Partition) -> FracElement:
    value = QY.monomial(lam.size() + 2 * lam.n_weight(), 0)
    for i, j in lam.boxes():
        value = value / QY.one_minus(2 * lam.hook(i, j), 0)
    return value


@cache.persistent("principal_spec", str, lambda text: parse_rational(text, QY))
def principal_schur(nu: Partition) -> FracElement:
    """s_ν(q^{1/2}, q^{3/2}, …) = q^{|ν|/2 + n(ν)} Π (1 − q^{h})^{-1}"""
    return _principal(Partition(nu))


def vertex(nu: Partition, k: int) -> FracElement:
    """V_ν^{(k+1)}(q) = q^{k c(ν)} s_{ν^t}(q̲)"""
    nu = Partition(nu)
    return QY.monomial(2 * k * content(nu), 0) * principal_schur(nu.conjugate())


def vertex_by_content(nu: Partition, k: int) -> FracElement:
    """V_ν^{(k+1)}(q) = q^{(k+1) c(ν)} s_ν(q̲)"""
    nu = Partition(nu)
    return QY.monomial(2 * (k + 1) * content(nu), 0) * principal_schur(nu)


def _R_st(mu: Partition) -> FracElement:
    value = ST.monomial(0, mu.size() + 2 * mu.n_weight())
    for a, l in mu.arm_legs():
        value = value / ST.one_minus(2 * a, 2 * (l + 1))
    return value


def _L_st(mu: Partition) -> FracElement:
    value = ST.monomial(mu.size() + 2 * mu.n_weight(), 0)
    for a, l in mu.arm_legs():
        value = value / ST.one_minus(2 * (l + 1), 2 * a)
    return value


def specialization_st(mu: Partition, which: str) -> FracElement:
    """(s,t) 变量下的 R_μ = P_μ(s,t; t̲) 与 L_μ = P_μ(t,s; s̲)"""
    mu = Partition(mu)
    if which == "R":
        return _R_st(mu)
    if which == "L":
        return _L_st(mu)
    raise PreconditionError(f"which 只能是 R 或 L: {which}")


@lru_cache(maxsize=None)
def specialization_R_L(mu: Partition, which: str) -> FracElement:
    """R_μ(q,y) 与 L_μ(q,y)：在 specialization_st 中取 s = qy, t = q/y"""
    return st_to_qy(specialization_st(mu, which))


@lru_cache(maxsize=None)
def framing(mu: Partition) -> Tuple[FracElement, FracElement]:
    """f_μ(s,t) = Π s^{a} t^{-l}，g_μ(q,y) = f_μ(qy, q/y)"""
    mu = Partition(mu)
    arms = sum(a for a, _ in mu.arm_legs())
    legs = sum(l for _, l in mu.arm_legs())
    f = ST.monomial(2 * arms, -2 * legs)
    return f, st_to_qy(f)


def monomial_into_xseries(mu: Partition, n_vars: int, k: int, pair_: VariablePair,
                          r_max: int, coeff: Optional[FracElement] = None) -> XSeries:
    """m_μ(x_1^k, …, x_ℓ^k) 作为单组级数，每个不同的指数排列系数为 1"""
    mu = Partition(mu)
    if k < 1:
        raise PreconditionError(f"k 必须为正: {k}")
    value = pair_.one if coeff is None else coeff
    if len(mu) > n_vars:
        return XSeries(pair_, (n_vars,), r_max)
    padded = [p * k for p in mu] + [0] * (n_vars - len(mu))
    return single_group(pair_, n_vars, r_max,
                        ((tuple(alpha), value) for alpha in multiset_permutations(padded)))


def symfunc_into_xseries(f: SymFunc, n_vars: int, pair_: VariablePair, r_max: int) -> XSeries:
    out = XSeries(pair_, (n_vars,), r_max)
    for lam, c in f.items():
        out = out + monomial_into_xseries(lam, n_vars, 1, pair_, r_max, coeff=pair_.scalar(c))
    return out


def evaluate_principal(f: SymFunc, pair_: VariablePair, index: int, n_vars: int) -> FracElement:
    """在 x_i = v^{(2i-1)/2}（i ≤ n_vars）处直接求值，v 为 pair_ 的第 index 个变量"""
    total = pair_.zero
    for lam, c in f.coeffs.items():
        if len(lam) > n_vars:
            continue
        padded = list(lam) + [0] * (n_vars - len(lam))
        acc = pair_.zero
        for alpha in multiset_permutations(padded):
            e = sum(a * (2 * i + 1) for i, a in enumerate(alpha))
            acc = acc + (pair_.monomial(e, 0) if index == 0 else pair_.monomial(0, e))
        total = total + pair_.scalar(c) * acc
    return total


def valuation(f: FracElement, index: int) -> int:
    """f 在第 index 个生成元处的赋值"""
    num = min(m[index] for m in f.numer.keys())
    den = min(m[index] for m in f.denom.keys())
    return num - den


def _swap_parameters(f: SymFunc) -> SymFunc:
    return SymFunc(f.degree, {lam: swap(ST.scalar(c), ST) for lam, c in f.items()})


def stabilization_check(mu: Partition, n_vars: int = 12) -> bool:
    """s_μ(q̲)、R_μ、L_μ 的闭式与 n_vars 个变量的截断求值在次数 ≤ n_vars 内一致"""
    mu = Partition(mu)
    p = macdonald_P(mu)
    cases = [
        ("s", principal_schur(mu), evaluate_principal(schur(mu), QY, 0, n_vars), 0),
        ("R", specialization_st(mu, "R"), evaluate_principal(p, ST, 1, n_vars), 1),
        ("L", specialization_st(mu, "L"), evaluate_principal(_swap_parameters(p), ST, 0, n_vars), 0),
    ]
    for label, closed, truncated, index in cases:
        diff = closed - truncated
        # 缺少的变量贡献的加倍格指数至少为 2·n_vars + 1
        if diff and valuation(diff, index) <= 2 * n_vars:
            raise ConsistencyError(
                f"{label}_{mu.text()} 的闭式与 {n_vars} 变量截断在低次项不一致")
    return True
