"""BPS 提取：GV 展开的逐层 k 反演、HMW 配分函数与 ℍ 的提取、维数公式和结构检验

整数性、多项式性、双次数与对称性都是被检验的猜想，失败时写进报告而不抛出异常。
"""
import logging
import random
from fractions import Fraction
from itertools import product
from math import gcd
from typing import Callable, Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field
from sympy.polys.fields import FracElement

from .errors import ConsistencyError, InexactDivision, LatticeError, PartitionError, PreconditionError
from .gw import WildCurveData
from .partitions import Partition, partitions_of
from .refined import RefinedContext, z_pt_refined
from .rings import QY, UV, ZW, LaurentBivar, equal, monomial_map, power, st_to_zw_squares, substitute_power
from .schemas import BpsDocument, CheckResult
from .symfunc import modified_macdonald, monomial_into_xseries, symfunc_into_xseries
from .xseries import Key, XSeries, pad_key

logger = logging.getLogger(__name__)

Target = Tuple[Partition, ...]


class BpsPolynomial(BaseModel):
    """P_{μ,n}(u,v)，指数为名义整数"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    mu: Tuple[Partition, ...] = Field(..., description="分拆元组")
    n: Tuple[int, ...] = Field(..., description="n_a")
    g: int = Field(..., description="亏格")
    d: int = Field(..., description="维数")
    terms: Dict[Tuple[int, int], Fraction] = Field(default_factory=dict, description="(u 指数, v 指数) → 系数")
    failure: Optional[str] = Field(None, description="提取失败时的说明")

    def coefficient(self, a: int, b: int) -> Fraction:
        return self.terms.get((a, b), Fraction(0))

    def bidegree(self) -> Tuple[int, int]:
        if not self.terms:
            return (0, 0)
        return (max(a for a, _ in self.terms), max(b for _, b in self.terms))

    def to_laurent(self) -> LaurentBivar:
        return LaurentBivar(UV, {(2 * a, 2 * b): c for (a, b), c in self.terms.items()})

    def to_document(self, config: dict, version: str, checks: List[CheckResult]) -> BpsDocument:
        return BpsDocument(
            version=version,
            config=config,
            mu=[list(p) for p in self.mu],
            n=list(self.n),
            g=self.g,
            d=self.d,
            terms=[(a, b, str(c)) for (a, b), c in sorted(self.terms.items())],
            checks=checks,
            checks_failed=sum(1 for c in checks if not c.passed and not c.informational),
            failure=self.failure,
        )

    @classmethod
    def from_document(cls, doc: BpsDocument) -> "BpsPolynomial":
        return cls(mu=tuple(Partition(p) for p in doc.mu), n=tuple(doc.n), g=doc.g, d=doc.d,
                   terms={(a, b): Fraction(c) for a, b, c in doc.terms}, failure=doc.failure)


class HmwPolynomial(BaseModel):
    """ℍ_{μ,n}(z,w)，指数为名义整数"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    mu: Tuple[Partition, ...] = Field(..., description="分拆元组")
    n_total: int = Field(..., description="deg D = Σ n_a")
    g: int = Field(..., description="亏格")
    terms: Dict[Tuple[int, int], Fraction] = Field(default_factory=dict, description="(z 指数, w 指数) → 系数")
    failure: Optional[str] = Field(None, description="提取失败时的说明")

    def perturbed(self) -> "HmwPolynomial":
        """故障注入：最低项系数加一"""
        terms = dict(self.terms)
        key = min(terms) if terms else (0, 0)
        terms[key] = terms.get(key, Fraction(0)) + 1
        return self.model_copy(update={"terms": terms})


def dimension_d(mus, n, g: int) -> int:
    """d = 2r²(g−1) + Σ_a n_a (r² − Σ_i μ_{a,i}²) + 2"""
    mus = [Partition(mu) for mu in mus]
    sizes = {mu.size() for mu in mus}
    if len(sizes) != 1:
        raise PartitionError(f"所有 |μ_a| 必须相等: {[mu.text() for mu in mus]}")
    if len(mus) != len(n):
        raise PartitionError(f"μ 元组长度 {len(mus)} 与 n 的长度 {len(n)} 不符")
    r = sizes.pop()
    d = 2 * r * r * (g - 1) + sum(na * (r * r - sum(p * p for p in mu)) for na, mu in zip(n, mus)) + 2
    if d % 2:
        raise LatticeError(f"维数 d = {d} 不是偶数")
    return d


def target_tuples(r: int, shape) -> List[Target]:
    """|μ_a| = r 且 l(μ_a) ≤ ℓ_a 的全部分拆元组"""
    per_group = [[mu for mu in partitions_of(r) if mu.length() <= ell] for ell in shape]
    return [tuple(t) for t in product(*per_group)]


def _divisors(mus: Target) -> List[int]:
    common = 0
    for mu in mus:
        for p in mu:
            common = gcd(common, p)
    return [k for k in range(2, common + 1) if common % k == 0]


def _check_targets(mus: Target, shape):
    if len(mus) != len(shape):
        raise PreconditionError(f"μ 元组长度 {len(mus)} 与 m = {len(shape)} 不符")
    for mu, ell in zip(mus, shape):
        if mu.length() > ell:
            raise PreconditionError(f"ℓ_a = {ell} 小于 l(μ_a) = {mu.length()}: {mu.text()}")


def assert_representative_coefficient(mu: Partition, ell: int):
    """m_μ 在排序代表单项式上的系数恰为 1"""
    series = monomial_into_xseries(mu, ell, 1, QY, mu.size())
    key = pad_key([mu], (ell,))
    if not equal(series.coefficient(key), QY.one):
        raise ConsistencyError(f"m_{mu.text()} 在代表单项式上的系数不是 1")


class LayeredExtractor:
    """按 r 递增逐层求解 k = 1 项，k > 1 的贡献用已求出的低层结果扣除"""

    def __init__(self, log: XSeries, data: WildCurveData,
                 kernel: Callable[[int, Target, FracElement], FracElement],
                 solve: Callable[[Target, FracElement], FracElement]):
        self.log = log
        self.data = data
        self.kernel = kernel
        self.solve = solve
        self.memo: Dict[Target, FracElement] = {}

    def raw(self, mus: Target) -> FracElement:
        """返回目标 μ 的有理函数形式（即使它不是多项式）"""
        mus = tuple(Partition(mu) for mu in mus)
        if mus in self.memo:
            return self.memo[mus]
        for mu, ell in zip(mus, self.data.l):
            assert_representative_coefficient(mu, ell)
        residual = self.log.coefficient(pad_key(mus, self.log.shape))
        for k in _divisors(mus):
            lower = tuple(mu.divide(k) for mu in mus)
            residual = residual - self.kernel(k, lower, self.raw(lower))
        value = self.solve(mus, residual)
        self.memo[mus] = value
        return value


def _to_nominal(f: FracElement, pair_) -> Tuple[Dict[Tuple[int, int], Fraction], Optional[str]]:
    """把 Laurent 多项式读成名义指数；不是 Laurent 多项式时返回失败说明"""
    try:
        return LaurentBivar.from_field(f, pair_).nominal_terms(), None
    except InexactDivision as e:
        return {}, f"不是 Laurent 多项式: {e}"
    except LatticeError as e:
        return {}, f"出现半整数指数: {e}"


def uv_at_qy_power(f: FracElement, k: int) -> FracElement:
    """P(u, v) ↦ P((qy)^{-k}, y^k)"""
    return monomial_map(f, UV, QY, ((-k, 0), (-k, k)))


def qy_to_uv(f: FracElement) -> FracElement:
    """q = u^{-1} v^{-1}, y = v"""
    return monomial_map(f, QY, UV, ((-1, 0), (-1, 1)))


def _gv_prefactor(k: int, r: int, d: int) -> FracElement:
    """y^{-kr} (q/y)^{kd/2} / ((1 − (qy)^{-k})(1 − (q/y)^k))"""
    num = QY.nominal(k * d // 2, -k * r - k * d // 2)
    den = QY.one_minus(-2 * k, -2 * k) * QY.one_minus(2 * k, -2 * k)
    return num / den


class GvExtraction:
    """GV 展开 ln Z = −Σ_k Σ_μ Π m_{μ_a}(x_a^k)/k · K_μ((qy)^{-k}, y^k) 的提取"""

    def __init__(self, log: XSeries, data: WildCurveData):
        self.data = data
        self.engine = LayeredExtractor(log, data, self.kernel, self._solve)

    def _d(self, mus: Target) -> int:
        return dimension_d(mus, self.data.n, self.data.g)

    def kernel(self, k: int, mus: Target, p_uv: FracElement) -> FracElement:
        r = mus[0].size()
        value = _gv_prefactor(k, r, self._d(mus)) * uv_at_qy_power(p_uv, k)
        return -value / k

    def _solve(self, mus: Target, residual: FracElement) -> FracElement:
        r = mus[0].size()
        p_qy = -residual / _gv_prefactor(1, r, self._d(mus))
        return qy_to_uv(p_qy)

    def extract(self, mus: Target) -> BpsPolynomial:
        mus = tuple(Partition(mu) for mu in mus)
        raw = self.engine.raw(mus)
        terms, failure = _to_nominal(raw, UV)
        if failure:
            logger.warning(f"P_{mus} 提取失败: {failure}")
        return BpsPolynomial(mu=mus, n=self.data.n, g=self.data.g, d=self._d(mus),
                             terms=terms, failure=failure)


def gv_log(ctx: RefinedContext, bound: Optional[Key] = None) -> XSeries:
    """ln Z_PT^ref，限制在 bound 之下"""
    return z_pt_refined(ctx, bound).log()


def gv_extract(ctx: RefinedContext, mus) -> BpsPolynomial:
    """从精细化配分函数中提取 P_{μ,n}(u,v)"""
    mus = tuple(Partition(mu) for mu in mus)
    _check_targets(mus, ctx.data.l)
    r = mus[0].size()
    if r > ctx.r_max:
        raise PreconditionError(f"|μ_a| = {r} 超过 r_max = {ctx.r_max}")
    ctx = ctx.model_copy(update={"r_max": r})
    log = gv_log(ctx, pad_key(mus, ctx.data.l))
    return GvExtraction(log, ctx.data).extract(mus)


def gv_extract_many(ctx: RefinedContext, targets) -> List[BpsPolynomial]:
    """多个目标共用一次 ln Z，bound 取各代表单项式的逐项最大值"""
    targets = [tuple(Partition(mu) for mu in mus) for mus in targets]
    if not targets:
        return []
    for mus in targets:
        _check_targets(mus, ctx.data.l)
    r_max = max(mus[0].size() for mus in targets)
    if r_max > ctx.r_max:
        raise PreconditionError(f"|μ_a| = {r_max} 超过 r_max = {ctx.r_max}")
    keys = [pad_key(mus, ctx.data.l) for mus in targets]
    bound = tuple(tuple(max(col) for col in zip(*rows)) for rows in zip(*keys))
    ctx = ctx.model_copy(update={"r_max": r_max})
    extraction = GvExtraction(gv_log(ctx, bound), ctx.data)
    return [extraction.extract(mus) for mus in targets]


def omega(g: int, n_total: int, m: int, lam: Partition) -> FracElement:
    """Ω_λ = Π_□ (−z^{2a} w^{2l})^{n−m} (z^{2a+1} − w^{2l+1})^{2g} / ((z^{2a+2} − w^{2l})(z^{2a} − w^{2l+2}))"""
    value = ZW.one
    for a, l in Partition(lam).arm_legs():
        sign = -1 if (n_total - m) % 2 else 1
        factor = power(ZW, ZW.nominal(2 * a, 2 * l), n_total - m) * sign
        factor = factor * (ZW.nominal(2 * a + 1, 0) - ZW.nominal(0, 2 * l + 1)) ** (2 * g)
        factor = factor / ((ZW.nominal(2 * a + 2, 0) - ZW.nominal(0, 2 * l))
                           * (ZW.nominal(2 * a, 0) - ZW.nominal(0, 2 * l + 2)))
        value = value * factor
    return value


def _htilde_block(lam: Partition, ell: int, r_max: int, swap: bool) -> XSeries:
    h = modified_macdonald(lam, ell, swap_args=swap).map_coefficients(st_to_zw_squares)
    return symfunc_into_xseries(h, ell, ZW, r_max)


def hmw_z(data: WildCurveData, r_max: int, bound: Optional[Key] = None, swap: bool = False) -> XSeries:
    """Z_HMW = 1 + Σ_λ Ω_λ^{g,n}(z,w) Π_a H̃_λ(x_a; z², w²)"""
    n_total = sum(data.n)
    out = XSeries.one(ZW, data.l, r_max, bound)
    for r in range(1, r_max + 1):
        for lam in partitions_of(r):
            blocks = [_htilde_block(lam, ell, r_max, swap) for ell in data.l]
            out = out + XSeries.tensor(blocks, r_max, bound).scale(omega(data.g, n_total, data.m, lam))
    logger.info(f"hmw_z: g={data.g}, n={n_total}, ℓ={data.l}, r_max={r_max}")
    return out


def _hmw_prefactor(k: int, r: int, d: int, n_total: int, m: int) -> FracElement:
    """(−1)^{(n−m)r} w^{kd} / ((1 − z^{2k})(w^{2k} − 1))"""
    sign = -1 if ((n_total - m) * r) % 2 else 1
    num = ZW.nominal(0, k * d) * sign
    den = ZW.one_minus(4 * k, 0) * (ZW.nominal(0, 2 * k) - ZW.one)
    return num / den


class HmwExtraction:
    """ln Z_HMW = Σ_k Σ_μ (1/k)(−1)^{(n−m)|μ|} w^{kd} ℍ(z^k, w^k)/((1−z^{2k})(w^{2k}−1)) Π m_{μ_a}(x_a^k)"""

    def __init__(self, log: XSeries, data: WildCurveData):
        self.data = data
        self.n_total = sum(data.n)
        self.engine = LayeredExtractor(log, data, self.kernel, self._solve)

    def _d(self, mus: Target) -> int:
        return dimension_d(mus, self.data.n, self.data.g)

    def kernel(self, k: int, mus: Target, h: FracElement) -> FracElement:
        r = mus[0].size()
        pre = _hmw_prefactor(k, r, self._d(mus), self.n_total, self.data.m)
        return pre * substitute_power(h, ZW, k) / k

    def _solve(self, mus: Target, residual: FracElement) -> FracElement:
        r = mus[0].size()
        return residual / _hmw_prefactor(1, r, self._d(mus), self.n_total, self.data.m)

    def extract(self, mus: Target) -> HmwPolynomial:
        mus = tuple(Partition(mu) for mu in mus)
        terms, failure = _to_nominal(self.engine.raw(mus), ZW)
        if failure:
            logger.warning(f"ℍ_{mus} 提取失败: {failure}")
        return HmwPolynomial(mu=mus, n_total=self.n_total, g=self.data.g, terms=terms, failure=failure)


def hmw_extract(data: WildCurveData, mus, swap: bool = False) -> HmwPolynomial:
    """从 HMW 配分函数中提取 ℍ_{μ,n}(z,w)"""
    mus = tuple(Partition(mu) for mu in mus)
    _check_targets(mus, data.l)
    r = mus[0].size()
    log = hmw_z(data, r, pad_key(mus, data.l), swap).log()
    return HmwExtraction(log, data).extract(mus)


def hmw_to_uv(h: HmwPolynomial) -> Dict[Tuple[int, int], Fraction]:
    """z = u^{1/2}, w = u^{-1/2} v^{-1}：z^a w^b ↦ u^{(a−b)/2} v^{-b}"""
    out: Dict[Tuple[int, int], Fraction] = {}
    for (a, b), c in h.terms.items():
        if (a - b) % 2:
            raise LatticeError(f"代换后出现 u 的半整数次幂: z^{a} w^{b}")
        key = ((a - b) // 2, -b)
        out[key] = out.get(key, Fraction(0)) + c
    return {k: v for k, v in out.items() if v}


def _is_column(mu: Partition) -> bool:
    return all(p == 1 for p in mu)


def compare_hmw(p: BpsPolynomial, h: HmwPolynomial) -> Tuple[str, List[Tuple[int, int, str, str]]]:
    """在 μ_a = (1^r) 时比较 P 与代换后的 ℍ；返回 equal/diff 与逐项差异"""
    if not all(_is_column(mu) for mu in p.mu) or tuple(p.mu) != tuple(h.mu):
        raise PreconditionError(f"比较要求 μ_a = (1^r) 且两侧目标相同: {p.mu} / {h.mu}")
    if p.failure or h.failure:
        return "diff", []
    substituted = hmw_to_uv(h)
    diff = []
    for key in sorted(set(p.terms) | set(substituted)):
        a = p.terms.get(key, Fraction(0))
        b = substituted.get(key, Fraction(0))
        if a != b:
            diff.append((key[0], key[1], str(a), str(b)))
    return ("equal" if not diff else "diff"), diff


def structural_checks(p: BpsPolynomial) -> List[CheckResult]:
    """双次数、对称性、整数性与常数项，逐项独立报告"""
    checks = []
    if p.failure:
        checks.append(CheckResult(name="polynomial", passed=False, detail=p.failure))
        return checks
    d = p.d
    bideg = p.bidegree()
    checks.append(CheckResult(name="bidegree", passed=bideg == (d, d),
                              detail=f"双次数 {bideg}，d = {d}"))
    broken = [(a, b) for (a, b), c in p.terms.items() if p.coefficient(d - a, d + b - 2 * a) != c]
    checks.append(CheckResult(name="palindromic", passed=not broken,
                              detail=f"coeff(a,b) = coeff(d−a, d+b−2a)，不符 {len(broken)} 项"))
    literal = [(a, b) for (a, b), c in p.terms.items() if p.coefficient(d - a, d - b) != c]
    checks.append(CheckResult(name="symmetric_literal", passed=not literal, informational=True,
                              detail=f"coeff(a,b) = coeff(d−a, d−b)，不符 {len(literal)} 项"))
    fractional = [k for k, c in p.terms.items() if c.denominator != 1]
    checks.append(CheckResult(name="integer", passed=not fractional,
                              detail=f"非整数系数 {len(fractional)} 项"))
    checks.append(CheckResult(name="constant_term", passed=p.coefficient(0, 0) == 1,
                              detail=f"常数项 {p.coefficient(0, 0)}"))
    negative = [k for k in p.terms if k[0] < 0 or k[1] < 0]
    checks.append(CheckResult(name="laurent", passed=not negative, informational=True,
                              detail=f"负指数 {len(negative)} 项"))
    return checks


def bidegree_audit() -> List[CheckResult]:
    """核对两处 (56,56) 双次数说法与维数公式"""
    col = Partition((1, 1, 1))
    cases = [
        ("g=2, deg D=7, μ=(1³,1³)", dimension_d([col, col], (3, 4), 2)),
        ("g=1, deg D=9, μ=(1³,1³,1³)", dimension_d([col, col, col], (3, 3, 3), 1)),
    ]
    return [CheckResult(name=f"bidegree_claim[{label}]", passed=d == 56, informational=True,
                        detail=f"维数公式给出 d = {d}，声称 56")
            for label, d in cases]


def r1_closed_form(g: int) -> Dict[Tuple[int, int], Fraction]:
    """r = 1 时 P = (1 − uv)^{2g}"""
    f = LaurentBivar(UV, {(0, 0): 1}) - LaurentBivar.monomial(UV, 2, 2)
    return (f ** (2 * g)).nominal_terms()


def _plant_polynomial(rng: random.Random, d: int) -> FracElement:
    terms = {}
    for _ in range(rng.randint(1, 4)):
        a, b = rng.randint(0, max(d, 0)), rng.randint(0, max(d, 0))
        terms[(2 * a, 2 * b)] = terms.get((2 * a, 2 * b), 0) + rng.randint(-5, 5)
    terms[(0, 0)] = 1
    return LaurentBivar(UV, terms).to_field()


def plant_family(data: WildCurveData, r_max: int, seed: int = 0) -> Dict[Target, FracElement]:
    """随机整系数多项式族 P̂_μ，|μ_a| ≤ r_max"""
    rng = random.Random(seed)
    planted = {}
    for r in range(1, r_max + 1):
        for mus in target_tuples(r, data.l):
            planted[mus] = _plant_polynomial(rng, dimension_d(mus, data.n, data.g))
    return planted


def gv_log_series(planted: Dict[Target, FracElement], data: WildCurveData, r_max: int,
                  bound: Optional[Key] = None) -> XSeries:
    """由多项式族按 GV 展开直接构造 ln Z"""
    extraction = GvExtraction(XSeries(QY, data.l, r_max), data)
    out = XSeries(QY, data.l, r_max, bound=bound)
    for mus, p in planted.items():
        r = mus[0].size()
        for k in range(1, r_max // r + 1):
            coef = extraction.kernel(k, mus, p)
            blocks = [monomial_into_xseries(mu, ell, k, QY, r_max) for mu, ell in zip(mus, data.l)]
            out = out + XSeries.tensor(blocks, r_max, bound).scale(coef)
    return out


def synthetic_round_trip(data: WildCurveData, r_max: int, seed: int = 0) -> bool:
    """植入 → 构造 ln Z → 经 exp/log → 提取，必须精确复原"""
    planted = plant_family(data, r_max, seed)
    log = gv_log_series(planted, data, r_max)
    if log.exp().log() != log:
        raise ConsistencyError("exp 与 log 不互逆")
    extraction = GvExtraction(log, data)
    for mus, p in planted.items():
        got = extraction.engine.raw(mus)
        if not equal(got, p):
            raise ConsistencyError(f"合成数据提取未复原: μ={mus}")
    return True


def round_trip_closure(ctx: RefinedContext) -> bool:
    """提取全部 P 后按 GV 展开重组并取 exp，必须回到 z_pt_refined"""
    z = z_pt_refined(ctx)
    extraction = GvExtraction(z.log(), ctx.data)
    planted = {mus: extraction.engine.raw(mus)
               for r in range(1, ctx.r_max + 1) for mus in target_tuples(r, ctx.data.l)}
    rebuilt = gv_log_series(planted, ctx.data, ctx.r_max).exp()
    if rebuilt != z:
        raise ConsistencyError(f"GV 展开重组后与 Z 不符: {ctx.data}")
    return True
