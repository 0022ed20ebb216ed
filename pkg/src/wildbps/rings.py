"""精确系数算术：有理数、双变量 Laurent 多项式、有理函数与形式单位 ε

所有变量都在加倍格上表示：生成元是名义变量的平方根，
因此 q^{1/2} 是生成元 qh 的一次幂。
"""
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Any, Dict, Iterable, Mapping, Tuple

from sympy.polys.domains import QQ, ZZ
from sympy.polys.fields import FracElement, field
from sympy.polys.rings import ring

from .errors import (
    EpsilonMismatchError,
    InexactDivision,
    LatticeError,
    VariableMismatchError,
)

BigRational = Fraction
RationalBivar = FracElement
Exponent = Tuple[int, int]


class VariablePair:
    """一对名义变量及其平方根生成的有理函数域"""

    def __init__(self, first: str, second: str):
        self.names = (first, second)
        self.field, h1, h2 = field(f"{first}h,{second}h", ZZ)
        self.gens = (h1, h2)
        self.poly_ring = ring(f"{first}h,{second}h", QQ)[0]

    def __repr__(self):
        return f"VariablePair{self.names}"

    @property
    def one(self) -> FracElement:
        return self.field.one

    @property
    def zero(self) -> FracElement:
        return self.field.zero

    def monomial(self, e1: int, e2: int) -> FracElement:
        """加倍格指数 (e1, e2) 的单项式"""
        return self.gens[0] ** e1 * self.gens[1] ** e2

    def nominal(self, e1: int, e2: int) -> FracElement:
        """名义变量的整数次幂，例如 q^{e1} y^{e2}"""
        return self.monomial(2 * e1, 2 * e2)

    def one_minus(self, e1: int, e2: int) -> FracElement:
        """1 − 单项式（加倍格指数）"""
        return self.one - self.monomial(e1, e2)

    def scalar(self, value: Any) -> FracElement:
        if isinstance(value, FracElement):
            return value
        value = Fraction(value)
        return self.field(value.numerator) / value.denominator


@lru_cache(maxsize=None)
def pair(first: str, second: str) -> VariablePair:
    return VariablePair(first, second)


QY = pair("q", "y")
ST = pair("s", "t")
ZW = pair("z", "w")
UV = pair("u", "v")


def power(pair_: VariablePair, f: FracElement, n: int) -> FracElement:
    """f^n，负指数经除法保证规范形"""
    if n >= 0:
        return f ** n
    return pair_.one / f ** (-n)


def equal(f: FracElement, g: FracElement) -> bool:
    return not (f - g)


def _from_laurent_dict(target: VariablePair, terms: Mapping[Exponent, Any]) -> FracElement:
    terms = {k: v for k, v in terms.items() if v}
    if not terms:
        return target.zero
    s1 = min(k[0] for k in terms)
    s2 = min(k[1] for k in terms)
    lcm = math.lcm(*(Fraction(v).denominator for v in terms.values()))
    poly = target.field.ring.from_dict(
        {(a - s1, b - s2): int(Fraction(v) * lcm) for (a, b), v in terms.items()})
    return target.field.new(poly) * target.monomial(s1, s2) / lcm


def monomial_map(f: FracElement, source: VariablePair, target: VariablePair,
                 matrix: Tuple[Tuple[int, int], Tuple[int, int]]) -> FracElement:
    """单项式替换：加倍格指数 (a, b) ↦ matrix·(a, b)"""
    (m11, m12), (m21, m22) = matrix

    def image(poly) -> FracElement:
        terms: Dict[Exponent, int] = {}
        for (a, b), c in poly.items():
            key = (m11 * a + m12 * b, m21 * a + m22 * b)
            terms[key] = terms.get(key, 0) + int(c)
        return _from_laurent_dict(target, terms)

    if f.field != source.field:
        raise VariableMismatchError(f"{f.field} 不是 {source} 的域")
    return image(f.numer) / image(f.denom)


def substitute_power(f: FracElement, pair_: VariablePair, k: int) -> FracElement:
    """(q, y) ↦ (q^k, y^k)"""
    if k < 1:
        raise ValueError(f"k 必须为正: {k}")
    return monomial_map(f, pair_, pair_, ((k, 0), (0, k)))


def st_to_qy(f: FracElement) -> FracElement:
    """(s, t) ↦ (qy, q y^{-1})"""
    return monomial_map(f, ST, QY, ((1, 1), (1, -1)))


def st_to_zw_squares(f: FracElement) -> FracElement:
    """(s, t) ↦ (z², w²)"""
    return monomial_map(f, ST, ZW, ((2, 0), (0, 2)))


def invert_second(f: FracElement, pair_: VariablePair) -> FracElement:
    """第二个变量取倒数"""
    return monomial_map(f, pair_, pair_, ((1, 0), (0, -1)))


def swap(f: FracElement, pair_: VariablePair) -> FracElement:
    return monomial_map(f, pair_, pair_, ((0, 1), (1, 0)))


def second_to_one(f: FracElement, pair_: VariablePair) -> FracElement:
    """把第二个变量特殊化为 1，例如 y = 1"""
    f = pair_.field.field_new(f)
    num = _from_laurent_dict(pair_, _collapse(f.numer))
    den = _from_laurent_dict(pair_, _collapse(f.denom))
    if not den:
        raise ZeroDivisionError(f"特殊化后分母为零: {f}")
    return num / den


def _collapse(poly) -> Dict[Exponent, int]:
    out: Dict[Exponent, int] = {}
    for (a, _), c in poly.items():
        out[(a, 0)] = out.get((a, 0), 0) + int(c)
    return out


def on_integer_lattice(f: FracElement) -> bool:
    """分子分母的全部指数均为偶数"""
    return all(a % 2 == 0 and b % 2 == 0
               for poly in (f.numer, f.denom) for (a, b) in poly.keys())


def binomial_denominator(f: FracElement) -> bool:
    """分母的每个不可约因子都只依赖于一个单项式（1 − q^a y^b 型因子）"""
    _, factors = f.denom.factor_list()
    for factor, _ in factors:
        exps = list(factor.keys())
        if len(exps) <= 1:
            continue
        a0, b0 = exps[0]
        shifted = [(a - a0, b - b0) for a, b in exps]
        base = next(e for e in shifted if e != (0, 0))
        if any(a * base[1] - b * base[0] for a, b in shifted):
            return False
    return True


class LaurentBivar:
    """加倍格上的稀疏双变量 Laurent 多项式，系数为 BigRational"""

    __slots__ = ("pair", "terms")

    def __init__(self, pair_: VariablePair, terms: Mapping[Exponent, Any] | None = None):
        self.pair = pair_
        self.terms: Dict[Exponent, Fraction] = {
            (int(a), int(b)): Fraction(v) for (a, b), v in (terms or {}).items() if v}

    @classmethod
    def monomial(cls, pair_: VariablePair, e1: int, e2: int, coeff: Any = 1) -> "LaurentBivar":
        return cls(pair_, {(e1, e2): coeff})

    @classmethod
    def from_poly(cls, pair_: VariablePair, poly, shift: Exponent = (0, 0)) -> "LaurentBivar":
        return cls(pair_, {(a + shift[0], b + shift[1]): Fraction(int(c.numerator), int(c.denominator))
                           if hasattr(c, "denominator") else int(c)
                           for (a, b), c in poly.items()})

    @classmethod
    def from_field(cls, f: FracElement, pair_: VariablePair) -> "LaurentBivar":
        """有理函数必须恰为 Laurent 多项式，否则抛出 InexactDivision"""
        num = cls.from_poly(pair_, f.numer)
        den = cls.from_poly(pair_, f.denom)
        return num.exact_divide(den)

    def _check(self, other: "LaurentBivar"):
        if not isinstance(other, LaurentBivar) or other.pair.names != self.pair.names:
            raise VariableMismatchError(
                f"变量不一致: {self.pair.names} / {getattr(other, 'pair', None)}")

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if isinstance(other, LaurentBivar):
            return self.pair.names == other.pair.names and self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self.terms == ({(0, 0): Fraction(other)} if other else {})
        return NotImplemented

    def __hash__(self):
        return hash((self.pair.names, tuple(sorted(self.terms.items()))))

    def __neg__(self):
        return LaurentBivar(self.pair, {k: -v for k, v in self.terms.items()})

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = LaurentBivar.monomial(self.pair, 0, 0, other)
        self._check(other)
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0) + v
        return LaurentBivar(self.pair, out)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return LaurentBivar(self.pair, {k: v * other for k, v in self.terms.items()})
        self._check(other)
        out: Dict[Exponent, Fraction] = {}
        for (a1, b1), c1 in self.terms.items():
            for (a2, b2), c2 in other.terms.items():
                key = (a1 + a2, b1 + b2)
                out[key] = out.get(key, 0) + c1 * c2
        return LaurentBivar(self.pair, out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("LaurentBivar 只支持非负整数次幂")
        out = LaurentBivar.monomial(self.pair, 0, 0)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def substitute_power(self, k: int) -> "LaurentBivar":
        if k < 1:
            raise ValueError(f"k 必须为正: {k}")
        return LaurentBivar(self.pair, {(a * k, b * k): v for (a, b), v in self.terms.items()})

    def _shifted(self) -> Tuple[Any, Exponent]:
        s1 = min(a for a, _ in self.terms)
        s2 = min(b for _, b in self.terms)
        poly = self.pair.poly_ring.from_dict(
            {(a - s1, b - s2): QQ(v.numerator, v.denominator) for (a, b), v in self.terms.items()})
        return poly, (s1, s2)

    def exact_divide(self, den: "LaurentBivar") -> "LaurentBivar":
        """格上精确除法；不整除时抛出 InexactDivision"""
        self._check(den)
        if not den:
            raise ZeroDivisionError("除数为零")
        if not self:
            return LaurentBivar(self.pair)
        num_poly, (n1, n2) = self._shifted()
        den_poly, (d1, d2) = den._shifted()
        quotient, remainder = num_poly.div(den_poly)
        if remainder:
            raise InexactDivision(f"({self}) / ({den}) 不整除")
        return LaurentBivar.from_poly(self.pair, quotient, (n1 - d1, n2 - d2))

    def to_field(self) -> FracElement:
        return _from_laurent_dict(self.pair, self.terms)

    def nominal_terms(self) -> Dict[Exponent, Fraction]:
        """名义变量的整数指数；遇到半整数指数抛出 LatticeError"""
        out = {}
        for (a, b), v in self.terms.items():
            if a % 2 or b % 2:
                raise LatticeError(f"半整数指数 ({a}/2, {b}/2) in {self}")
            out[(a // 2, b // 2)] = v
        return out

    def items(self) -> Iterable[Tuple[Exponent, Fraction]]:
        return sorted(self.terms.items())

    def __repr__(self):
        return f"LaurentBivar({self.pair.names}, {self})"

    def __str__(self):
        if not self.terms:
            return "0"
        out = []
        for (a, b), c in self.items():
            factors = [f for f in (_power_text(self.pair.names[0], a),
                                   _power_text(self.pair.names[1], b)) if f]
            sign = "-" if c < 0 else "+"
            mag = abs(c)
            if not factors:
                body = str(mag)
            elif mag == 1:
                body = "*".join(factors)
            else:
                body = "*".join([str(mag)] + factors)
            out.append((sign, body))
        first_sign, first_body = out[0]
        text = ("-" if first_sign == "-" else "") + first_body
        for sign, body in out[1:]:
            text += f" {sign} {body}"
        return text


def _power_text(name: str, doubled: int) -> str:
    if doubled == 0:
        return ""
    if doubled % 2 == 0:
        e = doubled // 2
        if e == 1:
            return name
        return f"{name}^{e}" if e > 0 else f"{name}^({e})"
    return f"{name}^({doubled}/2)"


def render(f: FracElement, pair_: VariablePair) -> str:
    """有理函数的规范文本"""
    num = LaurentBivar.from_poly(pair_, f.numer)
    den = LaurentBivar.from_poly(pair_, f.denom)
    if den == 1:
        return str(num)
    return f"({num})/({den})"


def parse_rational(text: str, pair_: VariablePair) -> FracElement:
    """读回 str(FracElement) 的输出"""
    from sympy import sympify
    symbols = {s.name: s for s in pair_.field.symbols}
    return pair_.field.from_expr(sympify(text, locals=symbols))


@dataclass(frozen=True)
class EpsilonTracked:
    """value · ε^eps，ε 代表形式可逆单位 (ik𝗎)"""
    value: Any
    eps: int

    def __bool__(self):
        return bool(self.value)

    def __add__(self, other: "EpsilonTracked") -> "EpsilonTracked":
        if not other.value:
            return self
        if not self.value:
            return other
        if self.eps != other.eps:
            raise EpsilonMismatchError(f"ε 指数不同: {self.eps} / {other.eps}")
        return EpsilonTracked(self.value + other.value, self.eps)

    def __neg__(self):
        return EpsilonTracked(-self.value, self.eps)

    def __sub__(self, other: "EpsilonTracked") -> "EpsilonTracked":
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, EpsilonTracked):
            return EpsilonTracked(self.value * other.value, self.eps + other.eps)
        return EpsilonTracked(self.value * other, self.eps)

    __rmul__ = __mul__

    def shift(self, n: int) -> "EpsilonTracked":
        """乘以 ε^n"""
        return EpsilonTracked(self.value, self.eps + n)

    def __pow__(self, n: int) -> "EpsilonTracked":
        """整数次幂；负指数要求 value 可逆"""
        if n >= 0:
            return EpsilonTracked(self.value ** n, self.eps * n)
        if not self.value:
            raise ZeroDivisionError("ε 追踪值为零，不能取负次幂")
        return EpsilonTracked(1 / self.value ** (-n), self.eps * n)
