"""标记点变量 x_{a,i} 上的截断形式级数

只存储平衡的指数矩阵：每组的次数之和都等于同一个 r ≤ r_max。
"""
from fractions import Fraction
from itertools import product
from math import factorial
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from sympy.polys.fields import FracElement

from .errors import SeriesError
from .rings import VariablePair, equal

Key = Tuple[Tuple[int, ...], ...]


def key_degree(key: Key) -> int:
    return sum(key[0]) if key else 0


def _below(key: Key, bound: Key) -> bool:
    return all(e <= b for row, brow in zip(key, bound) for e, b in zip(row, brow))


class XSeries:
    """m 组变量、第 a 组 ℓ_a 个变量的截断级数，系数为有理函数"""

    def __init__(self, pair_: VariablePair, shape: Sequence[int], r_max: int,
                 terms: Optional[Dict[Key, FracElement]] = None, bound: Optional[Key] = None):
        self.pair = pair_
        self.shape = tuple(shape)
        self.r_max = r_max
        self.bound = bound
        self.terms: Dict[Key, FracElement] = {}
        for key, value in (terms or {}).items():
            self._store(key, value)

    def _validate(self, key: Key) -> int:
        if len(key) != len(self.shape) or any(len(row) != n for row, n in zip(key, self.shape)):
            raise SeriesError(f"指数矩阵 {key} 与形状 {self.shape} 不符")
        degrees = {sum(row) for row in key}
        if len(degrees) > 1:
            raise SeriesError(f"指数矩阵 {key} 不平衡")
        return degrees.pop() if degrees else 0

    def _store(self, key: Key, value: FracElement):
        r = self._validate(key)
        if r > self.r_max or (self.bound is not None and not _below(key, self.bound)):
            return
        if value:
            self.terms[key] = value
        else:
            self.terms.pop(key, None)

    def _like(self, terms: Optional[Dict[Key, FracElement]] = None) -> "XSeries":
        out = XSeries(self.pair, self.shape, self.r_max, bound=self.bound)
        if terms:
            out.terms = {k: v for k, v in terms.items() if v}
        return out

    @property
    def zero_key(self) -> Key:
        return tuple((0,) * n for n in self.shape)

    @classmethod
    def one(cls, pair_: VariablePair, shape: Sequence[int], r_max: int,
            bound: Optional[Key] = None) -> "XSeries":
        out = cls(pair_, shape, r_max, bound=bound)
        out.terms[out.zero_key] = pair_.one
        return out

    def __bool__(self):
        return bool(self.terms)

    def __len__(self):
        return len(self.terms)

    def coefficient(self, key: Key) -> FracElement:
        return self.terms.get(tuple(tuple(row) for row in key), self.pair.zero)

    def constant(self) -> FracElement:
        return self.coefficient(self.zero_key)

    def items(self) -> List[Tuple[Key, FracElement]]:
        return sorted(self.terms.items(), key=lambda kv: (key_degree(kv[0]), kv[0]))

    def stratum(self, r: int) -> "XSeries":
        return self._like({k: v for k, v in self.terms.items() if key_degree(k) == r})

    def map_coefficients(self, fn: Callable[[FracElement], FracElement]) -> "XSeries":
        return self._like({k: fn(v) for k, v in self.terms.items()})

    def _check(self, other: "XSeries"):
        if not isinstance(other, XSeries) or other.shape != self.shape \
                or other.pair.names != self.pair.names:
            raise SeriesError("级数形状或变量不一致")

    def __add__(self, other: "XSeries") -> "XSeries":
        self._check(other)
        out = self._like(self.terms)
        for k, v in other.terms.items():
            out._store(k, out.terms.get(k, self.pair.zero) + v)
        return out

    def __neg__(self):
        return self._like({k: -v for k, v in self.terms.items()})

    def __sub__(self, other: "XSeries") -> "XSeries":
        return self + (-other)

    def scale(self, c) -> "XSeries":
        c = self.pair.scalar(c)
        return self._like({k: v * c for k, v in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, XSeries):
            return self.scale(other)
        self._check(other)
        out = self._like()
        for k1, v1 in self.terms.items():
            r1 = key_degree(k1)
            for k2, v2 in other.terms.items():
                if r1 + key_degree(k2) > self.r_max:
                    continue
                key = tuple(tuple(a + b for a, b in zip(row1, row2))
                            for row1, row2 in zip(k1, k2))
                if self.bound is not None and not _below(key, self.bound):
                    continue
                out.terms[key] = out.terms.get(key, self.pair.zero) + v1 * v2
        out.terms = {k: v for k, v in out.terms.items() if v}
        return out

    def __rmul__(self, other):
        return self.scale(other)

    def __eq__(self, other):
        if not isinstance(other, XSeries):
            return NotImplemented
        diff = self - other
        return not diff.terms

    def log(self) -> "XSeries":
        """ln(1 + S) = Σ (−1)^{j+1} S^j / j，截断到 r_max"""
        c = self.constant()
        if not equal(c, self.pair.one):
            raise SeriesError(f"常数项不为 1，无法取对数: {c}")
        s = self - XSeries.one(self.pair, self.shape, self.r_max, self.bound)
        out = self._like()
        term = s
        for j in range(1, self.r_max + 1):
            if not term:
                break
            out = out + term.scale(Fraction((-1) ** (j + 1), j))
            term = term * s
        return out

    def exp(self) -> "XSeries":
        if self.constant():
            raise SeriesError("exp 要求常数项为 0")
        out = XSeries.one(self.pair, self.shape, self.r_max, self.bound)
        term = out
        for j in range(1, self.r_max + 1):
            term = term * self
            if not term:
                break
            out = out + term.scale(Fraction(1, factorial(j)))
        return out

    @staticmethod
    def tensor(blocks: Sequence["XSeries"], r_max: int,
               bound: Optional[Key] = None) -> "XSeries":
        """单组级数的外积，只保留各组次数相同的项"""
        pair_ = blocks[0].pair
        shape = tuple(b.shape[0] for b in blocks)
        out = XSeries(pair_, shape, r_max, bound=bound)
        by_degree = []
        for b in blocks:
            if len(b.shape) != 1:
                raise SeriesError("tensor 只接受单组级数")
            grouped: Dict[int, List[Tuple[Key, FracElement]]] = {}
            for k, v in b.terms.items():
                grouped.setdefault(key_degree(k), []).append((k, v))
            by_degree.append(grouped)
        common = set.intersection(*(set(g) for g in by_degree)) if by_degree else set()
        for r in sorted(common):
            if r > r_max:
                continue
            for combo in product(*(g[r] for g in by_degree)):
                key = tuple(k[0] for k, _ in combo)
                if bound is not None and not _below(key, bound):
                    continue
                value = pair_.one
                for _, v in combo:
                    value = value * v
                out.terms[key] = out.terms.get(key, pair_.zero) + value
        out.terms = {k: v for k, v in out.terms.items() if v}
        return out


def single_group(pair_: VariablePair, n_vars: int, r_max: int,
                 terms: Iterable[Tuple[Tuple[int, ...], FracElement]]) -> XSeries:
    out = XSeries(pair_, (n_vars,), r_max)
    for exps, value in terms:
        key = (tuple(exps),)
        out._store(key, out.terms.get(key, pair_.zero) + value)
    return out


def pad_key(mus, shape: Sequence[int]) -> Key:
    return tuple(tuple(mu) + (0,) * (n - len(mu)) for mu, n in zip(mus, shape))
