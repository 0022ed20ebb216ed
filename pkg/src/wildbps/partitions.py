"""Young 图组合与对称群特征标"""
import math
import re
from collections import Counter
from functools import lru_cache
from itertools import product
from typing import Iterable, Iterator, List, Optional, Tuple

from .errors import PartitionError


class Partition(tuple):
    """弱递减的正整数序列；空分拆也是合法值"""

    def __new__(cls, parts: Iterable[int] = ()):
        parts = [int(p) for p in parts]
        if any(p < 0 for p in parts):
            raise PartitionError(f"分拆的部分必须非负: {parts}")
        return super().__new__(cls, sorted((p for p in parts if p > 0), reverse=True))

    def __repr__(self):
        return f"Partition({list(self)})"

    def __str__(self):
        return self.text()

    def size(self) -> int:
        return sum(self)

    def length(self) -> int:
        return len(self)

    def conjugate(self) -> "Partition":
        if not self:
            return self
        return Partition(sum(1 for p in self if p > j) for j in range(self[0]))

    def boxes(self) -> Iterator[Tuple[int, int]]:
        """按行遍历格子 (i, j)，从 0 开始计数"""
        for i, row in enumerate(self):
            for j in range(row):
                yield i, j

    def arm(self, i: int, j: int) -> int:
        return self[i] - j - 1

    def leg(self, i: int, j: int) -> int:
        return self.conjugate()[j] - i - 1

    def hook(self, i: int, j: int) -> int:
        return self.arm(i, j) + self.leg(i, j) + 1

    def arm_legs(self) -> List[Tuple[int, int]]:
        """每个格子的 (arm, leg)"""
        conj = self.conjugate()
        return [(self[i] - j - 1, conj[j] - i - 1) for i, j in self.boxes()]

    def n_weight(self) -> int:
        """n(λ) = Σ (i-1) λ_i"""
        return sum(i * p for i, p in enumerate(self))

    def text(self) -> str:
        return "[" + ",".join(str(p) for p in self) + "]"

    def dominates(self, other: "Partition") -> bool:
        if self.size() != other.size():
            return False
        a = b = 0
        for i in range(max(len(self), len(other))):
            a += self[i] if i < len(self) else 0
            b += other[i] if i < len(other) else 0
            if a < b:
                return False
        return True

    def divide(self, k: int) -> Optional["Partition"]:
        """若所有部分被 k 整除，返回 λ/k"""
        if any(p % k for p in self):
            return None
        return Partition(p // k for p in self)

    def scale(self, k: int) -> "Partition":
        return Partition(p * k for p in self)

    @classmethod
    def parse(cls, text: str) -> "Partition":
        """解析 `[3,2,1]`、`3,2,1` 或 `[]`"""
        body = text.strip().strip("[]").strip()
        if not body:
            return cls()
        try:
            return cls(int(p) for p in body.split(","))
        except ValueError as e:
            raise PartitionError(f"无法解析分拆: {text!r}") from e


EMPTY = Partition()


def parse_tuple(text: str) -> Tuple[Partition, ...]:
    """解析 `[2,1],[2,1]` 形式的分拆元组"""
    groups = re.findall(r"\[[^\]]*\]", text)
    if not groups:
        raise PartitionError(f"无法解析分拆元组: {text!r}")
    return tuple(Partition.parse(g) for g in groups)


def format_tuple(mus: Iterable[Partition]) -> str:
    return ",".join(mu.text() for mu in mus)


@lru_cache(maxsize=None)
def _partitions(n: int, largest: int) -> Tuple[Partition, ...]:
    if n == 0:
        return (EMPTY,)
    out = []
    for first in range(min(n, largest), 0, -1):
        for rest in _partitions(n - first, first):
            out.append(Partition((first,) + tuple(rest)))
    return tuple(out)


def partitions_of(n: int) -> Tuple[Partition, ...]:
    """n 的全部分拆，反字典序"""
    if n < 0:
        raise PartitionError(f"n 必须非负: {n}")
    return _partitions(n, n)


def content(lam: Partition) -> int:
    """c(λ) = Σ (arm − leg) = Σ (j − i)"""
    return sum(j - i for i, j in lam.boxes())


def zeta(rho: Partition) -> int:
    """ζ(ρ) = Π k_j! j^{k_j}，即中心化子的阶"""
    out = 1
    for part, mult in Counter(rho).items():
        out *= math.factorial(mult) * part ** mult
    return out


def union(*parts: Partition) -> Partition:
    return Partition(p for rho in parts for p in rho)


@lru_cache(maxsize=None)
def _mn(nu: Tuple[int, ...], rho: Tuple[int, ...]) -> int:
    # Murnaghan-Nakayama：在 β 数上移除长度为 rho[0] 的边条
    if not rho:
        return 1 if not nu else 0
    r, rest = rho[0], rho[1:]
    length = len(nu)
    beta = [p + length - 1 - i for i, p in enumerate(nu)]
    beta_set = set(beta)
    total = 0
    for idx, b in enumerate(beta):
        target = b - r
        if target < 0 or target in beta_set:
            continue
        height = sum(1 for c in beta if target < c < b)
        new_beta = sorted(beta[:idx] + [target] + beta[idx + 1:], reverse=True)
        new_nu = tuple(
            p for p in (x - (length - 1 - i) for i, x in enumerate(new_beta)) if p > 0)
        total += (-1) ** height * _mn(new_nu, rest)
    return total


def character(nu: Partition, rho: Partition) -> int:
    """χ^ν(ρ)"""
    if nu.size() != rho.size():
        raise PartitionError(
            f"特征标要求 |ν| = |ρ|: {nu.text()} / {rho.text()}")
    return _mn(tuple(nu), tuple(rho))


def standard_tableaux(lam: Partition) -> int:
    """标准杨表个数，钩长公式"""
    hooks = 1
    for i, j in lam.boxes():
        hooks *= lam.hook(i, j)
    return math.factorial(lam.size()) // hooks


def splittings(lam: Partition, ell: int) -> List[Tuple[Partition, ...]]:
    """所有有序 ℓ 元组 (ρ_1..ρ_ℓ)（允许空），其多重并等于 λ"""
    if ell < 1:
        raise PartitionError(f"ℓ 必须为正: {ell}")
    per_value = []
    for value, mult in sorted(Counter(lam).items(), reverse=True):
        per_value.append([(value, c) for c in _compositions(mult, ell)])
    out = []
    for choice in product(*per_value):
        slots = [[] for _ in range(ell)]
        for value, comp in choice:
            for i, c in enumerate(comp):
                slots[i].extend([value] * c)
        out.append(tuple(Partition(s) for s in slots))
    return out


def _compositions(n: int, k: int) -> List[Tuple[int, ...]]:
    """n 拆成 k 个非负整数的有序和"""
    if k == 1:
        return [(n,)]
    return [(first,) + rest
            for first in range(n, -1, -1)
            for rest in _compositions(n - first, k - 1)]


def partition_tuples(sizes: Iterable[int]) -> Iterator[Tuple[Partition, ...]]:
    """各分量尺寸给定的分拆元组"""
    return product(*(partitions_of(s) for s in sizes))


def distributions(n: int, ell: int) -> Iterator[Tuple[Partition, ...]]:
    """Σ|ν_i| = n 的全部有序元组 (ν_1..ν_ℓ)"""
    for sizes in _compositions(n, ell):
        yield from partition_tuples(sizes)
