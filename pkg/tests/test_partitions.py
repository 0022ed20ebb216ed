import pytest

from src.wildbps.errors import PartitionError
from src.wildbps.partitions import (
    Partition,
    character,
    content,
    distributions,
    parse_tuple,
    partitions_of,
    splittings,
    standard_tableaux,
    union,
    zeta,
)


def P(*parts):
    return Partition(parts)


# 测试分拆枚举的顺序与个数
def test_partitions_of():
    assert partitions_of(3) == (P(3), P(2, 1), P(1, 1, 1))
    assert len(partitions_of(6)) == 11
    assert partitions_of(0) == (P(),)


def test_partitions_of_negative():
    with pytest.raises(PartitionError):
        partitions_of(-1)


# 测试分拆的规范化
def test_partition_normalizes():
    assert P(1, 3, 0, 2) == P(3, 2, 1)
    assert P(1, 3, 0, 2).text() == "[3,2,1]"
    with pytest.raises(PartitionError):
        P(2, -1)


# 测试共轭与钩长
def test_conjugate_and_hooks():
    lam = P(4, 2, 1)
    assert lam.conjugate() == P(3, 2, 1, 1)
    assert lam.conjugate().conjugate() == lam
    assert lam.hook(0, 0) == 6
    assert lam.arm(0, 1) == 2
    assert lam.leg(0, 1) == 1
    assert P().conjugate() == P()


# 测试 content
def test_content():
    assert content(P(2, 1)) == 0
    assert content(P(2)) == 1
    assert content(P(1, 1)) == -1
    assert content(P(4, 2, 1)) == 3


# 测试中心化子阶数
def test_zeta():
    assert zeta(P(1, 1)) == 2
    assert zeta(P(2, 1, 1)) == 4
    assert zeta(P(3, 3, 2)) == 36
    assert zeta(P()) == 1


# 测试特征标
def test_characters():
    assert character(P(2), P(1, 1)) == 1
    assert character(P(1, 1), P(2)) == -1
    assert character(P(2, 1), P(1, 1, 1)) == 2
    assert character(P(2, 1), P(3)) == -1


def test_character_size_mismatch():
    with pytest.raises(PartitionError):
        character(P(2), P(1, 1, 1))


# 测试列正交关系 Σ_ν χ^ν(ρ)² = ζ(ρ)
def test_character_orthogonality():
    for rho in partitions_of(5):
        total = sum(character(nu, rho) ** 2 for nu in partitions_of(5))
        assert total == zeta(rho)


# 测试 χ^ν(1^n) 等于标准杨表数
def test_character_dimension():
    for nu in partitions_of(5):
        assert character(nu, P(1, 1, 1, 1, 1)) == standard_tableaux(nu)


# 测试多重并
def test_union():
    assert union(P(2, 1), P(3)) == P(3, 2, 1)
    assert union(P(), P(1)) == P(1)


# 测试把 λ 拆成有序元组
def test_splittings():
    parts = splittings(P(2, 1), 2)
    assert len(parts) == 4
    for rhos in parts:
        assert union(*rhos) == P(2, 1)
    assert (P(2), P(1)) in parts
    assert (P(), P(2, 1)) in parts


# 测试尺寸之和为 n 的元组
def test_distributions():
    items = list(distributions(2, 2))
    assert (P(2), P()) in items
    assert (P(1), P(1)) in items
    assert (P(), P(1, 1)) in items
    assert len(items) == 5
    assert all(sum(nu.size() for nu in t) == 2 for t in items)


# 测试分拆元组的解析
def test_parse_tuple():
    assert parse_tuple("[2,1],[1,1,1]") == (P(2, 1), P(1, 1, 1))
    assert Partition.parse("[]") == P()
    with pytest.raises(PartitionError):
        parse_tuple("2,1")
    with pytest.raises(PartitionError):
        Partition.parse("[a]")


# 测试优势序与整除
def test_dominates_and_divide():
    assert P(3).dominates(P(2, 1))
    assert not P(2, 1).dominates(P(3))
    assert P(4, 2).divide(2) == P(2, 1)
    assert P(3, 2).divide(2) is None
    assert P(2, 1).scale(3) == P(6, 3)
