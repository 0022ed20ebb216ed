import pytest

from src.wildbps.errors import SeriesError
from src.wildbps.rings import QY, ZW, equal
from src.wildbps.xseries import XSeries, pad_key, single_group


def one_var(terms, r_max):
    """单组单变量级数 Σ c_j X^j"""
    return single_group(QY, 1, r_max, [((j,), c) for j, c in terms.items()])


# 测试截断乘法
def test_truncated_product():
    s = one_var({0: QY.one, 1: QY.one}, 1)
    square = s * s
    assert equal(square.coefficient(((0,),)), QY.one)
    assert equal(square.coefficient(((1,),)), QY.scalar(2))
    assert len(square) == 2


# 测试 exp 与 log 互逆
def test_exp_log():
    z = one_var({0: QY.one, 1: QY.nominal(1, 0), 2: QY.one / QY.one_minus(2, 2)}, 3)
    assert z.log().exp() == z
    log = z.log()
    assert equal(log.constant(), QY.zero)
    assert equal(log.coefficient(((1,),)), QY.nominal(1, 0))


# 测试 log(1 + X) 的系数
def test_log_coefficients():
    z = one_var({0: QY.one, 1: QY.one}, 3)
    log = z.log()
    assert equal(log.coefficient(((2,),)), QY.scalar(-1) / 2)
    assert equal(log.coefficient(((3,),)), QY.one / 3)


# 测试对常数项不为 1 的级数取对数
def test_log_requires_unit_constant():
    with pytest.raises(SeriesError):
        one_var({0: QY.scalar(2)}, 2).log()
    with pytest.raises(SeriesError):
        one_var({0: QY.one}, 2).exp()


# 测试不平衡的指数矩阵
def test_unbalanced_key():
    with pytest.raises(SeriesError):
        XSeries(QY, (1, 1), 2, {((1,), (2,)): QY.one})
    with pytest.raises(SeriesError):
        XSeries(QY, (2,), 2, {((1,),): QY.one})


# 测试超过 r_max 的项被丢弃
def test_truncation_drops_high_terms():
    s = XSeries(QY, (1,), 1, {((2,),): QY.one})
    assert not s


# 测试外积只保留各组次数相同的项
def test_tensor():
    a = single_group(QY, 2, 1, [((0, 0), QY.one), ((1, 0), QY.one), ((0, 1), QY.nominal(1, 0))])
    b = single_group(QY, 1, 1, [((0,), QY.one), ((1,), QY.nominal(0, 1))])
    t = XSeries.tensor([a, b], 1)
    assert t.shape == (2, 1)
    assert len(t) == 3
    assert equal(t.coefficient(((0, 1), (1,))), QY.nominal(1, 1))


# 测试逐项上界
def test_bound_restricts_terms():
    a = single_group(QY, 2, 2, [((2, 0), QY.one), ((1, 1), QY.one), ((0, 2), QY.one)])
    restricted = XSeries.tensor([a], 2, ((1, 1),))
    assert len(restricted) == 1
    assert equal(restricted.coefficient(((1, 1),)), QY.one)


# 测试不同形状或变量的级数不能相加
def test_shape_mismatch():
    with pytest.raises(SeriesError):
        XSeries.one(QY, (1,), 1) + XSeries.one(QY, (2,), 1)
    with pytest.raises(SeriesError):
        XSeries.one(QY, (1,), 1) + XSeries.one(ZW, (1,), 1)


# 测试代表单项式补零后的指数矩阵
def test_pad_key():
    assert pad_key([(2,), (1,)], (2, 3)) == ((2, 0), (1, 0, 0))
