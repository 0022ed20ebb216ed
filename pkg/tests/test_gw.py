import pytest
from fractions import Fraction

from pydantic import ValidationError

from src.wildbps.errors import PartitionError, PreconditionError
from src.wildbps.gw import (
    WildCurveData,
    assemble_z_r,
    cap_v_basis_check,
    central_normalization_check,
    hurwitz_brute_force,
    hurwitz_count,
    hurwitz_double,
    relative_cap,
    rubber_series,
    rubber_taylor_check,
    simple_and_cap,
    tqft_central,
    tqft_operator_central,
    wild_factor_F,
    wildcap_W,
    wildcap_check,
    z_gw,
)
from src.wildbps.partitions import Partition, partitions_of
from src.wildbps.rings import QY, equal, power
from src.wildbps.symfunc import principal_schur


def P(*parts):
    return Partition(parts)


S1 = principal_schur(P(1))


class TestWildCurveData:
    def test_properties(self):
        """m、k 与 deg D"""
        data = WildCurveData(g=1, n=(3, 3), l=(2, 1))
        assert data.m == 2
        assert data.equal_n
        assert data.k == 2
        assert data.deg_d == 6

    def test_unequal_n_has_no_k(self):
        """n_a 不相等时没有统一的 k"""
        data = WildCurveData(g=0, n=(3, 4), l=(1, 1))
        assert not data.equal_n
        with pytest.raises(PreconditionError):
            data.k

    def test_validation(self):
        """长度不一致或非正的 n_a、ℓ_a"""
        with pytest.raises(ValidationError):
            WildCurveData(g=0, n=(2, 2), l=(1,))
        with pytest.raises(ValidationError):
            WildCurveData(g=0, n=(0,), l=(1,))
        with pytest.raises(ValidationError):
            WildCurveData(g=-1, n=(2,), l=(1,))


class TestWildFactor:
    def test_single_variable(self):
        """ℓ = 1 时 F = x^{|λ|} s_{λ^t}(q̲)"""
        for r in range(1, 4):
            for lam in partitions_of(r):
                f = wild_factor_F(2, 1, lam)
                assert len(f) == 1
                assert equal(f.coefficient(((r,),)), principal_schur(lam.conjugate()))

    def test_one_box_two_variables(self):
        """λ = (1)，ℓ = 2：F = (x_1 + x_2) s_1(q̲)"""
        f = wild_factor_F(1, 2, P(1))
        assert equal(f.coefficient(((1, 0),)), S1)
        assert equal(f.coefficient(((0, 1),)), S1)

    def test_two_boxes_two_variables(self):
        """λ = (2)，k = 1，ℓ = 2 与直接的 Schur 乘积展开一致"""
        f = wild_factor_F(1, 2, P(2))
        pre = QY.nominal(-1, 0)
        assert equal(f.coefficient(((2, 0),)), pre * QY.nominal(1, 0) * principal_schur(P(1, 1)))
        assert equal(f.coefficient(((1, 1),)), pre * S1 * S1)


class TestPartitionFunction:
    def test_constant_term(self):
        """常数项为 1"""
        z = z_gw(WildCurveData(g=0, n=(2, 2), l=(1, 1)), 2)
        assert equal(z.constant(), QY.one)

    @pytest.mark.parametrize("g", [0, 1, 2])
    def test_degree_one_stratum(self, g):
        """r = 1 层：s_1(q̲)^{2−2g} Π_a (Σ_i x_{a,i})"""
        z = z_gw(WildCurveData(g=g, n=(3, 3), l=(2, 1)), 1)
        expected = power(QY, S1, 2 - 2 * g)
        assert equal(z.coefficient(((1, 0), (1,))), expected)
        assert equal(z.coefficient(((0, 1), (1,))), expected)

    def test_requires_equal_n(self):
        """n_a 不相等时应改用精细化管线"""
        with pytest.raises(PreconditionError):
            z_gw(WildCurveData(g=1, n=(3, 4), l=(1, 1)), 1)

    def test_threads_do_not_change_result(self):
        """按 λ 并行不影响结果"""
        data = WildCurveData(g=1, n=(2, 2), l=(2, 1))
        assert z_gw(data, 2, threads=3) == z_gw(data, 2)


class TestHurwitz:
    def test_double_covers(self):
        """h = 0，ρ = μ = (2)：1/2"""
        assert hurwitz_double(0, P(2), P(2)) == Fraction(1, 2)

    def test_identity_factorizations(self):
        """ρ = μ = (1,1)：n = 0 给出 1/2，n = 1 给出 0"""
        assert hurwitz_count(0, P(1, 1), P(1, 1)) == Fraction(1, 2)
        assert hurwitz_count(1, P(1, 1), P(1, 1)) == 0

    def test_brute_force(self):
        """特征标公式与对称群枚举一致"""
        for d in range(1, 4):
            for n in range(0, 4):
                for rho in partitions_of(d):
                    for mu in partitions_of(d):
                        assert hurwitz_count(n, rho, mu) == hurwitz_brute_force(n, rho, mu)

    def test_size_mismatch(self):
        """尺寸不同"""
        with pytest.raises(PartitionError):
            hurwitz_count(0, P(2), P(1))


class TestRubberAndCaps:
    def test_rubber_single_box(self):
        """ρ = λ = (1)：0"""
        assert not rubber_series(P(1), P(1), 2)

    def test_rubber_two_boxes(self):
        """ρ = λ = (2)，k = 1：ε^{-2}(q + q^{-1} − 2)/4"""
        r = rubber_series(P(2), P(2), 1)
        assert r.eps == -2
        expected = (QY.nominal(1, 0) + QY.nominal(-1, 0) - 2) / 4
        assert equal(r.value, expected)

    def test_rubber_size_mismatch(self):
        """尺寸不同"""
        with pytest.raises(PartitionError):
            rubber_series(P(2), P(1), 1)

    def test_rubber_taylor(self):
        """q = e^L 展开与 Hurwitz 数逐阶一致"""
        assert rubber_taylor_check(P(2), P(1, 1), 1, 3)
        assert rubber_taylor_check(P(2, 1), P(3), 2, 2)

    def test_cap_one_box(self):
        """μ = (1)：Z = ε^{-1} q^{1/2}/(1−q)"""
        _, z = simple_and_cap(P(1), 1)
        assert z.eps == -1
        assert equal(z.value, S1)

    def test_cap_independent_of_k(self):
        """相对帽与 k 无关"""
        _, z1 = simple_and_cap(P(2), 1)
        _, z3 = simple_and_cap(P(2), 3)
        assert z1.eps == z3.eps
        assert equal(z1.value, z3.value)

    def test_cap_convolution(self):
        """卷积重现闭式"""
        s, z = simple_and_cap(P(2, 1), 2, check=True)
        assert z == relative_cap(P(2, 1))
        assert s.eps == -2


class TestWildCap:
    def test_one_box(self):
        """λ = (1)，ℓ = 2：W = ε^{-1}(x_1 + x_2) s_1(q̲)"""
        w = wildcap_W(1, 2, P(1))
        assert w.eps == -1
        assert equal(w.value.coefficient(((1, 0),)), S1)
        assert equal(w.value.coefficient(((0, 1),)), S1)

    def test_routes_agree(self):
        """闭式与卷积两条路径一致"""
        for k in (1, 2):
            for lam in partitions_of(3):
                assert wildcap_check(k, 2, lam)

    def test_k_dependence_for_two_variables(self):
        """ℓ ≥ 2 时野帽依赖 k"""
        w1 = wildcap_W(1, 2, P(2))
        w2 = wildcap_W(2, 2, P(2))
        assert w1.value != w2.value

    def test_unknown_route(self):
        """未知的 route"""
        with pytest.raises(PreconditionError):
            wildcap_W(1, 1, P(1), route="direct")


class TestTqft:
    def test_off_diagonal(self):
        """λ_1 ≠ λ_2 时为零"""
        assert not tqft_central(1, 2, 2, [P(2), P(1, 1)])

    def test_genus_one(self):
        """g = 1：ε^{-md} s_{λ^t}(q̲)^{-m}"""
        lam = P(2, 1)
        value = tqft_central(1, 3, 3, [lam] * 3)
        assert value.eps == -9
        assert equal(value.value, power(QY, principal_schur(lam.conjugate()), -3))

    def test_degree_one(self):
        """d = 1：ε^{-(2g−2+m)} s_1(q̲)^{-(2g−2+m)}"""
        value = tqft_central(2, 1, 1, [P(1)])
        assert value.eps == -3
        assert equal(value.value, power(QY, S1, -3))

    def test_size_mismatch(self):
        """λ_a 的尺寸不是 d"""
        with pytest.raises(PartitionError):
            tqft_central(0, 1, 2, [P(1)])

    @pytest.mark.parametrize("g, m", [(0, 1), (0, 2), (1, 1), (1, 2), (2, 2)])
    def test_normalization(self, g, m):
        """算子组装与闭式中心系数只差配对归一化，包括 2g−2+m < 0"""
        assert central_normalization_check(g, m, 2)

    def test_inverse_annulus(self):
        """g = 0，m = 1：柱面算子取 −1 次幂"""
        value = tqft_operator_central(0, 1, 1, [P(1)])
        assert value.eps == -1
        assert equal(value.value, S1)

    def test_cap_in_v_basis(self):
        """(0,−1) 帽在 v 基下的系数"""
        assert cap_v_basis_check(3)

    @pytest.mark.parametrize("g, n, l, r", [
        (0, (2, 2), (1, 1), 1),
        (0, (2, 2), (1, 1), 2),
        (2, (3, 3), (1, 2), 2),
        (0, (2,), (2,), 1),
        (0, (3,), (1,), 2),
    ])
    def test_assembly_matches_z_gw(self, g, n, l, r):
        """TQFT 组装与 z_gw 的同层一致"""
        data = WildCurveData(g=g, n=n, l=l)
        assert assemble_z_r(data, r) == z_gw(data, r).stratum(r)
