import pytest
from fractions import Fraction

from src.wildbps.bps import (
    BpsPolynomial,
    HmwPolynomial,
    bidegree_audit,
    compare_hmw,
    dimension_d,
    gv_extract,
    gv_extract_many,
    hmw_extract,
    hmw_to_uv,
    omega,
    r1_closed_form,
    round_trip_closure,
    structural_checks,
    synthetic_round_trip,
    target_tuples,
)
from src.wildbps.errors import LatticeError, PartitionError, PreconditionError
from src.wildbps.gw import WildCurveData
from src.wildbps.partitions import Partition
from src.wildbps.refined import RefinedContext
from src.wildbps.rings import ZW, equal


def P(*parts):
    return Partition(parts)


def by_name(checks):
    return {c.name: c for c in checks}


def assert_clean(p: BpsPolynomial):
    checks = by_name(structural_checks(p))
    for key in ("polynomial", "bidegree", "palindromic", "integer", "constant_term", "laurent"):
        if key in checks:
            assert checks[key].passed, checks[key].detail
    assert p.failure is None


def extract_golden(golden: BpsPolynomial) -> BpsPolynomial:
    data = WildCurveData(g=golden.g, n=golden.n, l=tuple(mu.length() for mu in golden.mu))
    return gv_extract(RefinedContext(data=data, r_max=golden.mu[0].size()), golden.mu)


class TestDimension:
    def test_examples(self):
        """三个 golden 例子的维数"""
        assert dimension_d([P(2, 1), P(2, 1)], (3, 4), 1) == 30
        assert dimension_d([P(2, 1), P(1, 1, 1)], (3, 4), 1) == 38
        assert dimension_d([P(2, 2), P(2, 2)], (3, 4), 1) == 58

    def test_single_box(self):
        """r = 1 时 d = 2g"""
        for g in range(4):
            assert dimension_d([P(1), P(1)], (2, 5), g) == 2 * g

    def test_size_mismatch(self):
        """|μ_a| 不相等或元组长度不符"""
        with pytest.raises(PartitionError):
            dimension_d([P(2), P(1)], (3, 4), 1)
        with pytest.raises(PartitionError):
            dimension_d([P(2)], (3, 4), 1)


class TestTargets:
    def test_target_tuples(self):
        """l(μ_a) ≤ ℓ_a 的全部目标"""
        targets = target_tuples(2, (1, 2))
        assert targets == [(P(2), P(2)), (P(2), P(1, 1))]

    def test_too_long_partition(self):
        """l(μ_a) > ℓ_a"""
        data = WildCurveData(g=0, n=(2, 3), l=(1, 1))
        with pytest.raises(PreconditionError):
            gv_extract(RefinedContext(data=data, r_max=2), (P(1, 1), P(2)))

    def test_beyond_r_max(self):
        """|μ_a| 超过 r_max"""
        data = WildCurveData(g=0, n=(2, 3), l=(1, 1))
        with pytest.raises(PreconditionError):
            gv_extract(RefinedContext(data=data, r_max=1), (P(2), P(2)))


class TestGvExtraction:
    @pytest.mark.parametrize("g", [0, 1, 2])
    def test_single_box_closed_form(self, g):
        """r = 1：P = (1 − uv)^{2g}"""
        data = WildCurveData(g=g, n=(2, 3), l=(1, 1))
        p = gv_extract(RefinedContext(data=data, r_max=1), (P(1), P(1)))
        assert p.failure is None
        assert p.terms == r1_closed_form(g)
        assert p.bidegree() == (2 * g, 2 * g)

    def test_r1_closed_form(self):
        """(1 − uv)² 的系数"""
        assert r1_closed_form(1) == {(0, 0): 1, (1, 1): -2, (2, 2): 1}
        assert r1_closed_form(0) == {(0, 0): 1}

    def test_many_targets_share_log(self):
        """共用一次 ln Z 与逐个提取结果相同"""
        data = WildCurveData(g=1, n=(2, 3), l=(2, 1))
        ctx = RefinedContext(data=data, r_max=2)
        targets = [(P(2), P(2)), (P(1, 1), P(2))]
        many = gv_extract_many(ctx, targets)
        for mus, p in zip(targets, many):
            assert p.terms == gv_extract(ctx, mus).terms
        assert gv_extract_many(ctx, []) == []

    def test_structural_checks_small(self):
        """r = 2 时检验全部通过"""
        data = WildCurveData(g=1, n=(2, 3), l=(2, 1))
        p = gv_extract(RefinedContext(data=data, r_max=2), (P(1, 1), P(2)))
        checks = by_name(structural_checks(p))
        for name in ("bidegree", "palindromic", "integer", "constant_term"):
            assert checks[name].passed, checks[name].detail

    def test_synthetic_round_trip(self):
        """植入的多项式族经 exp/log 后被精确复原"""
        assert synthetic_round_trip(WildCurveData(g=0, n=(2, 3), l=(1, 2)), 2, seed=3)

    def test_round_trip_closure(self):
        """提取结果按 GV 展开重组后回到 Z"""
        ctx = RefinedContext(data=WildCurveData(g=1, n=(2, 3), l=(1, 1)), r_max=2)
        assert round_trip_closure(ctx)


class TestStructuralChecks:
    def test_failure_reported(self):
        """提取失败时只报告 polynomial"""
        p = BpsPolynomial(mu=(P(1),), n=(2,), g=0, d=0, failure="不是 Laurent 多项式")
        checks = structural_checks(p)
        assert [c.name for c in checks] == ["polynomial"]
        assert not checks[0].passed

    def test_broken_symmetry(self):
        """破坏对称性与常数项"""
        p = BpsPolynomial(mu=(P(1), P(1)), n=(2, 3), g=1, d=2,
                          terms={(0, 0): Fraction(2), (1, 1): Fraction(1, 2), (2, 2): Fraction(1)})
        checks = by_name(structural_checks(p))
        assert checks["bidegree"].passed
        assert not checks["palindromic"].passed
        assert not checks["integer"].passed
        assert not checks["constant_term"].passed

    def test_document(self):
        """文档中的失败计数不含仅记录的检验"""
        p = BpsPolynomial(mu=(P(1), P(1)), n=(2, 3), g=1, d=2,
                          terms={(0, 0): Fraction(1), (-1, 0): Fraction(1)})
        checks = structural_checks(p)
        doc = p.to_document({}, "0.1.0", checks)
        assert doc.terms[0] == (-1, 0, "1")
        assert doc.checks_failed == sum(1 for c in checks if not c.passed and not c.informational)
        assert not by_name(checks)["laurent"].passed

    def test_bidegree_audit(self):
        """两处双次数说法只做记录"""
        results = bidegree_audit()
        assert len(results) == 2
        assert all(r.informational for r in results)
        assert "62" in results[0].detail


class TestHmw:
    def test_omega_single_box(self):
        """Ω_{(1)} = (−1)^{n−m} (z − w)^{2g} / ((z² − 1)(1 − w²))"""
        z, w = ZW.nominal(1, 0), ZW.nominal(0, 1)
        expected = -(z - w) ** 2 / ((z * z - 1) * (1 - w * w))
        assert equal(omega(1, 5, 2, P(1)), expected)

    def test_hmw_to_uv(self):
        """z^a w^b ↦ u^{(a−b)/2} v^{-b}"""
        h = HmwPolynomial(mu=(P(1),), n_total=2, g=0, terms={(2, 0): Fraction(1), (1, 1): Fraction(-3)})
        assert hmw_to_uv(h) == {(1, 0): 1, (0, -1): -3}
        odd = HmwPolynomial(mu=(P(1),), n_total=2, g=0, terms={(1, 0): Fraction(1)})
        with pytest.raises(LatticeError):
            hmw_to_uv(odd)

    @pytest.mark.parametrize("g", [0, 1])
    def test_single_box_agreement(self, g):
        """r = 1 时两条管线一致"""
        data = WildCurveData(g=g, n=(2, 3), l=(1, 1))
        target = (P(1), P(1))
        p = gv_extract(RefinedContext(data=data, r_max=1), target)
        h = hmw_extract(data, target)
        verdict, diff = compare_hmw(p, h)
        assert verdict == "equal"
        assert diff == []

    def test_perturbed_reports_diff(self):
        """扰动 ℍ 后必须给出差异"""
        data = WildCurveData(g=1, n=(2, 3), l=(1, 1))
        target = (P(1), P(1))
        p = gv_extract(RefinedContext(data=data, r_max=1), target)
        verdict, diff = compare_hmw(p, hmw_extract(data, target).perturbed())
        assert verdict == "diff"
        assert len(diff) == 1

    def test_requires_columns(self):
        """只有 μ_a = (1^r) 时才能比较"""
        p = BpsPolynomial(mu=(P(2),), n=(2,), g=0, d=0)
        h = HmwPolynomial(mu=(P(2),), n_total=2, g=0)
        with pytest.raises(PreconditionError):
            compare_hmw(p, h)

    @pytest.mark.parametrize("r", [2, 3])
    @pytest.mark.parametrize("n", [(1, 1), (1, 2), (2, 2)])
    @pytest.mark.parametrize("g", [0, 1])
    def test_desk_grid(self, g, n, r):
        """μ_a = (1^r)，r ∈ {2,3}，deg D = n_1 + n_2 ∈ {2,3,4}"""
        data = WildCurveData(g=g, n=n, l=(r, r))
        target = (P(*[1] * r), P(*[1] * r))
        p = gv_extract(RefinedContext(data=data, r_max=r), target)
        verdict, diff = compare_hmw(p, hmw_extract(data, target))
        assert verdict == "equal", diff
        checks = by_name(structural_checks(p))
        assert checks["bidegree"].passed, checks["bidegree"].detail
        assert p.d % 2 == 0

    @pytest.mark.extended
    @pytest.mark.parametrize("n, r", [((1, 1), 3), ((2, 3), 3), ((3, 4), 3), ((2, 2), 2)])
    def test_genus_two_boundary(self, n, r):
        """g = 2 的边界情形与更大的 deg D"""
        data = WildCurveData(g=2, n=n, l=(r, r))
        target = (P(*[1] * r), P(*[1] * r))
        p = gv_extract(RefinedContext(data=data, r_max=r), target)
        verdict, diff = compare_hmw(p, hmw_extract(data, target))
        assert verdict == "equal", diff


class TestGolden:
    @pytest.mark.slow
    def test_example_one(self, golden):
        """μ = ((2,1),(2,1))，n = (3,4)，g = 1"""
        expected = golden("example1.json")
        p = extract_golden(expected)
        assert p.d == expected.d == 30
        assert p.terms == expected.terms
        assert_clean(p)

    @pytest.mark.slow
    def test_example_two(self, golden):
        """μ = ((2,1),(1,1,1))，n = (3,4)，g = 1"""
        expected = golden("example2.json")
        p = extract_golden(expected)
        assert p.d == expected.d == 38
        assert p.terms == expected.terms
        assert_clean(p)

    @pytest.mark.extended
    def test_example_three(self, golden):
        """μ = ((2,2),(2,2))，n = (3,4)，g = 1"""
        expected = golden("example3.json")
        p = extract_golden(expected)
        assert p.d == expected.d == 58
        assert p.terms == expected.terms
        assert_clean(p)

    @pytest.mark.parametrize("name", ["example1.json", "example2.json", "example3.json"])
    def test_golden_files_pass_checks(self, golden, name):
        """golden 数据本身满足结构检验"""
        expected = golden(name)
        assert_clean(expected)
        assert not by_name(structural_checks(expected))["symmetric_literal"].passed
