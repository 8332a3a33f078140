import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sublinear.bounds import (H, bahr_esseen_bounded, bahr_esseen_general, chernoff_bound,
                              classical_moment_bound, cosh_dominance_check, exponential_bound,
                              verify_theorem_2_1, verify_theorem_2_2, zhang_second_moment)
from sublinear.dependence import estimate_K, homogeneous_product_family
from sublinear.measure_space import Measure, RandomVector, SampleSpace
from sublinear.soak import run_soak
from sublinear.sublinear_core import MeasureFamily

E = math.e


def rademacher_pair(n=2):
    s = SampleSpace(2)
    return homogeneous_product_family([Measure(s, [0.5, 0.5]), Measure(s, [0.6, 0.4])], n, [-1.0, 1.0])


def enumerate_tail(base_values, marginals, n, level, two_sided=False):
    """max_j P_j(S_n > level) by brute-force enumeration of value tuples."""
    best = 0.0
    for q in marginals:
        total = 0.0
        for idx in itertools.product(range(len(base_values)), repeat=n):
            s = sum(base_values[i] for i in idx)
            if (abs(s) if two_sided else s) > level:
                total += math.prod(q[i] for i in idx)
        best = max(best, total)
    return best


class TestH:
    def test_conventions(self):
        assert H(0.0, 2.0) == 0.5
        assert H(0.0, 1.5) == 0.0
        assert H(1.0, 2.0) == pytest.approx(math.cosh(1.0) - 1.0, rel=1e-14)
        assert H(1.0, 2.0) == pytest.approx(0.54308, abs=1e-5)

    @pytest.mark.parametrize("p", [0.5, 1.0, 1.5, 2.0])
    def test_even_and_monotone(self, p):
        x = np.linspace(0.0, 40.0, 20_001)
        h = H(x, p)
        assert np.array_equal(h, H(-x, p))
        assert np.all(np.diff(h) >= -1e-15 * np.abs(h[1:]))

    def test_small_argument_accuracy(self):
        assert H(1e-8, 2.0) == pytest.approx(0.5, rel=1e-12)

    @pytest.mark.parametrize("p", [0.0, 2.5])
    def test_domain(self, p):
        with pytest.raises(ValueError):
            H(1.0, p)


class TestCoshDominance:
    def test_grid(self):
        rep = cosh_dominance_check()
        assert rep.passed and rep.points == 100_000

    def test_examples(self):
        assert math.expm1(1.0) - 1.0 == pytest.approx(E - 2)
        assert 2 * (math.cosh(1.0) - 1) == pytest.approx(1.08616, abs=1e-5)
        assert math.expm1(-10.0) + 10.0 == pytest.approx(9.000045, abs=1e-6)
        assert 2 * (math.cosh(10.0) - 1) == pytest.approx(22024.47, abs=1e-2)
        assert cosh_dominance_check(np.array([0.0, 1.0, -10.0])).passed


class TestChernoff:
    def test_unit_case(self):
        res = chernoff_bound(1.0, 2.0, 1.0, 1.0)
        assert res.t_opt == pytest.approx(math.log(2.0))
        assert res.bound <= E * (1 + 1e-9)

    def test_vanishing_moment(self):
        assert chernoff_bound(1.0, 1.5, 1.0, 1e-12).bound < 1e-10
        res = chernoff_bound(1.0, 1.5, 1.0, 0.0)
        assert res.degenerate and res.bound == 0.0 and math.isinf(res.t_opt)

    def test_example(self):
        res = chernoff_bound(2.0, 1.5, 2.0, 0.5)
        assert res.bound <= 2 * E * 2**-1.5 * 0.5 * (1 + 1e-9)

    @given(st.floats(0.01, 100), st.floats(1.001, 2.0), st.floats(1.0, 10.0), st.floats(1e-8, 1e4))
    def test_closing_inequality(self, eps, p, K, M):
        res = chernoff_bound(eps, p, K, M)
        assert res.bound <= K * E * eps**-p * M * (1 + 1e-9)
        assert res.bound == pytest.approx(exponential_bound(res.t_opt, eps, p, K, M), rel=1e-12)


class TestFormulas:
    def test_bounded(self):
        assert bahr_esseen_bounded(1.0, 2.0, 1.0, 1.0) == pytest.approx(E)
        assert bahr_esseen_bounded(1.0, 2.0, 1.0, 1.0, two_sided=True) == pytest.approx(2 * E)
        assert bahr_esseen_bounded(1.0, 2.0, 1.0, 0.0) == 0.0

    def test_general(self):
        assert bahr_esseen_general(1.0, 2.0, 1.0, 1.0) == pytest.approx(59.4926, abs=1e-4)
        assert bahr_esseen_general(1.0, 2.0, 1.0, 1.0, two_sided=True) == pytest.approx(118.985, abs=1e-3)
        assert bahr_esseen_general(2.0, 2.0, 1.0, 1.0) == pytest.approx(bahr_esseen_general(1.0, 2.0, 1.0, 1.0) / 4)

    @given(st.floats(0.01, 50), st.floats(1.001, 2.0), st.floats(1, 5), st.floats(0, 100))
    def test_two_sided_doubles(self, x, p, K, M):
        one = bahr_esseen_general(x, p, K, M)
        assert bahr_esseen_general(x, p, K, M, two_sided=True) == pytest.approx(2 * one, rel=1e-12)
        assert bahr_esseen_general(2 * x, p, K, M) <= one

    def test_second_moment(self):
        assert zhang_second_moment(1.0, 1.0, 1.0) == pytest.approx(1 + E)
        assert zhang_second_moment(1.0, 1.0, 0.0) == 0.0
        assert bahr_esseen_general(1.7, 2.0, 1.3, 0.4) == pytest.approx(16 * zhang_second_moment(1.7, 1.3, 0.4))

    def test_domains(self):
        with pytest.raises(ValueError):
            bahr_esseen_bounded(1.0, 1.0, 1.0, 1.0)
        with pytest.raises(ValueError):
            bahr_esseen_general(1.0, 2.0, 0.5, 1.0)
        with pytest.raises(ValueError):
            zhang_second_moment(0.0, 1.0, 1.0)

    def test_classical_reference(self):
        assert classical_moment_bound(2.0, [0.5, 0.25]) == 1.5


class TestBoundedVerifier:
    def test_zero(self):
        F, X, cert = rademacher_pair()
        rep = verify_theorem_2_1(F, X * 0.0, 1.0, 1.5, cert)
        assert rep.lhs == 0.0 and rep.rhs == 0.0 and rep.passed and not rep.failed

    def test_rademacher_pair_enumeration(self):
        F, X, cert = rademacher_pair()
        rep = verify_theorem_2_1(F, X, 1.5, 2.0, cert)
        assert rep.lhs == pytest.approx(enumerate_tail([-1, 1], [[0.5, 0.5], [0.6, 0.4]], 2, 1.5))
        assert rep.branch == "asserted" and rep.passed and rep.chain_passed
        assert rep.chain["t_opt"] > 0

    def test_two_sided(self):
        s = SampleSpace(3)
        F, X, cert = homogeneous_product_family(
            [Measure(s, [0.5, 0.0, 0.5]), Measure(s, [0.25, 0.5, 0.25])], 2, [-1.0, 0.0, 1.0])
        rep = verify_theorem_2_1(F, X, 1.5, 2.0, cert, two_sided=True)
        oracle = enumerate_tail([-1, 0, 1], [[0.5, 0, 0.5], [0.25, 0.5, 0.25]], 2, 1.5, two_sided=True)
        assert rep.lhs == pytest.approx(oracle)
        assert rep.rhs == pytest.approx(2 * E * 1.5**-2 * 2.0)
        assert rep.passed and rep.chain_passed

    def test_precondition_reported(self):
        F, X, cert = rademacher_pair()
        rep = verify_theorem_2_1(F, X, 0.5, 2.0, cert)  # |Z| = 1 > eps
        assert rep.branch == "precondition" and not rep.failed
        rep = verify_theorem_2_1(F, -X, 1.5, 2.0, cert)  # E^[-X] = 0.2 > 0
        assert rep.branch == "precondition"

    def test_estimated_certificate_is_report_only(self):
        F = MeasureFamily.from_weights([[0.5, 0.0, 0.0, 0.5], [0.25] * 4])
        X = RandomVector(F.space, [[-1.0, -1.0], [-1.0, 1.0], [1.0, -1.0], [1.0, 1.0]])
        rep = verify_theorem_2_1(F, X, 1.0, 2.0, estimate_K(F, X))
        assert rep.branch == "report-only" and not rep.failed
        assert any("not certified" in n for n in rep.notes)


class TestGeneralVerifier:
    def test_zero(self):
        F, X, cert = rademacher_pair()
        rep = verify_theorem_2_2(F, X * 0.0, 1.0, 1.5, cert)
        assert rep.lhs == 0.0 and rep.passed

    def test_overshooting_values(self):
        s = SampleSpace(3)
        marg = [[0.5, 0.3, 0.2], [0.6, 0.2, 0.2]]
        F, X, cert = homogeneous_product_family([Measure(s, w) for w in marg], 2, [-2.0, 0.0, 4.0])
        rep = verify_theorem_2_2(F, X, 4.0, 1.5, cert)
        assert rep.lhs == pytest.approx(enumerate_tail([-2, 0, 4], marg, 2, 4.0))
        assert rep.chain["p5_lhs"] > 0 and rep.passed

    def test_vacuous_branch(self):
        F, X, cert = rademacher_pair()
        rep = verify_theorem_2_2(F, X, 1.0, 2.0, cert)
        assert rep.rhs > 1 and rep.branch == "vacuous"
        assert "bound exceeds 1" in rep.notes and rep.passed

    def test_non_vacuous_chain(self):
        F, X, cert = rademacher_pair(4)
        x = 4 * (2 * (1 + E) * 4) ** 0.5
        rep = verify_theorem_2_2(F, X, x, 2.0, cert)
        assert rep.rhs <= 1 and rep.branch == "asserted"
        assert rep.chain_passed
        assert rep.chain["p6_lhs"] <= x / 4

    def test_monotone_in_x(self):
        F, X, cert = rademacher_pair(3)
        reps = [verify_theorem_2_2(F, X, x, 1.5, cert) for x in np.linspace(0.5, 6, 12)]
        assert all(a.lhs >= b.lhs for a, b in zip(reps, reps[1:]))
        assert all(a.rhs >= b.rhs for a, b in zip(reps, reps[1:]))

    def test_two_sided_is_double(self):
        s = SampleSpace(3)
        F, X, cert = homogeneous_product_family(
            [Measure(s, [0.5, 0.0, 0.5]), Measure(s, [0.25, 0.5, 0.25])], 3, [-1.0, 0.0, 1.0])
        one = verify_theorem_2_2(F, X, 2.0, 1.5, cert)
        two = verify_theorem_2_2(F, X, 2.0, 1.5, cert, two_sided=True)
        assert two.rhs == pytest.approx(2 * one.rhs)
        assert two.lhs >= one.lhs


class TestSoak:
    @pytest.mark.parametrize("theorem", ["2.1", "2.2"])
    @pytest.mark.parametrize("two_sided", [False, True])
    def test_short_soak(self, theorem, two_sided):
        for _, inst, rep in run_soak(theorem, 60, seed=11, two_sided=two_sided):
            assert rep.branch in ("asserted", "vacuous")
            assert not rep.failed, rep.to_dict()
            assert rep.slack >= -1e-9 * rep.rhs

    def test_soak_is_deterministic(self):
        a = [r.to_dict() for _, _, r in run_soak("2.2", 5, seed=3)]
        b = [r.to_dict() for _, _, r in run_soak("2.2", 5, seed=3)]
        assert a == b
