import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sublinear.errors import StructuralError
from sublinear.measure_space import Measure, RandomVector, SampleSpace, expectation
from sublinear.sublinear_core import (EventSet, MeasureFamily, check_axioms, choquet_integral,
                                      lower_expectation, markov_tail_bound, upper_capacity,
                                      upper_expectation, upper_expectation_with_member,
                                      upper_probability)

PAIR = MeasureFamily.from_weights([[0.5, 0.5], [0.3, 0.7]])


@st.composite
def families(draw, max_atoms=6, max_members=5):
    k = draw(st.integers(1, max_atoms))
    m = draw(st.integers(1, max_members))
    rows = draw(st.lists(st.lists(st.floats(0.0, 1.0), min_size=k, max_size=k),
                         min_size=m, max_size=m))
    rows = [np.asarray(r) + 1e-3 for r in rows]
    return MeasureFamily.from_weights([r / r.sum() for r in rows])


def values_for(F):
    return st.lists(st.floats(-10, 10), min_size=F.space.atom_count,
                    max_size=F.space.atom_count).map(np.asarray)


class TestUpperExpectation:
    def test_singleton_is_classical(self):
        P = Measure.from_weights([0.2, 0.3, 0.5])
        F = MeasureFamily(P.space, (P,))
        X = np.array([1.0, -2.0, 4.0])
        assert upper_expectation(F, X) == expectation(P, X)
        assert lower_expectation(F, X) == expectation(P, X)

    def test_pair_example(self):
        value, member = upper_expectation_with_member(PAIR, [1.0, -1.0])
        assert value == pytest.approx(0.0, abs=1e-15) and member == 0
        assert lower_expectation(PAIR, [1.0, -1.0]) == pytest.approx(-0.4, abs=1e-15)

    @given(families(), st.floats(-50, 50))
    def test_constant_preserving(self, F, c):
        assert upper_expectation(F, np.full(F.space.atom_count, c)) == pytest.approx(c, abs=1e-12)

    @given(st.data())
    def test_lower_below_upper(self, data):
        F = data.draw(families())
        X = data.draw(values_for(F))
        assert lower_expectation(F, X) <= upper_expectation(F, X) + 1e-12

    def test_space_mismatch(self):
        with pytest.raises(StructuralError):
            upper_expectation(PAIR, RandomVector(SampleSpace(3), [1.0, 2.0, 3.0]))

    def test_multi_coordinate_vector(self):
        X = RandomVector(PAIR.space, [[1.0, 0.0], [-1.0, 2.0]])
        with pytest.raises(StructuralError):
            upper_expectation(PAIR, X)


class TestFamilyStructure:
    def test_empty_family_rejected(self):
        with pytest.raises(StructuralError):
            MeasureFamily(SampleSpace(2), ())

    def test_members_on_other_space_rejected(self):
        with pytest.raises(StructuralError):
            MeasureFamily(SampleSpace(2), (Measure.from_weights([0.2, 0.3, 0.5]),))

    def test_homogeneous_tag_verified(self):
        base = SampleSpace(2)
        F = MeasureFamily.homogeneous([Measure(base, [0.5, 0.5]), Measure(base, [0.6, 0.4])], 3)
        assert F.structure == "homogeneous-product" and F.space.atom_count == 8
        assert F.matrix[1, 0] == pytest.approx(0.6**3)


class TestAxioms:
    @given(families(), st.integers(0, 2**32))
    @settings(max_examples=25, deadline=None)
    def test_all_pass(self, F, seed):
        rep = check_axioms(F, 100, seed)
        assert rep.passed, rep.failures[:3]
        assert rep.counts["homogeneity"] == 100

    def test_deterministic(self):
        assert check_axioms(PAIR, 20, 5).to_dict() == check_axioms(PAIR, 20, 5).to_dict()


class TestCapacity:
    def test_full_and_empty(self):
        full = upper_capacity(PAIR, EventSet.full(PAIR.space))
        empty = upper_capacity(PAIR, EventSet.empty(PAIR.space))
        assert (full.upper, full.lower) == (1.0, 1.0)
        assert (empty.upper, empty.lower) == (0.0, 0.0)

    def test_pair_example(self):
        cap = upper_capacity(PAIR, EventSet.of(PAIR.space, [1]))
        assert cap.upper == pytest.approx(0.7) and cap.lower == pytest.approx(0.5)

    @given(st.data())
    def test_conjugacy_and_order(self, data):
        F = data.draw(families())
        k = F.space.atom_count
        mask = np.asarray(data.draw(st.lists(st.booleans(), min_size=k, max_size=k)))
        A = EventSet(F.space, mask)
        cap = upper_capacity(F, A)
        assert cap.lower <= cap.upper + 1e-12
        assert cap.upper + upper_capacity(F, A.complement()).lower == pytest.approx(1.0, abs=1e-12)

    def test_upper_probability_accepts_masks(self):
        assert upper_probability(PAIR, np.array([False, True])) == pytest.approx(0.7)


def riemann_choquet(F, x, points=100_000):
    lo, hi = min(0.0, x.min()) - 1.0, max(0.0, x.max()) + 1.0
    h = (hi - lo) / points
    t = lo + h * (np.arange(points) + 0.5)
    ge = x[None, :] >= t[:, None]
    V = np.max(ge.astype(float) @ F.matrix.T, axis=1)
    integrand = np.where(t >= 0, V, V - 1.0)
    return float(np.sum(integrand) * h)


class TestChoquet:
    def test_singleton_is_expectation(self):
        P = Measure.from_weights([0.1, 0.6, 0.3])
        F = MeasureFamily(P.space, (P,))
        X = np.array([-2.0, 0.5, 3.0])
        assert choquet_integral(F, X) == pytest.approx(expectation(P, X), abs=1e-12)
        assert choquet_integral(F, X, "lower") == pytest.approx(expectation(P, X), abs=1e-12)

    def test_indicator(self):
        A = EventSet.of(PAIR.space, [1])
        assert choquet_integral(PAIR, A.indicator) == pytest.approx(upper_capacity(PAIR, A).upper)

    def test_pair_example(self):
        assert choquet_integral(PAIR, [0.0, 1.0]) == pytest.approx(0.7)

    @given(st.data())
    @settings(max_examples=30, deadline=None)
    def test_riemann_oracle(self, data):
        F = data.draw(families(max_atoms=5, max_members=3))
        X = data.draw(st.lists(st.floats(-5, 5), min_size=F.space.atom_count,
                               max_size=F.space.atom_count).map(np.asarray))
        assert choquet_integral(F, X) == pytest.approx(riemann_choquet(F, X), abs=1e-4)

    @given(st.data())
    def test_translation_and_conjugacy(self, data):
        F = data.draw(families())
        X = data.draw(values_for(F))
        c = data.draw(st.floats(-5, 5))
        upper = choquet_integral(F, X)
        assert choquet_integral(F, X + c) == pytest.approx(upper + c, abs=1e-9)
        assert choquet_integral(F, -X, "lower") == pytest.approx(-upper, abs=1e-9)

    def test_dominates_upper_expectation(self):
        # a Choquet integral w.r.t. the upper capacity dominates the upper expectation
        X = np.array([0.0, 1.0, 2.0])
        F = MeasureFamily.from_weights([[0.5, 0.0, 0.5], [0.0, 1.0, 0.0]])
        assert choquet_integral(F, X) >= upper_expectation(F, X) - 1e-12
        assert choquet_integral(F, X) == pytest.approx(1.5)


class TestMarkov:
    def test_bounded_below_level(self):
        lhs, rhs = markov_tail_bound(PAIR, [0.2, -0.4], 1.0, 2.0)
        assert lhs == 0.0 and rhs > 0

    def test_equality_case(self):
        F = MeasureFamily.from_weights([[0.5, 0.5]])
        assert markov_tail_bound(F, [1.0, -1.0], 1.0, 2.0) == pytest.approx((1.0, 1.0))

    @given(st.data())
    def test_inequality(self, data):
        F = data.draw(families())
        X = data.draw(values_for(F))
        x = data.draw(st.floats(0.1, 20))
        p = data.draw(st.floats(0.5, 3))
        lhs, rhs = markov_tail_bound(F, X, x, p)
        assert lhs <= rhs * (1 + 1e-12) + 1e-15
