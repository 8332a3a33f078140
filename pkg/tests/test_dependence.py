import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sublinear.dependence import (MonotoneTestGrid, certify, estimate_K,
                                  homogeneous_product_family, product_family, ramp)
from sublinear.errors import StructuralError
from sublinear.measure_space import Measure, RandomVector, SampleSpace
from sublinear.sublinear_core import (MeasureFamily, coordinate_lower_expectations,
                                      coordinate_upper_expectations, upper_expectation)

BASE = SampleSpace(2)
RADEMACHER = Measure(BASE, [0.5, 0.5])
BIASED = Measure(BASE, [0.6, 0.4])


def weights(k):
    return st.lists(st.floats(0.01, 1.0), min_size=k, max_size=k).map(
        lambda w: np.asarray(w) / np.sum(w))


class TestHomogeneousFamily:
    def test_single_member_is_iid(self):
        model = homogeneous_product_family([RADEMACHER], 3, [-1.0, 1.0])
        assert model.family.size == 1
        assert model.certificate.certified and model.certificate.K == 1.0

    def test_two_member_example(self):
        F, X, cert = homogeneous_product_family([RADEMACHER, BIASED], 2, [-1.0, 1.0])
        assert F.space.atom_count == 4 and F.size == 2
        assert np.allclose(coordinate_upper_expectations(F, X), [0.0, 0.0], atol=1e-15)
        assert np.allclose(coordinate_lower_expectations(F, X), [-0.2, -0.2], atol=1e-15)

    def test_end_inequality_on_fine_grid(self):
        F, X, _ = homogeneous_product_family([RADEMACHER, BIASED], 2, [-1.0, 1.0])
        for inc in (True, False):
            fs = [ramp(a, w, inc) for a in np.linspace(-1.5, 1.5, 10) for w in (0.5, 2.0)]
            for f, g in itertools.product(fs, fs):
                fx = f(X.values[:, 0])
                gy = g(X.values[:, 1])
                lhs = upper_expectation(F, fx * gy)
                rhs = upper_expectation(F, fx) * upper_expectation(F, gy)
                assert lhs <= rhs + 1e-12

    def test_value_count_checked(self):
        with pytest.raises(StructuralError):
            homogeneous_product_family([RADEMACHER], 2, [1.0, 2.0, 3.0])


class TestProductFamily:
    def test_one_member(self):
        model = product_family([[RADEMACHER, Measure(SampleSpace(3), [0.2, 0.3, 0.5])]])
        assert model.certificate.K == 1.0 and model.X is None

    def test_two_members_different_marginals(self):
        s3 = SampleSpace(3)
        rows = [[RADEMACHER, Measure(s3, [0.2, 0.3, 0.5])], [BIASED, Measure(s3, [0.5, 0.5, 0.0])]]
        F, X, cert = product_family(rows, [[-1.0, 1.0], [0.0, 1.0, 2.0]])
        assert cert.certified and cert.K == 1.0
        assert estimate_K(F, X).K == pytest.approx(1.0, abs=1e-9)

    def test_point_masses(self):
        delta = Measure(BASE, [1.0, 0.0])
        F, X, cert = product_family([[delta, delta, delta]], [[0.0, 1.0]] * 3)
        assert cert.K == 1.0
        assert estimate_K(F, X).K == pytest.approx(1.0, abs=1e-9)


class TestCertify:
    def test_general_family_is_not_certified(self):
        F = MeasureFamily.from_weights([[0.5, 0.0, 0.0, 0.5]])
        assert certify(F) is None

    def test_roundtrip_fields(self):
        cert = homogeneous_product_family([RADEMACHER], 2).certificate
        d = cert.to_dict()
        assert set(d) == {"kind", "K", "direction", "evidence"} and d["kind"] == "certified"


class TestEstimateK:
    @given(weights(2), weights(2), st.integers(1, 4))
    @settings(max_examples=30, deadline=None)
    def test_homogeneous_products_give_one(self, a, b, n):
        model = homogeneous_product_family([Measure(BASE, a), Measure(BASE, b)], n, [-1.0, 2.0])
        est = estimate_K(model.family, model.X)
        assert est.kind == "estimated"
        assert est.K == pytest.approx(1.0, abs=1e-9)

    def test_comonotone_family_exceeds_one(self):
        # X1 = X2 with probability one: E[f(X1) f(X2)] = 1/2 while E[f(X1)] = 1/2
        F = MeasureFamily.from_weights([[0.5, 0.0, 0.0, 0.5]])
        X = RandomVector(F.space, [[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
        est = estimate_K(F, X)
        assert est.K == pytest.approx(2.0)
        assert "lower bound" in est.evidence["note"]

    def test_single_coordinate(self):
        F = MeasureFamily.from_weights([[0.3, 0.7], [0.6, 0.4]])
        assert estimate_K(F, RandomVector(F.space, [-1.0, 1.0])).K == 1.0

    def test_custom_grid_and_direction(self):
        F, X, _ = homogeneous_product_family([RADEMACHER, BIASED], 3, [-1.0, 1.0])
        grid = MonotoneTestGrid.build([-1.0, 0.0, 1.0], [0.5])
        est = estimate_K(F, X, grid, "upper")
        assert est.direction == "upper" and set(est.evidence["per_direction"]) == {"upper"}
        # the ramp starting at 1 vanishes on {-1, 1}; tuples using it have zero denominators
        assert est.evidence["per_direction"]["upper"]["tuples_checked"] == 2**3
