"""Seeded random instances for the bound verifiers.

Every instance is a product-structured family (certified K = 1) whose
marginals are adjusted so the mean hypotheses hold: a marginal with positive
mean is mixed with the point mass on its most negative value until the mean
is zero (or below).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._rng import substream
from .bounds import BoundReport, verify_theorem_2_1, verify_theorem_2_2
from .dependence import ENDCertificate, homogeneous_product_family, product_family
from .measure_space import Measure, RandomVector, SampleSpace
from .sublinear_core import MeasureFamily, coordinate_upper_expectations

MAX_N = 5
MAX_BASE_ATOMS = 4
MAX_MEMBERS = 3


@dataclass
class Instance:
    family: MeasureFamily
    X: RandomVector
    certificate: ENDCertificate
    level: float  # eps for the bounded case, x for the general case
    p: float
    two_sided: bool


def _pull_mean(weights, values, rng, exact_zero: bool):
    """Mix ``weights`` with point masses so the mean is <= 0 (== 0 if ``exact_zero``)."""
    w = np.array(weights, float)
    mu = float(w @ values)
    lo, hi = int(np.argmin(values)), int(np.argmax(values))
    if mu > 0 or (exact_zero and mu < 0):
        target = lo if mu > 0 else hi
        lam = mu / (mu - values[target])
        if not exact_zero:
            lam += (1.0 - lam) * 0.3 * rng.random()
        point = np.zeros_like(w)
        point[target] = 1.0
        w = (1.0 - lam) * w + lam * point
    w = np.clip(w, 0.0, None)
    return w / w.sum()


def _draw_p(rng) -> float:
    return 2.0 if rng.random() < 0.2 else float(1.0 + rng.uniform(1e-3, 1.0))


def _build(rng, values_for, weights_for, n, k, m) -> tuple:
    """Homogeneous or per-coordinate product family with the given draws."""
    space = SampleSpace(k)
    if rng.random() < 0.5:
        values = values_for()
        marg = [Measure(space, weights_for(values)) for _ in range(m)]
        model = homogeneous_product_family(marg, n, values)
    else:
        coord_values = [values_for() for _ in range(n)]
        rows = [[Measure(space, weights_for(coord_values[i])) for i in range(n)] for _ in range(m)]
        model = product_family(rows, coord_values)
    return model


def theorem21_instance(rng, two_sided: bool = False) -> Instance:
    n = int(rng.integers(1, MAX_N + 1))
    k = int(rng.integers(2, MAX_BASE_ATOMS + 1))
    m = int(rng.integers(1, MAX_MEMBERS + 1))
    eps = float(rng.uniform(0.2, 3.0))
    p = _draw_p(rng)

    def values_for():
        v = eps * rng.uniform(-1.0, 1.0, k)
        v[0] = -eps * rng.uniform(0.2, 1.0)
        v[-1] = eps * rng.uniform(0.2, 1.0)
        if rng.random() < 0.3:
            v[-1] = eps
        return v

    def weights_for(values):
        return _pull_mean(rng.dirichlet(np.ones(k)), values, rng, two_sided)

    model = _build(rng, values_for, weights_for, n, k, m)
    return Instance(model.family, model.X, model.certificate, eps, p, two_sided)


def theorem22_instance(rng, two_sided: bool = False) -> Instance:
    n = int(rng.integers(1, MAX_N + 1))
    k = int(rng.integers(2, MAX_BASE_ATOMS + 1))
    m = int(rng.integers(1, MAX_MEMBERS + 1))
    p = _draw_p(rng)

    # heavy mode: one large atom carrying little mass, so that the sum can
    # exceed x while the bound is still below one
    heavy = rng.random() < 0.5

    def values_for():
        v = rng.normal(0.0, 1.0, k)
        v[0] = -abs(v[0]) - 0.1
        v[-1] = abs(v[-1]) + 0.1
        if heavy:
            v[:-1] *= 0.3
            v[-1] = float(rng.uniform(5.0, 50.0))
        elif rng.random() < 0.5:
            # rare large atom so that truncation at x/4 bites
            v[int(rng.integers(0, k))] = float(rng.choice([-1.0, 1.0]) * rng.uniform(3.0, 10.0))
            if v.max() <= 0:
                v[-1] = 0.5
            if v.min() >= 0:
                v[0] = -0.5
        return v

    def weights_for(values):
        w = rng.dirichlet(np.full(k, 0.6))
        if heavy:
            q = math.exp(rng.uniform(math.log(1e-4), math.log(1e-2)))
            w[:-1] *= (1.0 - q) / w[:-1].sum()
            w[-1] = q
        return _pull_mean(w, values, rng, two_sided)

    model = _build(rng, values_for, weights_for, n, k, m)
    F, X, cert = model
    M = float(np.sum(coordinate_upper_expectations(F, abs(X) ** p)))
    if M > 0:
        x_unit = 4.0 * ((1.0 + cert.K * math.e) * M) ** (1.0 / p)
        if two_sided:
            x_unit *= 2.0 ** (1.0 / p)
        x = x_unit * math.exp(rng.uniform(math.log(0.5), math.log(4.0)))
    else:
        x = 1.0
    return Instance(F, X, cert, float(x), p, two_sided)


def verify(inst: Instance, theorem: str) -> BoundReport:
    if theorem == "2.1":
        return verify_theorem_2_1(inst.family, inst.X, inst.level, inst.p,
                                  inst.certificate, inst.two_sided)
    if theorem == "2.2":
        return verify_theorem_2_2(inst.family, inst.X, inst.level, inst.p,
                                  inst.certificate, inst.two_sided)
    raise ValueError(f"unknown theorem {theorem!r}")


def run_soak(theorem: str, count: int, seed: int = 0, two_sided: bool = False):
    """Yield ``(index, instance, report)`` for ``count`` seeded instances."""
    make = theorem21_instance if theorem == "2.1" else theorem22_instance
    for i in range(count):
        rng = substream(seed, "soak", theorem, "two" if two_sided else "one", i)
        inst = make(rng, two_sided)
        yield i, inst, verify(inst, theorem)


def soak_row(index: int, inst: Instance, report: BoundReport, seed: Optional[int] = None) -> dict:
    return {"seed": seed if seed is not None else index, "n": inst.X.n, "p": inst.p,
            "eps_or_x": inst.level, "lhs": report.lhs, "rhs": report.rhs,
            "slack": report.slack, "branch": report.branch}
