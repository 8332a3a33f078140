"""Upper/lower expectations, capacities and Choquet integrals of a measure family.

A :class:`MeasureFamily` ``{P_1, ..., P_m}`` on a finite space generates

* the sub-linear expectation ``E^[X] = max_j E_{P_j}[X]``,
* its conjugate ``e^[X] = -E^[-X] = min_j E_{P_j}[X]``,
* the capacity pair ``V(A) = max_j P_j(A)``, ``v(A) = 1 - V(A^c)``.

On a finite space every function is admissible, so ``xi = I_A`` attains the
infimum defining ``V(A)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ._rng import substream
from .errors import StructuralError
from .measure_space import (
    Measure,
    RandomVector,
    SampleSpace,
    _check_space,
    _values_on,
    product_measure,
    product_space,
)

STRUCTURE_TOL = 1e-12
AXIOM_RTOL = 1e-9

GENERAL = "general"
PRODUCT = "product"
HOMOGENEOUS = "homogeneous-product"


@dataclass(frozen=True, eq=False)
class MeasureFamily:
    """Finite, nonempty set of measures on one space.

    ``structure`` tags product-structured families. For ``"product"``,
    ``marginals[j][i]`` is member ``j``'s law of coordinate ``i``; for
    ``"homogeneous-product"`` ``marginals[j]`` is a single base measure used
    for all ``factor_count`` coordinates. Tags are verified by rebuilding
    the product weights.
    """

    space: SampleSpace
    members: tuple
    structure: str = GENERAL
    marginals: Optional[tuple] = None
    factor_count: Optional[int] = None
    matrix: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        members = tuple(self.members)
        if not members:
            raise StructuralError("a measure family needs at least one member")
        for m in members:
            _check_space(self.space, m.space)
        object.__setattr__(self, "members", members)
        mat = np.stack([m.weights for m in members])
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)
        if self.structure not in (GENERAL, PRODUCT, HOMOGENEOUS):
            raise StructuralError(f"unknown structure tag {self.structure!r}")
        if self.structure != GENERAL:
            self._verify_structure()

    def _verify_structure(self):
        if self.marginals is None or len(self.marginals) != len(self.members):
            raise StructuralError("tagged family needs one marginal entry per member")
        for member, marg in zip(self.members, self.marginals):
            if self.structure == HOMOGENEOUS:
                factors = [marg] * int(self.factor_count)
            else:
                factors = list(marg)
            expected = product_measure(factors)
            if expected.space != self.space:
                raise StructuralError("marginals do not generate the family's space")
            if np.max(np.abs(expected.weights - member.weights)) > STRUCTURE_TOL:
                raise StructuralError("member is not the product of its declared marginals")

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def is_product(self) -> bool:
        return self.structure in (PRODUCT, HOMOGENEOUS)

    @classmethod
    def from_weights(cls, rows, space: Optional[SampleSpace] = None) -> "MeasureFamily":
        rows = [np.asarray(r, dtype=float) for r in rows]
        if space is None:
            space = SampleSpace(len(rows[0]))
        return cls(space, tuple(Measure(space, r) for r in rows))

    @classmethod
    def homogeneous(cls, base_marginals: Sequence[Measure], n: int) -> "MeasureFamily":
        base_marginals = tuple(base_marginals)
        space = product_space([base_marginals[0].space] * n)
        members = tuple(product_measure([q] * n, space) for q in base_marginals)
        return cls(space, members, HOMOGENEOUS, base_marginals, n)

    @classmethod
    def product(cls, per_member_marginals) -> "MeasureFamily":
        per_member = tuple(tuple(row) for row in per_member_marginals)
        if not per_member:
            raise StructuralError("a measure family needs at least one member")
        space = product_space([q.space for q in per_member[0]])
        members = tuple(product_measure(row, space) for row in per_member)
        return cls(space, members, PRODUCT, per_member, len(per_member[0]))

    def expectations(self, X) -> np.ndarray:
        """Per-member expectations: shape ``(m,)`` or ``(m, n)`` for vectors."""
        if isinstance(X, RandomVector):
            _check_space(self.space, X.space)
            vals = X.values
            out = self.matrix @ vals
            return out[:, 0] if vals.shape[1] == 1 else out
        return self.matrix @ _values_on(self.space, X)

    def to_dict(self) -> dict:
        d = self.space.to_dict()
        d["members"] = [m.weights.tolist() for m in self.members]
        if self.structure == HOMOGENEOUS:
            d.update(structure=HOMOGENEOUS, n=self.factor_count,
                     marginals=[q.weights.tolist() for q in self.marginals])
        elif self.structure == PRODUCT:
            d.update(structure=PRODUCT,
                     marginals=[[q.weights.tolist() for q in row] for row in self.marginals])
        return d


def upper_expectation_with_member(F: MeasureFamily, X) -> tuple:
    """``(E^[X], j)`` where ``j`` is the lowest-index attaining member."""
    e = F.expectations(X)
    if e.ndim != 1:
        raise StructuralError("upper_expectation needs a single-coordinate vector")
    j = int(np.argmax(e))
    return float(e[j]), j


def upper_expectation(F: MeasureFamily, X) -> float:
    return upper_expectation_with_member(F, X)[0]


def lower_expectation(F: MeasureFamily, X) -> float:
    e = F.expectations(X)
    if e.ndim != 1:
        raise StructuralError("lower_expectation needs a single-coordinate vector")
    return float(np.min(e))


def coordinate_upper_expectations(F: MeasureFamily, X: RandomVector) -> np.ndarray:
    """``E^[X_i]`` for every coordinate ``i`` of ``X``."""
    _check_space(F.space, X.space)
    return np.max(F.matrix @ X.values, axis=0)


def coordinate_lower_expectations(F: MeasureFamily, X: RandomVector) -> np.ndarray:
    _check_space(F.space, X.space)
    return np.min(F.matrix @ X.values, axis=0)


@dataclass(frozen=True, eq=False)
class EventSet:
    """A subset of the atoms of ``space``."""

    space: SampleSpace
    mask: np.ndarray

    def __post_init__(self):
        m = np.array(self.mask, dtype=bool)
        if m.shape != (self.space.atom_count,):
            raise StructuralError(f"expected {self.space.atom_count} membership flags, got {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "mask", m)

    @classmethod
    def of(cls, space: SampleSpace, atoms) -> "EventSet":
        m = np.zeros(space.atom_count, dtype=bool)
        m[list(atoms)] = True
        return cls(space, m)

    @classmethod
    def full(cls, space: SampleSpace) -> "EventSet":
        return cls(space, np.ones(space.atom_count, dtype=bool))

    @classmethod
    def empty(cls, space: SampleSpace) -> "EventSet":
        return cls(space, np.zeros(space.atom_count, dtype=bool))

    def complement(self) -> "EventSet":
        return EventSet(self.space, ~self.mask)

    def __or__(self, other: "EventSet") -> "EventSet":
        _check_space(self.space, other.space)
        return EventSet(self.space, self.mask | other.mask)

    @property
    def indicator(self) -> np.ndarray:
        return self.mask.astype(float)


@dataclass(frozen=True)
class CapacityPair:
    upper: float
    lower: float
    attaining_member_upper: int
    attaining_member_lower: int


def _event_mask(F: MeasureFamily, A) -> np.ndarray:
    if isinstance(A, EventSet):
        _check_space(F.space, A.space)
        return A.mask
    m = np.asarray(A, dtype=bool)
    if m.shape != (F.space.atom_count,):
        raise StructuralError(f"expected {F.space.atom_count} membership flags, got {m.shape}")
    return m


def _event_probabilities(F: MeasureFamily, mask: np.ndarray) -> np.ndarray:
    return F.matrix[:, mask].sum(axis=1)


def upper_probability(F: MeasureFamily, A) -> float:
    """``V(A)`` alone; ``A`` may be an :class:`EventSet` or a boolean mask."""
    return float(np.max(_event_probabilities(F, _event_mask(F, A))))


def upper_capacity(F: MeasureFamily, A) -> CapacityPair:
    mask = _event_mask(F, A)
    p_a = _event_probabilities(F, mask)
    p_c = _event_probabilities(F, ~mask)
    ju = int(np.argmax(p_a))
    jl = int(np.argmax(p_c))
    return CapacityPair(float(p_a[ju]), 1.0 - float(p_c[jl]), ju, jl)


def choquet_integral(F: MeasureFamily, X, side: str = "upper") -> float:
    """Exact Choquet integral of ``X`` with respect to ``V`` or ``v``.

    ``t -> V(X >= t)`` is constant on each gap between consecutive distinct
    values, so the integral is ``v_1 + sum_i (v_i - v_{i-1}) V(X >= v_i)``.
    """
    x = _values_on(F.space, X)
    levels = np.unique(x)
    if levels.size == 1:
        return float(levels[0])
    # ge[i, j] = P_j(X >= levels[i])
    order = np.argsort(x, kind="stable")
    sorted_x = x[order]
    tail = np.cumsum(F.matrix[:, order][:, ::-1], axis=1)[:, ::-1]
    first = np.searchsorted(sorted_x, levels[1:], side="left")
    ge = tail[:, first]
    if side == "upper":
        cap = ge.max(axis=0)
    elif side == "lower":
        # v(X >= t) = 1 - V(X < t), computed from the complementary masses
        below = np.cumsum(F.matrix[:, order], axis=1)
        lt = np.where(first > 0, below[:, np.maximum(first - 1, 0)], 0.0)
        cap = 1.0 - lt.max(axis=0)
    else:
        raise ValueError(f"side must be 'upper' or 'lower', got {side!r}")
    return float(levels[0] + math.fsum(np.diff(levels) * cap))


def markov_tail_bound(F: MeasureFamily, X, x: float, p: float) -> tuple:
    """``(V(|X| >= x), E^[|X|^p] / x^p)``; the first never exceeds the second."""
    if x <= 0 or p <= 0:
        raise ValueError("x and p must be positive")
    v = np.abs(_values_on(F.space, X))
    lhs = upper_probability(F, v >= x)
    rhs = upper_expectation(F, v**p) / x**p
    return lhs, rhs


def close(a: float, b: float, rtol: float = AXIOM_RTOL) -> bool:
    return abs(a - b) <= rtol * max(1.0, abs(a), abs(b))


def leq(a: float, b: float, rtol: float = AXIOM_RTOL) -> bool:
    return a <= b + rtol * max(1.0, abs(a), abs(b))


@dataclass
class AxiomReport:
    probes: int
    passed: bool
    counts: dict
    failures: list

    def to_dict(self) -> dict:
        return {"probes": self.probes, "passed": self.passed,
                "checks": self.counts, "failures": self.failures}


def check_axioms(F: MeasureFamily, probe_count: int = 100, seed: int = 0) -> AxiomReport:
    """Probe the sub-linear expectation axioms with seeded random inputs.

    Values are drawn from ``[-10, 10]``, scalars ``lam`` from ``(0, 10]``.
    Failures are recorded with their witnesses rather than raised.
    """
    if probe_count < 1:
        raise ValueError("probe_count must be >= 1")
    rng = substream(seed, "axioms")
    k = F.space.atom_count
    E = lambda v: upper_expectation(F, v)  # noqa: E731
    names = ("monotonicity", "constant", "subadditivity", "homogeneity",
             "translation", "difference", "conjugate")
    counts = {name: 0 for name in names}
    failures = []

    def record(name, ok, **witness):
        counts[name] += 1
        if not ok:
            failures.append({"axiom": name, **{key: _jsonable(v) for key, v in witness.items()}})

    record("constant", close(E(np.full(k, 5.0)), 5.0), c=5.0)
    for _ in range(probe_count):
        X = rng.uniform(-10, 10, k)
        Y = rng.uniform(-10, 10, k)
        below = X - rng.uniform(0, 10, k) * (rng.random(k) < 0.7)
        lam = rng.uniform(0, 10) or 1.0
        c = rng.uniform(-10, 10)
        ex, ey = E(X), E(Y)
        record("monotonicity", leq(E(below), ex), X=X, Y=below)
        record("constant", close(E(np.full(k, c)), c), c=c)
        record("subadditivity", leq(E(X + Y), ex + ey), X=X, Y=Y)
        record("homogeneity", close(E(lam * X), lam * ex), X=X, lam=lam)
        record("translation", close(E(X + c), ex + c), X=X, c=c)
        record("difference", leq(ex - ey, E(X - Y)), X=X, Y=Y)
        record("conjugate", leq(lower_expectation(F, X), ex), X=X)
    return AxiomReport(probe_count, not failures, counts, failures)


def _jsonable(v):
    if isinstance(v, np.ndarray):
        return v.tolist()
    return float(v)
