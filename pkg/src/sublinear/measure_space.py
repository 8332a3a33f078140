"""Finite sample spaces, discrete measures, random vectors and test functions.

Everything here is immutable after construction: arrays are copied and
flagged read-only so that instances can be shared freely.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import AtomLimitError, StructuralError

MAX_PRODUCT_ATOMS = 2**24
WEIGHT_SUM_TOL = 1e-12


def _frozen(a, dtype=np.float64):
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class SampleSpace:
    """A finite set of atoms, optionally labelled.

    Product spaces keep their factors; atom ``k`` of a product corresponds
    to the tuple ``np.unravel_index(k, shape)`` (lexicographic order, last
    factor varying fastest).
    """

    atom_count: int
    atom_labels: Optional[tuple] = None
    factors: Optional[tuple] = None

    def __post_init__(self):
        if int(self.atom_count) != self.atom_count or self.atom_count < 1:
            raise StructuralError(f"atom_count must be a positive integer, got {self.atom_count!r}")
        if self.atom_labels is not None:
            labels = tuple(self.atom_labels)
            if len(labels) != self.atom_count:
                raise StructuralError("need exactly one label per atom")
            if len(set(labels)) != len(labels):
                raise StructuralError("atom labels must be unique")
            object.__setattr__(self, "atom_labels", labels)
        if self.factors is not None:
            object.__setattr__(self, "factors", tuple(self.factors))

    @property
    def shape(self) -> tuple:
        if self.factors is None:
            return (self.atom_count,)
        return tuple(f.atom_count for f in self.factors)

    def atom_tuples(self) -> np.ndarray:
        """Integer matrix of factor indices, one row per atom."""
        idx = np.unravel_index(np.arange(self.atom_count), self.shape)
        return np.stack(idx, axis=1)

    def to_dict(self) -> dict:
        d = {"atoms": self.atom_count}
        if self.atom_labels is not None and self.factors is None:
            d["labels"] = list(self.atom_labels)
        return d

    @classmethod
    def from_dict(cls, doc: dict) -> "SampleSpace":
        try:
            return cls(int(doc["atoms"]), doc.get("labels"))
        except (KeyError, TypeError) as exc:
            raise StructuralError(f"malformed space document: {exc}") from exc


def _check_space(a: SampleSpace, b: SampleSpace):
    if a is not b and a != b:
        raise StructuralError(f"sample spaces differ ({a.atom_count} vs {b.atom_count} atoms)")


@dataclass(frozen=True, eq=False)
class Measure:
    """Probability mass function on a :class:`SampleSpace`."""

    space: SampleSpace
    weights: np.ndarray

    def __post_init__(self):
        w = _frozen(self.weights)
        if w.shape != (self.space.atom_count,):
            raise StructuralError(
                f"expected {self.space.atom_count} weights, got shape {w.shape}")
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise StructuralError("weights must be finite and nonnegative")
        total = math.fsum(w)
        if abs(total - 1.0) > WEIGHT_SUM_TOL:
            raise StructuralError(f"weights sum to {total!r}, not 1")
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, space: SampleSpace) -> "Measure":
        return cls(space, np.full(space.atom_count, 1.0 / space.atom_count))

    @classmethod
    def from_weights(cls, weights: Sequence[float], space: Optional[SampleSpace] = None) -> "Measure":
        w = np.asarray(weights, dtype=float)
        return cls(space if space is not None else SampleSpace(len(w)), w)

    def to_dict(self) -> dict:
        return {"weights": self.weights.tolist()}

    @classmethod
    def from_dict(cls, doc, space: Optional[SampleSpace] = None) -> "Measure":
        weights = doc["weights"] if isinstance(doc, dict) else doc
        try:
            return cls.from_weights(weights, space)
        except (TypeError, ValueError) as exc:
            if isinstance(exc, StructuralError):
                raise
            raise StructuralError(f"malformed measure document: {exc}") from exc


@dataclass(frozen=True, eq=False)
class RandomVector:
    """Values of ``n`` coordinates on every atom (rows = atoms).

    Single-coordinate vectors support elementwise arithmetic with scalars
    and other vectors on the same space.
    """

    space: SampleSpace
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64)
        if v.ndim == 1:
            v = v[:, None]
        if v.ndim != 2 or v.shape[0] != self.space.atom_count or v.shape[1] < 1:
            raise StructuralError(
                f"values must have one row per atom ({self.space.atom_count}), got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise StructuralError("random vector values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.shape[1]

    @property
    def column(self) -> np.ndarray:
        """The value array of a single-coordinate vector."""
        if self.n != 1:
            raise StructuralError(f"expected a single-coordinate vector, got n={self.n}")
        return self.values[:, 0]

    def coordinate(self, i: int) -> "RandomVector":
        return RandomVector(self.space, self.values[:, i])

    def partial_sum(self) -> "RandomVector":
        return RandomVector(self.space, self.values.sum(axis=1))

    def map(self, fn) -> "RandomVector":
        return RandomVector(self.space, fn(self.values))

    def _other(self, other):
        if isinstance(other, RandomVector):
            _check_space(self.space, other.space)
            return other.values
        return other

    def __add__(self, other):
        return RandomVector(self.space, self.values + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return RandomVector(self.space, self.values - self._other(other))

    def __rsub__(self, other):
        return RandomVector(self.space, self._other(other) - self.values)

    def __mul__(self, other):
        return RandomVector(self.space, self.values * self._other(other))

    __rmul__ = __mul__

    def __neg__(self):
        return RandomVector(self.space, -self.values)

    def __abs__(self):
        return RandomVector(self.space, np.abs(self.values))

    def __pow__(self, p):
        return RandomVector(self.space, self.values**p)

    def to_dict(self) -> dict:
        return {"values": self.values.tolist()}

    @classmethod
    def from_dict(cls, doc, space: SampleSpace) -> "RandomVector":
        values = doc["values"] if isinstance(doc, dict) else doc
        try:
            return cls(space, np.asarray(values, dtype=float))
        except (TypeError, ValueError) as exc:
            if isinstance(exc, StructuralError):
                raise
            raise StructuralError(f"malformed random vector document: {exc}") from exc


def _values_on(space: SampleSpace, X) -> np.ndarray:
    """Single-coordinate values of ``X`` (RandomVector or array) on ``space``."""
    if isinstance(X, RandomVector):
        _check_space(space, X.space)
        return X.column
    v = np.asarray(X, dtype=float)
    if v.shape != (space.atom_count,):
        raise StructuralError(f"expected {space.atom_count} values, got shape {v.shape}")
    return v


def expectation(P: Measure, X) -> float:
    """Classical expectation of a single-coordinate vector under ``P``."""
    return float(P.weights @ _values_on(P.space, X))


def product_space(marginal_spaces: Sequence[SampleSpace]) -> SampleSpace:
    spaces = tuple(marginal_spaces)
    if not spaces:
        raise StructuralError("need at least one marginal space")
    if len(spaces) == 1:
        return spaces[0]
    total = 1
    for s in spaces:
        total *= s.atom_count
        if total > MAX_PRODUCT_ATOMS:
            raise AtomLimitError(f"product space exceeds {MAX_PRODUCT_ATOMS} atoms")
    labels = None
    if all(s.atom_labels is not None for s in spaces) and total <= 4096:
        labels = tuple(
            tuple(s.atom_labels[j] for s, j in zip(spaces, row))
            for row in np.ndindex(*[s.atom_count for s in spaces]))
    return SampleSpace(total, labels, factors=spaces)


def product_measure(marginals: Sequence[Measure], space: Optional[SampleSpace] = None) -> Measure:
    """Product of independent marginals, weights in lexicographic tuple order.

    ``space`` may be passed to reuse an already built product space (it must
    equal ``product_space`` of the marginal spaces).
    """
    marginals = tuple(marginals)
    if space is None:
        space = product_space([m.space for m in marginals])
    elif len(marginals) > 1 and space.factors != tuple(m.space for m in marginals):
        raise StructuralError("space is not the product of the marginal spaces")
    if len(marginals) == 1:
        return marginals[0]
    w = marginals[0].weights
    for m in marginals[1:]:
        w = np.multiply.outer(w, m.weights).ravel()
    return Measure(space, w / math.fsum(w))


@dataclass(frozen=True, eq=False)
class PiecewiseLinearFn:
    """Continuous piecewise-linear function on the real line.

    With breakpoints ``b_1 < ... < b_k`` there are ``k + 1`` segments; segment
    ``i`` covers ``[b_i, b_{i+1})`` where ``b_0 = -inf`` and ``b_{k+1} = +inf``.
    """

    breakpoints: np.ndarray
    slopes: np.ndarray
    intercepts: np.ndarray
    range_bounds: Optional[tuple] = None

    def __post_init__(self):
        b = _frozen(self.breakpoints)
        s = _frozen(self.slopes)
        c = _frozen(self.intercepts)
        if b.ndim != 1 or s.shape != (b.size + 1,) or c.shape != (b.size + 1,):
            raise StructuralError("need k breakpoints and k+1 slopes/intercepts")
        if np.any(np.diff(b) <= 0):
            raise StructuralError("breakpoints must be strictly increasing")
        left = s[:-1] * b + c[:-1]
        right = s[1:] * b + c[1:]
        scale = np.maximum(1.0, np.maximum(np.abs(left), np.abs(right)))
        if np.any(np.abs(left - right) > 1e-9 * scale):
            raise StructuralError("piecewise-linear function is discontinuous")
        object.__setattr__(self, "breakpoints", b)
        object.__setattr__(self, "slopes", s)
        object.__setattr__(self, "intercepts", c)

    @classmethod
    def affine(cls, slope: float = 1.0, intercept: float = 0.0) -> "PiecewiseLinearFn":
        return cls(np.empty(0), [slope], [intercept])

    @classmethod
    def identity(cls) -> "PiecewiseLinearFn":
        return cls.affine(1.0, 0.0)

    @classmethod
    def constant(cls, c: float) -> "PiecewiseLinearFn":
        return cls.affine(0.0, c)

    @classmethod
    def from_knots(cls, xs, ys, left_slope: float = 0.0, right_slope: float = 0.0,
                   range_bounds: Optional[tuple] = None) -> "PiecewiseLinearFn":
        """Interpolate the knots, extending linearly with the given end slopes."""
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        if xs.ndim != 1 or xs.size < 1 or xs.shape != ys.shape:
            raise StructuralError("need matching, nonempty knot arrays")
        inner = np.diff(ys) / np.diff(xs)
        slopes = np.concatenate([[left_slope], inner, [right_slope]])
        starts_x = np.concatenate([[xs[0]], xs])
        starts_y = np.concatenate([[ys[0]], ys])
        intercepts = starts_y - slopes * starts_x
        return cls(xs, slopes, intercepts, range_bounds)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        seg = np.searchsorted(self.breakpoints, x, side="right")
        out = self.slopes[seg] * x + self.intercepts[seg]
        return float(out) if out.ndim == 0 else out

    @property
    def lipschitz(self) -> float:
        return float(np.max(np.abs(self.slopes)))

    def __add__(self, other):
        if isinstance(other, PiecewiseLinearFn):
            b = np.union1d(self.breakpoints, other.breakpoints)
            if b.size:
                probes = np.concatenate([[b[0] - 1.0], b])
            else:
                probes = np.zeros(1)
            i = np.searchsorted(self.breakpoints, probes, side="right")
            j = np.searchsorted(other.breakpoints, probes, side="right")
            return PiecewiseLinearFn(b, self.slopes[i] + other.slopes[j],
                                     self.intercepts[i] + other.intercepts[j])
        return PiecewiseLinearFn(self.breakpoints, self.slopes, self.intercepts + float(other))

    __radd__ = __add__

    def __mul__(self, a):
        a = float(a)
        bounds = None
        if self.range_bounds is not None:
            lo, hi = sorted((a * self.range_bounds[0], a * self.range_bounds[1]))
            bounds = (lo, hi)
        return PiecewiseLinearFn(self.breakpoints, a * self.slopes, a * self.intercepts, bounds)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        return self + (-other if isinstance(other, PiecewiseLinearFn) else -float(other))

    def __rsub__(self, other):
        return (-self) + other


def apply_fn(f: PiecewiseLinearFn, X: RandomVector) -> RandomVector:
    """Pointwise image ``f(X)``, atom by atom."""
    return RandomVector(X.space, f(X.values))
