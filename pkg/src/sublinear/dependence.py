"""END families with certified dominating constants, and empirical estimates of K.

A family of product measures is extended negatively dependent with K = 1:
for nonnegative test functions

    E^[prod f_i(X_i)] = max_j prod_i E_j[f_i] <= prod_i max_j E_j[f_i].

For other families :func:`estimate_K` searches a finite grid of monotone
test functions, which only ever yields a lower bound on the true K.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .errors import StructuralError
from .measure_space import Measure, PiecewiseLinearFn, RandomVector, _check_space
from .sublinear_core import MeasureFamily

DENOMINATOR_CUTOFF = 1e-12
DEFAULT_THRESHOLDS = (-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0)
DEFAULT_WIDTHS = (0.25, 1.0)
MAX_EXHAUSTIVE_N = 6


@dataclass(frozen=True)
class ENDCertificate:
    kind: str  # "certified" | "estimated"
    K: float
    direction: str  # "upper" | "lower" | "both"
    evidence: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("certified", "estimated"):
            raise ValueError(f"unknown certificate kind {self.kind!r}")
        if self.direction not in ("upper", "lower", "both"):
            raise ValueError(f"unknown direction {self.direction!r}")
        if not self.K >= 1:
            raise ValueError("dominating constant K must be >= 1")

    @property
    def certified(self) -> bool:
        return self.kind == "certified"

    def covers(self, direction: str) -> bool:
        return self.direction == "both" or self.direction == direction

    def to_dict(self) -> dict:
        return {"kind": self.kind, "K": self.K, "direction": self.direction,
                "evidence": self.evidence}


class ENDModel(NamedTuple):
    family: MeasureFamily
    X: Optional[RandomVector]
    certificate: ENDCertificate


def certify(F: MeasureFamily) -> Optional[ENDCertificate]:
    """K = 1 certificate for product-structured families, else ``None``."""
    if not F.is_product:
        return None
    return ENDCertificate("certified", 1.0, "both",
                          {"reason": f"every member is a product measure ({F.structure})",
                           "members": F.size, "coordinates": F.factor_count})


def homogeneous_product_family(marginals: Sequence[Measure], n: int,
                               base_values=None) -> ENDModel:
    """``{Q_j^{(x)n}}`` with coordinate ``i`` = base value of the ``i``-th factor.

    ``base_values`` maps base atoms to reals (default: the atom index).
    """
    marginals = tuple(marginals)
    if not marginals:
        raise StructuralError("need at least one marginal")
    if n < 1:
        raise StructuralError("n must be >= 1")
    base = marginals[0].space
    for q in marginals:
        _check_space(base, q.space)
    v = np.arange(base.atom_count, dtype=float) if base_values is None else np.asarray(base_values, float)
    if v.shape != (base.atom_count,):
        raise StructuralError("need one base value per base atom")
    F = MeasureFamily.homogeneous(marginals, n)
    X = RandomVector(F.space, v[F.space.atom_tuples()])
    return ENDModel(F, X, certify(F))


def product_family(per_member_marginals, coordinate_values=None) -> ENDModel:
    """Members are full products with their own per-coordinate marginals.

    ``coordinate_values[i]`` maps the atoms of factor ``i`` to reals; when
    omitted ``X`` is ``None``.
    """
    F = MeasureFamily.product(per_member_marginals)
    X = None
    if coordinate_values is not None:
        if len(coordinate_values) != F.factor_count:
            raise StructuralError("need one value map per coordinate")
        tuples = F.space.atom_tuples()
        cols = [np.asarray(vals, float)[tuples[:, i]] for i, vals in enumerate(coordinate_values)]
        X = RandomVector(F.space, np.stack(cols, axis=1))
    return ENDModel(F, X, certify(F))


def ramp(a: float, w: float, increasing: bool = True) -> PiecewiseLinearFn:
    """``clamp((x - a)/w, 0, 1)``, or its mirror ``clamp((a - x)/w, 0, 1)``."""
    if w <= 0:
        raise ValueError("ramp width must be positive")
    if increasing:
        return PiecewiseLinearFn.from_knots([a, a + w], [0.0, 1.0], range_bounds=(0.0, 1.0))
    return PiecewiseLinearFn.from_knots([a - w, a], [1.0, 0.0], range_bounds=(0.0, 1.0))


@dataclass(frozen=True)
class MonotoneTestGrid:
    """Nonnegative monotone ramps bounded by 1, split by direction."""

    increasing: tuple
    decreasing: tuple

    def __post_init__(self):
        if not self.increasing and not self.decreasing:
            raise ValueError("test grid is empty")

    @classmethod
    def build(cls, thresholds, widths) -> "MonotoneTestGrid":
        inc = tuple(ramp(a, w, True) for a in thresholds for w in widths)
        dec = tuple(ramp(a, w, False) for a in thresholds for w in widths)
        return cls(inc, dec)

    @classmethod
    def default(cls, values=None) -> "MonotoneTestGrid":
        """Default thresholds and widths, rescaled to the value range of ``values``."""
        center, half = 0.0, 1.0
        if values is not None:
            v = np.asarray(values, float)
            lo, hi = float(v.min()), float(v.max())
            center = 0.5 * (lo + hi)
            half = 0.5 * (hi - lo) or 1.0
        return cls.build([center + half * a for a in DEFAULT_THRESHOLDS],
                         [half * w for w in DEFAULT_WIDTHS])

    def functions(self, direction: str) -> tuple:
        if direction == "upper":
            return self.increasing
        if direction == "lower":
            return self.decreasing
        raise ValueError(f"direction must be 'upper' or 'lower', got {direction!r}")

    @property
    def size(self) -> int:
        return len(self.increasing) + len(self.decreasing)


def _max_ratio(F: MeasureFamily, X: RandomVector, funcs) -> tuple:
    """Largest ``E^[prod f_i(X_i)] / prod E^[f_i(X_i)]`` over all tuples from ``funcs``."""
    n = X.n
    # fv[i, g, atom] = f_g(X_i(atom))
    fv = np.stack([np.stack([f(X.values[:, i]) for f in funcs]) for i in range(n)])
    # denom_single[i, g] = E^[f_g(X_i)]
    denom_single = np.max(np.einsum("ma,nga->mng", F.matrix, fv), axis=0)
    G = len(funcs)
    best, arg, checked = -np.inf, None, 0
    tail = min(n, 2)
    head = n - tail
    for prefix in itertools.product(range(G), repeat=head):
        prod = np.ones(F.space.atom_count)
        den = 1.0
        for i, g in enumerate(prefix):
            prod = prod * fv[i, g]
            den *= denom_single[i, g]
        # vectorize over the last `tail` coordinates
        block = prod[None, :] * fv[head]
        dblock = den * denom_single[head]
        if tail == 2:
            block = (block[:, None, :] * fv[head + 1][None, :, :]).reshape(G * G, -1)
            dblock = np.multiply.outer(dblock, denom_single[head + 1]).ravel()
        num = (block @ F.matrix.T).max(axis=1)
        ok = dblock >= DENOMINATOR_CUTOFF
        checked += int(ok.sum())
        if ok.any():
            ratios = np.where(ok, num / np.where(ok, dblock, 1.0), -np.inf)
            k = int(np.argmax(ratios))
            if ratios[k] > best:
                best = float(ratios[k])
                tail_idx = np.unravel_index(k, (G,) * tail)
                arg = tuple(prefix) + tuple(int(t) for t in tail_idx)
    return best, arg, checked


def estimate_K(F: MeasureFamily, X: RandomVector, grid: Optional[MonotoneTestGrid] = None,
               direction: str = "both") -> ENDCertificate:
    """Grid search for the dominating constant; the result is a lower bound on K."""
    _check_space(F.space, X.space)
    if X.n > MAX_EXHAUSTIVE_N:
        raise ValueError(f"exhaustive grid search supports n <= {MAX_EXHAUSTIVE_N}")
    if grid is None:
        grid = MonotoneTestGrid.default(X.values)
    dirs = ("upper", "lower") if direction == "both" else (direction,)
    per_dir = {}
    for d in dirs:
        funcs = grid.functions(d)
        if not funcs:
            continue
        ratio, arg, checked = _max_ratio(F, X, funcs) if X.n > 1 else (1.0, None, len(funcs))
        per_dir[d] = {"max_ratio": ratio, "argmax": arg, "tuples_checked": checked}
    if not per_dir:
        raise ValueError("test grid is empty for the requested direction")
    K_hat = max([1.0] + [v["max_ratio"] for v in per_dir.values()])
    evidence = {
        "grid_size": grid.size,
        "n": X.n,
        "per_direction": per_dir,
        "note": "grid relaxation: the estimate is a lower bound on the minimal K",
    }
    return ENDCertificate("estimated", K_hat, direction, evidence)
