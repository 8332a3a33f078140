"""Truncation operators, smoothing functions g / g_j, and slowly varying functions.

The smoothing functions are fixed piecewise-linear (trapezoidal) choices:
any even function that is 1 near the origin and 0 outside a band works in
the arguments that use them, and these have exact Lipschitz constants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .measure_space import PiecewiseLinearFn

DEFAULT_MU = 0.5


def clip(c: float) -> PiecewiseLinearFn:
    """``x -> max(-c, min(x, c))``."""
    if not c > 0:
        raise ValueError(f"clip level must be positive, got {c!r}")
    return PiecewiseLinearFn.from_knots([-c, c], [-c, c], range_bounds=(-c, c))


def overshoot(c: float) -> PiecewiseLinearFn:
    """``x -> x - clip(c)(x)``: zero on ``[-c, c]``, slope 1 outside."""
    if not c > 0:
        raise ValueError(f"overshoot level must be positive, got {c!r}")
    return PiecewiseLinearFn.from_knots([-c, c], [0.0, 0.0], left_slope=1.0, right_slope=1.0)


def positive_part() -> PiecewiseLinearFn:
    return PiecewiseLinearFn.from_knots([0.0], [0.0], left_slope=0.0, right_slope=1.0)


@dataclass(frozen=True)
class SmoothingG:
    """Trapezoid ``g``: 1 on ``|x| <= mu``, 0 on ``|x| > 1``, linear in between."""

    mu: float = DEFAULT_MU

    def __post_init__(self):
        if not 0 < self.mu < 1:
            raise ValueError(f"mu must lie in (0, 1), got {self.mu!r}")

    @property
    def lipschitz(self) -> float:
        return 1.0 / (1.0 - self.mu)

    def as_fn(self) -> PiecewiseLinearFn:
        m = self.mu
        return PiecewiseLinearFn.from_knots([-1.0, -m, m, 1.0], [0.0, 1.0, 1.0, 0.0],
                                            range_bounds=(0.0, 1.0))


def g_eval(G: SmoothingG, x):
    a = np.abs(np.asarray(x, dtype=float))
    out = np.clip((1.0 - a) / (1.0 - G.mu), 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def gj_eval(G: SmoothingG, alpha: float, j: int, x):
    """``g_j(x / 2^{j alpha})`` as a function of the raw argument ``x``.

    Zero for ``|x| <= mu 2^{(j-1)alpha}`` and ``|x| > (1+mu) 2^{j alpha}``,
    one on ``(2^{(j-1)alpha}, 2^{j alpha}]``, linear on both flanks.
    """
    if not alpha > 0 or j < 1:
        raise ValueError("need alpha > 0 and j >= 1")
    lo = 2.0 ** ((j - 1) * alpha)
    hi = 2.0 ** (j * alpha)
    mu = G.mu
    a = np.abs(np.asarray(x, dtype=float))
    rise = (a - mu * lo) / ((1.0 - mu) * lo)
    fall = 1.0 + (hi - a) / (mu * hi)  # exactly 1 at |x| = hi
    out = np.clip(np.minimum(rise, fall), 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


SLOWLY_VARYING_KINDS = ("one", "log", "loglog")


@dataclass(frozen=True)
class SlowlyVaryingFn:
    """Closed catalog: ``1``, ``log(e+x)^b`` and ``log(e+log(e+x))``."""

    kind: str = "one"
    b: float = 1.0

    def __post_init__(self):
        if self.kind not in SLOWLY_VARYING_KINDS:
            raise ValueError(f"unknown slowly varying function {self.kind!r}; "
                             f"expected one of {SLOWLY_VARYING_KINDS}")

    def __call__(self, x):
        return slowly_varying_eval(self, x)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "b": self.b} if self.kind == "log" else {"kind": self.kind}

    @classmethod
    def from_dict(cls, doc) -> "SlowlyVaryingFn":
        if isinstance(doc, str):
            return cls(doc)
        return cls(doc.get("kind", "one"), float(doc.get("b", 1.0)))


def slowly_varying_eval(l: SlowlyVaryingFn, x):
    """Value of ``l`` at ``x >= 0`` (the formulas extend continuously to 0)."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("slowly varying functions are evaluated on [0, inf)")
    if l.kind == "one":
        out = np.ones_like(x)
    elif l.kind == "log":
        out = np.log(math.e + x) ** l.b
    else:
        out = np.log(math.e + np.log(math.e + x))
    return float(out) if out.ndim == 0 else out


@dataclass
class Lemma31Report:
    r: float
    k_max: int
    block_sup: list  # (k, sup_{2^k <= x < 2^{k+1}} l(x)/l(2^k))
    ratios: list  # (k, partial sum / (2^{kr} l(2^k)))
    C1: float
    C2: float
    block_sup_converging: bool
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"r": self.r, "k_max": self.k_max, "block_sup": self.block_sup,
                "ratios": self.ratios, "C1": self.C1, "C2": self.C2,
                "block_sup_converging": self.block_sup_converging, "notes": self.notes}


def check_lemma31(l: SlowlyVaryingFn, r: float, k_max: int = 30, grid_points: int = 64,
                  tail_tol: float = 1e-16) -> Lemma31Report:
    """Dyadic-block behaviour of ``l`` and the geometric partial-sum brackets.

    For ``r > 0`` the ratio is ``sum_{j=1}^k 2^{jr} l(2^j) / (2^{kr} l(2^k))``;
    for ``r < 0`` the tail ``sum_{j>=k}`` (truncated once terms drop below
    ``tail_tol`` relative to the running sum). ``C1``/``C2`` are the
    observed min/max of the ratio, not proven constants.
    """
    if r == 0:
        raise ValueError("r must be nonzero")
    if k_max < 10:
        raise ValueError("k_max must be >= 10")
    block = []
    for k in range(1, k_max + 1):
        xs = 2.0**k * (1.0 + np.arange(grid_points) / grid_points)
        block.append((k, float(np.max(l(xs)) / l(2.0**k))))
    devs = [abs(s - 1.0) for _, s in block]
    converging = devs[-1] <= devs[len(devs) // 2] + 1e-15

    ratios = []
    if r > 0:
        total = 0.0
        for k in range(1, k_max + 1):
            total += 2.0 ** (k * r) * l(2.0**k)
            ratios.append((k, total / (2.0 ** (k * r) * l(2.0**k))))
    else:
        for k in range(1, k_max + 1):
            total, j = 0.0, k
            while True:
                term = 2.0 ** (j * r) * l(2.0**j)
                total += term
                if term <= tail_tol * total or j - k > 100_000:
                    break
                j += 1
            ratios.append((k, total / (2.0 ** (k * r) * l(2.0**k))))
    vals = [v for _, v in ratios]
    notes = ["C1/C2 are empirical brackets over k <= k_max"]
    return Lemma31Report(r, k_max, block, ratios, float(min(vals)), float(max(vals)), converging, notes)
