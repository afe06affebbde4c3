"""Closed-form mixing bounds for the edge-flipping chain.

Two families live here.  The lattice bounds need the full subset table
(alternating sum over proper subsets, and the vertex-deleted sum that
dominates it); both are functions of t alone once the graph's edge-count
table is aggregated.  The scalar bounds (sandwich, eigenfunction lower
bound, regular upper bound) are single formulas.

Raw values can exceed 1 for small t and are returned as-is; only the
BoundCurve container clamps below at 0.  Crossing-time searches rely on
the raw values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .chain import as_flip_params
from .errors import ConsistencyError, ValidationError
from .graphs import Graph, min_degree
from .spectrum import SPECTRUM_N_CAP, edges_inside_all

DOMINANCE_N_CAP = 12
DOMINANCE_SLACK = 1e-9


@dataclass(frozen=True)
class BoundCurve:
    """A labeled (t, value) series; values are floored at 0 for display."""

    label: str
    kind: str  # "upper" or "lower"
    points: tuple[tuple[int, float], ...]

    def __post_init__(self):
        if self.kind not in ("upper", "lower"):
            raise ValidationError(f"kind must be upper or lower, got {self.kind!r}")
        clamped = tuple((t, max(0.0, v)) for t, v in self.points)
        object.__setattr__(self, "points", clamped)


@lru_cache(maxsize=32)
def _signed_edge_profile(g: Graph) -> tuple[np.ndarray, np.ndarray]:
    """(edge counts, signed subset counts) aggregated over proper subsets.

    Entry j of the second array is the sum of (-1)^(n-|X|) over proper
    subsets X with exactly j internal edges.  Proper subsets never
    contain all m edges (connectivity), so the full set is simply
    dropped before aggregation.
    """
    if g.n > SPECTRUM_N_CAP:
        raise ValidationError(
            f"subset enumeration limited to n <= {SPECTRUM_N_CAP}, got {g.n}"
        )
    counts = edges_inside_all(g)
    idx = np.arange(1 << g.n, dtype=np.int64)
    popcount = np.zeros(1 << g.n, dtype=np.int64)
    for b in range(g.n):
        popcount += (idx >> b) & 1
    sign = np.where((g.n - popcount) % 2 == 0, 1.0, -1.0)
    sign[-1] = 0.0  # drop X = V
    coef = np.bincount(counts, weights=sign, minlength=g.m + 1)
    nz = np.nonzero(coef)[0]
    return nz, coef[nz]


def bhr_bound(g: Graph, t: int) -> float:
    """Alternating-sum upper bound on worst-start distance at time t.

    Minus the signed sum of (e(X)/m)^t over proper subsets X.  Can
    exceed 1 for small t; tends to 0 as t grows.
    """
    if t < 1:
        raise ValidationError(f"t must be >= 1, got {t}")
    evals, coef = _signed_edge_profile(g)
    return float(-(coef * (evals / g.m) ** t).sum())


def comaximal_bound(g: Graph, t: int) -> float:
    """Sum over vertices of ((m - deg v)/m)^t; dominates bhr_bound."""
    if t < 0:
        raise ValidationError(f"t must be >= 0, got {t}")
    return float(sum(((g.m - d) / g.m) ** t for d in g.degrees))


def bhr_curve(g: Graph, tmax: int) -> BoundCurve:
    return BoundCurve(
        "alternating", "upper", tuple((t, bhr_bound(g, t)) for t in range(1, tmax + 1))
    )


def comaximal_curve(g: Graph, tmax: int) -> BoundCurve:
    return BoundCurve(
        "comaximal",
        "upper",
        tuple((t, comaximal_bound(g, t)) for t in range(1, tmax + 1)),
    )


def bhr_crossing_time(g: Graph, eps: float) -> int:
    """First t >= 1 with bhr_bound(g, t) <= eps.

    The search is capped where even the term-by-term absolute sum has
    decayed below eps, so it always terminates.
    """
    if not (0.0 < eps < 1.0):
        raise ValidationError(f"eps must be in (0, 1), got {eps}")
    evals, coef = _signed_edge_profile(g)
    lam2 = (g.m - min_degree(g)) / g.m
    weight = float(np.abs(coef).sum())
    if lam2 == 0.0:
        cap = 1
    else:
        cap = max(1, math.ceil(math.log(eps / weight) / math.log(lam2)))
    for t in range(1, cap + 1):
        if bhr_bound(g, t) <= eps:
            return t
    raise ConsistencyError(
        f"alternating bound failed to cross {eps} by its decay cap {cap}; bug"
    )


def dominance_check(
    g: Graph, params, tmax: int
) -> list[tuple[int, float, float, float]]:
    """Rows (t, exact worst-start distance, alternating bound, co-maximal).

    Verifies the ordering exact <= alternating <= co-maximal + 1e-9 at
    every t = 1..tmax where the bound being tested is at most 1 (above 1
    a bound on a probability distance says nothing).  Violations raise
    ConsistencyError with the offending t and values.
    """
    from .exactdist import max_tv_curve

    params = as_flip_params(params)
    if g.n > DOMINANCE_N_CAP:
        raise ValidationError(
            f"dominance check limited to n <= {DOMINANCE_N_CAP}, got {g.n}"
        )
    if tmax < 1:
        raise ValidationError(f"tmax must be >= 1, got {tmax}")
    exact = max_tv_curve(g, params, tmax, starts="all")
    rows = []
    for t in range(1, tmax + 1):
        b = bhr_bound(g, t)
        c = comaximal_bound(g, t)
        if b <= 1.0 and exact[t] > b + DOMINANCE_SLACK:
            raise ConsistencyError(
                f"exact distance {exact[t]!r} exceeds alternating bound {b!r} at t={t}"
            )
        if b <= 1.0 and b > c + DOMINANCE_SLACK:
            raise ConsistencyError(
                f"alternating bound {b!r} exceeds co-maximal bound {c!r} at t={t}"
            )
        rows.append((t, float(exact[t]), b, c))
    return rows


def general_sandwich(g: Graph, params, c: float) -> tuple[float, float]:
    """Mixing-time sandwich for the accuracy eps = q*exp(-2c).

    Returns (c*m/delta, (m/delta)*(ln n + 2c - ln q)) with delta the
    minimum degree.  Natural logs throughout.
    """
    params = as_flip_params(params)
    if c <= 0:
        raise ValidationError(f"c must be > 0, got {c}")
    if params.q <= 0:
        raise ValidationError("q must be positive (p < 1) for the sandwich")
    ratio = g.m / min_degree(g)
    lower = c * ratio
    upper = ratio * (math.log(g.n) + 2.0 * c - math.log(params.q))
    return lower, upper


def sandwich_epsilon(params, c: float) -> float:
    """The accuracy the sandwich brackets: q*exp(-2c)."""
    params = as_flip_params(params)
    if c <= 0:
        raise ValidationError(f"c must be > 0, got {c}")
    return params.q * math.exp(-2.0 * c)


def wilson_lower_bound(n: int, params, eps: float) -> float:
    """Eigenfunction lower bound on the complete graph's mixing time.

    Uses the blue-count observable: decay rate 1 - 2/n, starting value
    q*n from all-blue, one-step squared increment at most 4.
    """
    params = as_flip_params(params)
    if n < 3:
        raise ValidationError(f"need n >= 3, got {n}")
    if not (0.0 < eps < 1.0):
        raise ValidationError(f"eps must be in (0, 1), got {eps}")
    if params.q <= 0:
        raise ValidationError("q must be positive (p < 1)")
    lam = 1.0 - 2.0 / n
    r = 4.0
    start = params.q * n
    return (1.0 / (2.0 * math.log(1.0 / lam))) * (
        math.log((1.0 - lam) * start * start / (2.0 * r))
        + math.log((1.0 - eps) / eps)
    )


def regular_upper_bound(n: int, c: float) -> float:
    """n*ln(n)/2 + c*n/2 steps suffice on a regular graph.

    Certified on the spot: n*(1-2/n)^t <= exp(-c) must hold at the
    returned t, which follows from ln(1-x) <= -x.
    """
    if n < 3:
        raise ValidationError(f"need n >= 3, got {n}")
    if c <= 0:
        raise ValidationError(f"c must be > 0, got {c}")
    t = n * math.log(n) / 2.0 + c * n / 2.0
    certificate = n * (1.0 - 2.0 / n) ** t
    if certificate > math.exp(-c) * (1.0 + 1e-9):
        raise ConsistencyError(
            f"certificate failed: n(1-2/n)^t = {certificate!r} > e^-c at t={t!r}"
        )
    return t
