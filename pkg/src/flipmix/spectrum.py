"""Eigenvalues with multiplicities for the edge-flipping chain.

Every vertex subset X contributes the eigenvalue e(X)/m, where e(X)
counts edges with both endpoints inside X.  The number of colorings
constant on each "neighborhood class" of X is 2^(n-|X|); inverting that
count over the subset lattice gives the multiplicity of X, and the
multiplicities sum to 2^n.

Everything here is exact: eigenvalues come out as Fractions and the
inversion is integer arithmetic on a dense 2^n table, so it is limited
to small n by design.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import ConsistencyError, ValidationError
from .graphs import Graph

SPECTRUM_N_CAP = 24
TRACE_CHECK_N_CAP = 12
TRACE_TOLERANCE = 1e-9

# A flat is just a vertex subset, carried around as a bitmask.
Flat = int


@dataclass(frozen=True)
class SpectrumEntry:
    """One subset's contribution: who it is, its eigenvalue, how often."""

    flat: Flat
    eigenvalue: Fraction
    multiplicity: int


def edges_inside(g: Graph, subset: Flat) -> int:
    """Number of edges with both endpoints in the subset bitmask."""
    return sum(1 for u, v in g.edges if (subset >> u) & 1 and (subset >> v) & 1)


def eigenvalue_of_flat(g: Graph, subset: Flat) -> Fraction:
    """Fraction of edges inside the subset; always lands in [0, 1]."""
    if not (0 <= subset < (1 << g.n)):
        raise ValidationError(f"subset {subset} out of range for n={g.n}")
    return Fraction(edges_inside(g, subset), g.m)


def edges_inside_all(g: Graph) -> np.ndarray:
    """edges_inside for every subset at once, one O(2^n) pass per edge."""
    size = 1 << g.n
    idx = np.arange(size, dtype=np.int64)
    count = np.zeros(size, dtype=np.int64)
    for u, v in g.edges:
        count += ((idx >> u) & (idx >> v)) & 1
    return count


def _multiplicities(n: int) -> np.ndarray:
    """m_X = sum over supersets Y of X of (-1)^(|Y|-|X|) 2^(n-|Y|).

    Computed as a superset-sum transform of the signed counts
    (-1)^|Y| 2^(n-|Y|), then re-signed by (-1)^|X|.  Integer throughout.
    """
    size = 1 << n
    idx = np.arange(size, dtype=np.int64)
    popcount = np.zeros(size, dtype=np.int64)
    for b in range(n):
        popcount += (idx >> b) & 1
    f = np.where(popcount % 2 == 0, 1, -1) * (1 << (n - popcount))
    a = f.reshape((2,) * n)
    for axis in range(n):
        sl0 = [slice(None)] * n
        sl1 = [slice(None)] * n
        sl0[axis] = 0
        sl1[axis] = 1
        a[tuple(sl0)] += a[tuple(sl1)]
    f = a.reshape(size)
    return np.where(popcount % 2 == 0, 1, -1) * f


def full_spectrum(g: Graph) -> list[SpectrumEntry]:
    """All 2^n spectrum entries, sorted by eigenvalue descending then flat.

    Raises ConsistencyError if the multiplicities fail to add up to the
    number of colorings; that identity is not an input, it is a check.
    """
    if g.n > SPECTRUM_N_CAP:
        raise ValidationError(f"spectrum limited to n <= {SPECTRUM_N_CAP}, got {g.n}")
    mult = _multiplicities(g.n)
    total = int(mult.sum())
    if total != (1 << g.n):
        raise ConsistencyError(
            f"multiplicities sum to {total}, expected {1 << g.n}; this is a bug"
        )
    counts = edges_inside_all(g)
    entries = [
        SpectrumEntry(x, Fraction(int(counts[x]), g.m), int(mult[x]))
        for x in range(1 << g.n)
    ]
    entries.sort(key=lambda s: (-s.eigenvalue, s.flat))
    return entries


def aggregated_spectrum(g: Graph) -> list[tuple[Fraction, int]]:
    """(eigenvalue, total multiplicity) pairs, descending, zeros dropped.

    Subsets with multiplicity zero contribute nothing; distinct subsets
    sharing an eigenvalue are merged.
    """
    agg: dict[Fraction, int] = {}
    for line in full_spectrum(g):
        if line.multiplicity:
            agg[line.eigenvalue] = agg.get(line.eigenvalue, 0) + line.multiplicity
    return sorted(agg.items(), key=lambda kv: -kv[0])


def spectral_trace(g: Graph, k: int) -> Fraction:
    """sum of multiplicity * eigenvalue^k over all subsets, exact."""
    if k < 0:
        raise ValidationError(f"power must be >= 0, got {k}")
    return sum(
        (Fraction(lam) ** k * mult for lam, mult in aggregated_spectrum(g)),
        start=Fraction(0),
    )


def trace_check(
    g: Graph, params, kmax: int = 4
) -> list[tuple[int, float, float, float]]:
    """(k, spectral trace, matrix trace, residual) rows, k = 1..kmax.

    The matrix side comes from evolving point masses, not from the
    eigenvalue table, so agreement is a real cross-check; a residual
    beyond 1e-9 raises ConsistencyError naming the offending power.
    """
    from .exactdist import trace_powers

    if g.n > TRACE_CHECK_N_CAP:
        raise ValidationError(
            f"trace check limited to n <= {TRACE_CHECK_N_CAP}, got {g.n}"
        )
    matrix = trace_powers(g, params, kmax)
    rows = []
    for k in range(1, kmax + 1):
        spectral = float(spectral_trace(g, k))
        resid = abs(spectral - matrix[k - 1])
        if resid > TRACE_TOLERANCE:
            raise ConsistencyError(
                f"trace mismatch at power k={k}: spectral {spectral!r} vs "
                f"matrix {matrix[k - 1]!r} (residual {resid:.3e})"
            )
        rows.append((k, spectral, matrix[k - 1], resid))
    return rows
