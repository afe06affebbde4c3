"""Exact distribution evolution over all 2^n colorings.

Distributions are dense float64 vectors indexed by the coloring bitmask.
One step of the chain sends mass dist[C] to C|mask with weight p/m and to
C&~mask with weight q/m for every edge mask, so a step is a handful of
gathers and scatters: no dense transition matrix is ever materialized.

All total-variation numbers here are exact up to float accumulation; the
stationary vector is certified by driving a geometric upper bound on
worst-start distance below tol/10 before checking successive-step
stagnation.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .chain import all_blue, as_flip_params
from .errors import ConsistencyError, ValidationError
from .graphs import Graph

# Hard ceiling on state-space size for dense work: 2^20 vectors are fine,
# beyond that memory and time both blow up.
STATE_CAP = 20
TRACE_N_CAP = 14
TRACE_K_CAP = 6
ALL_STARTS_CAP = 12

# Precomputed per-edge index blocks are kept only while the total stays
# under ~16M int64 entries; larger graphs recompute them per step.
_STACK_LIMIT = 1 << 21


def _require_cap(g: Graph, cap: int, what: str):
    if g.n > cap:
        raise ValidationError(f"{what} limited to n <= {cap}, got n={g.n}")


def _insert_zero_bit(x: np.ndarray, pos: int) -> np.ndarray:
    low = x & ((1 << pos) - 1)
    return low | ((x >> pos) << (pos + 1))


def _edge_base(n: int, u: int, v: int) -> np.ndarray:
    """All colorings with both endpoints red, enumerated once per edge."""
    b = np.arange(1 << (n - 2), dtype=np.int64)
    return _insert_zero_bit(_insert_zero_bit(b, u), v)


class TransitionKernel:
    """Reusable gather/scatter plan for one-step evolution on a graph."""

    def __init__(self, g: Graph):
        self.n = g.n
        self.m = g.m
        self.size = 1 << g.n
        self._bits = [((1 << u), (1 << v), (1 << u) | (1 << v)) for u, v in g.edges]
        if g.m * (1 << (g.n - 2)) <= _STACK_LIMIT:
            bases = [_edge_base(g.n, u, v) for u, v in g.edges]
            self._bases = bases
            # Flattened across edges for the 1-D bincount fast path.
            self._b0 = np.concatenate(bases)
            self._b1 = np.concatenate([b | bu for b, (bu, _, _) in zip(bases, self._bits)])
            self._b2 = np.concatenate([b | bv for b, (_, bv, _) in zip(bases, self._bits)])
            self._b3 = np.concatenate([b | mk for b, (_, _, mk) in zip(bases, self._bits)])
        else:
            self._bases = None
            self._b0 = None

    def apply(self, dist: np.ndarray, p: float) -> np.ndarray:
        """One step; works on the last axis, so batches of rows evolve too."""
        m = self.m
        wb, wr = p / m, (1.0 - p) / m
        if dist.ndim == 1 and self._b0 is not None:
            gathered = dist[self._b0] + dist[self._b1] + dist[self._b2] + dist[self._b3]
            out = wr * np.bincount(self._b0, weights=gathered, minlength=self.size)
            out += wb * np.bincount(self._b3, weights=gathered, minlength=self.size)
            return out
        out = np.zeros_like(dist)
        for i, (bu, bv, mask) in enumerate(self._bits):
            if self._bases is not None:
                base = self._bases[i]
            else:
                u = bu.bit_length() - 1
                v = bv.bit_length() - 1
                base = _edge_base(self.n, u, v)
            tot = dist[..., base] + dist[..., base | bu]
            tot += dist[..., base | bv] + dist[..., base | mask]
            # target indices are distinct within one edge, so fancy += is safe
            out[..., base | mask] += wb * tot
            out[..., base] += wr * tot
        return out


@lru_cache(maxsize=16)
def _kernel(g: Graph) -> TransitionKernel:
    return TransitionKernel(g)


def point_mass(g: Graph, coloring: int) -> np.ndarray:
    if not (0 <= coloring < (1 << g.n)):
        raise ValidationError(f"coloring {coloring} out of range for n={g.n}")
    d = np.zeros(1 << g.n)
    d[coloring] = 1.0
    return d


def evolve(g: Graph, params, dist: np.ndarray, *, cap: int = STATE_CAP) -> np.ndarray:
    """Push a distribution through one step of the chain."""
    params = as_flip_params(params)
    _require_cap(g, cap, "exact evolution")
    dist = np.asarray(dist, dtype=np.float64)
    if dist.shape[-1] != (1 << g.n):
        raise ValidationError(
            f"distribution has length {dist.shape[-1]}, expected {1 << g.n}"
        )
    return _kernel(g).apply(dist, params.p)


def tv(a: np.ndarray, b: np.ndarray) -> float:
    """Total variation distance, one half the L1 difference."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValidationError(f"shape mismatch {a.shape} vs {b.shape}")
    return 0.5 * float(np.abs(a - b).sum())


def _comaximal_horizon(g: Graph, bound: float) -> int:
    """Steps after which n * lam_max^t <= bound, certifying worst-start TV."""
    lam = max((g.m - d) / g.m for d in g.degrees)
    if lam == 0.0:
        return 1
    return max(1, math.ceil(math.log(bound / g.n) / math.log(lam)))


def stationary(
    g: Graph, params, tol: float = 1e-12, *, cap: int = STATE_CAP
) -> np.ndarray:
    """Stationary distribution by forward evolution from all-blue.

    Runs the certified horizon for worst-start TV <= tol/10, then keeps
    stepping until two successive iterates agree to tol/10 in TV.
    """
    params = as_flip_params(params)
    if not (0.0 < tol < 1.0):
        raise ValidationError(f"tol must be in (0, 1), got {tol}")
    _require_cap(g, cap, "stationary computation")
    kern = _kernel(g)
    d = point_mass(g, all_blue(g.n))
    horizon = _comaximal_horizon(g, tol / 10.0)
    for _ in range(horizon):
        d = kern.apply(d, params.p)
    for _ in range(2 * horizon + 1000):
        nxt = kern.apply(d, params.p)
        if tv(nxt, d) < tol / 10.0:
            return nxt
        d = nxt
    raise ConsistencyError("stationary iteration failed to settle; this is a bug")


def tv_curve(
    g: Graph, params, init: int, tmax: int, *, tol: float = 1e-12, cap: int = STATE_CAP
) -> list[tuple[int, float]]:
    """[(t, distance-to-stationary)] for t = 0..tmax from a point mass."""
    params = as_flip_params(params)
    if tmax < 0:
        raise ValidationError(f"tmax must be >= 0, got {tmax}")
    pi = stationary(g, params, tol, cap=cap)
    kern = _kernel(g)
    d = point_mass(g, init)
    out = [(0, tv(d, pi))]
    for t in range(1, tmax + 1):
        d = kern.apply(d, params.p)
        out.append((t, tv(d, pi)))
    return out


def _start_block(g: Graph, starts: str) -> np.ndarray:
    n = g.n
    if starts == "monochromatic":
        block = np.zeros((2, 1 << n))
        block[0, 0] = 1.0
        block[1, all_blue(n)] = 1.0
        return block
    if starts == "all":
        _require_cap(g, ALL_STARTS_CAP, "all-starts evolution")
        return np.eye(1 << n)
    raise ValidationError(f"starts must be 'monochromatic' or 'all', got {starts!r}")


def max_tv_curve(
    g: Graph,
    params,
    tmax: int,
    *,
    starts: str = "monochromatic",
    tol: float = 1e-12,
    cap: int = STATE_CAP,
) -> np.ndarray:
    """Worst distance to stationarity over the chosen start set, t = 0..tmax."""
    params = as_flip_params(params)
    _require_cap(g, cap, "exact evolution")
    pi = stationary(g, params, tol, cap=cap)
    kern = _kernel(g)
    block = _start_block(g, starts)
    out = np.empty(tmax + 1)
    out[0] = 0.5 * np.abs(block - pi).sum(axis=1).max()
    for t in range(1, tmax + 1):
        block = kern.apply(block, params.p)
        out[t] = 0.5 * np.abs(block - pi).sum(axis=1).max()
    return out


def mixing_time(
    g: Graph,
    params,
    eps: float,
    *,
    starts: str = "monochromatic",
    tol: float = 1e-12,
    cap: int = STATE_CAP,
) -> int:
    """Smallest t with worst-start distance <= eps.

    Guaranteed to terminate: the co-maximal eigenvalue bound gives an a
    priori step count at which the distance must have crossed eps.
    """
    params = as_flip_params(params)
    if not (0.0 < eps <= 1.0):
        raise ValidationError(f"eps must be in (0, 1], got {eps}")
    _require_cap(g, cap, "exact evolution")
    pi = stationary(g, params, tol, cap=cap)
    kern = _kernel(g)
    block = _start_block(g, starts)
    ceiling = _comaximal_horizon(g, eps) + 5
    d = 0.5 * np.abs(block - pi).sum(axis=1).max()
    if d <= eps:
        return 0
    for t in range(1, ceiling + 1):
        block = kern.apply(block, params.p)
        d = 0.5 * np.abs(block - pi).sum(axis=1).max()
        if d <= eps:
            return t
    raise ConsistencyError(
        f"distance never crossed eps={eps} within the certified horizon; bug"
    )


def trace_powers(g: Graph, params, kmax: int) -> list[float]:
    """trace(P^k) for k = 1..kmax by evolving every point mass.

    Row sums are streamed in chunks so nothing quadratic in the state
    space is held beyond one chunk of rows at a time.
    """
    params = as_flip_params(params)
    if not (1 <= kmax <= TRACE_K_CAP):
        raise ValidationError(f"kmax must be in 1..{TRACE_K_CAP}, got {kmax}")
    _require_cap(g, TRACE_N_CAP, "trace computation")
    kern = _kernel(g)
    size = 1 << g.n
    traces = np.zeros(kmax)
    chunk = min(size, 256)
    for lo in range(0, size, chunk):
        hi = min(size, lo + chunk)
        states = np.arange(lo, hi)
        block = np.zeros((hi - lo, size))
        block[np.arange(hi - lo), states] = 1.0
        for k in range(1, kmax + 1):
            block = kern.apply(block, params.p)
            traces[k - 1] += block[np.arange(hi - lo), states].sum()
    return [float(x) for x in traces]


def conditional_expectation(g: Graph, params, f: np.ndarray) -> np.ndarray:
    """(Pf)(C) = E[f(X_1) | X_0 = C] for a function f on colorings."""
    params = as_flip_params(params)
    f = np.asarray(f, dtype=np.float64)
    if f.shape != (1 << g.n,):
        raise ValidationError(f"f has shape {f.shape}, expected ({1 << g.n},)")
    idx = np.arange(1 << g.n)
    out = np.zeros_like(f)
    wb, wr = params.p / g.m, params.q / g.m
    for u, v in g.edges:
        mask = (1 << u) | (1 << v)
        out += wb * f[idx | mask] + wr * f[idx & ~mask]
    return out


def eigenfunction_residuals(g: Graph, params) -> list[tuple[int, float]]:
    """Per-vertex residual of the one-step identity P(phi_i) = lam_i phi_i.

    phi_i is q on colorings where i is blue and -p elsewhere, and lam_i is
    the fraction of edges avoiding i.
    """
    params = as_flip_params(params)
    idx = np.arange(1 << g.n)
    out = []
    for i in range(g.n):
        f = np.where((idx >> i) & 1 == 1, params.q, -params.p)
        lam = (g.m - g.degrees[i]) / g.m
        resid = float(np.abs(conditional_expectation(g, params, f) - lam * f).max())
        out.append((i, resid))
    return out
