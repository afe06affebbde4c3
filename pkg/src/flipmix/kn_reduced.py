"""Blue-count chain for complete graphs: n+1 states instead of 2^n.

On a complete graph every vertex looks alike, so the number of blue
vertices is itself a Markov chain.  From k blues a step moves by

    -2 w.p. q*k(k-1)/2 / N      -1 w.p. q*k(n-k) / N
    +1 w.p. p*k(n-k) / N        +2 w.p. p*(n-k)(n-k-1)/2 / N

with N = n(n-1)/2, holding otherwise.  Total-variation curves computed
here agree with the full 2^n chain from monochromatic starts, which is
what makes desk-scale cutoff experiments possible.

The mean obeys mean_{t+1} = 2p + (1-2/n)*mean_t, so from zero blues
mean_t = pn*(1 - (1-2/n)^t).  moment_checks verifies that unrolled form
directly against the evolved distribution (in extended precision; the
drift of 64-bit accumulation over n*ln(n) steps is comparable to the
1e-9 budget being certified).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .chain import as_flip_params
from .errors import ConsistencyError, ValidationError

MIXING_EPS_GRID = (0.9, 0.75, 0.5, 0.25, 0.1)


class ReducedKernel:
    """Per-state move probabilities, precomputed once for an (n, p) pair."""

    def __init__(self, n: int, p, dtype=np.float64):
        params = as_flip_params(p)
        if n < 2:
            raise ValidationError(f"need n >= 2, got {n}")
        self.n = n
        self.p = params.p
        scalar = np.dtype(dtype).type
        one = scalar(1.0)
        pp = scalar(params.p)
        qq = one - pp
        k = np.arange(n + 1, dtype=dtype)
        pairs = np.dtype(dtype).type(n * (n - 1) / 2.0)
        same = k * (k - 1) / 2.0
        cross = k * (n - k)
        opp = (n - k) * (n - k - 1) / 2.0
        self.down2 = qq * same / pairs
        self.down1 = qq * cross / pairs
        self.up1 = pp * cross / pairs
        self.up2 = pp * opp / pairs
        self.hold = (pp * same + qq * opp) / pairs
        total = self.down2 + self.down1 + self.hold + self.up1 + self.up2
        if float(np.abs(total - one).max()) > 1e-13:
            raise ConsistencyError("kernel rows do not sum to 1; this is a bug")


def reduced_point_mass(n: int, k: int, dtype=np.float64) -> np.ndarray:
    if not (0 <= k <= n):
        raise ValidationError(f"blue count {k} out of range for n={n}")
    d = np.zeros(n + 1, dtype=dtype)
    d[k] = 1.0
    return d


def reduced_step(kernel: ReducedKernel, dist: np.ndarray) -> np.ndarray:
    """One pentadiagonal application along the last axis."""
    if dist.shape[-1] != kernel.n + 1:
        raise ValidationError(
            f"distribution has length {dist.shape[-1]}, expected {kernel.n + 1}"
        )
    out = kernel.hold * dist
    out[..., :-1] += kernel.down1[1:] * dist[..., 1:]
    out[..., :-2] += kernel.down2[2:] * dist[..., 2:]
    out[..., 1:] += kernel.up1[:-1] * dist[..., :-1]
    out[..., 2:] += kernel.up2[:-2] * dist[..., :-2]
    return out


def _tv_last_axis(a: np.ndarray, b: np.ndarray) -> float:
    return float(0.5 * np.abs(a - b).sum(axis=-1).max())


def reduced_stationary(n: int, p, tol: float = 1e-12) -> np.ndarray:
    """Stationary blue-count law by forward evolution from round(pn).

    Stops once successive steps agree to tol/10 in TV; convergence is
    geometric at rate 1 - 2/n, which caps the loop.  The result's mean
    is then checked against pn (exact for the true stationary law).
    The check budget has two parts: the distance still left when the
    successive-TV test fires (at most (tol/10)(n/2) in TV, so n^2 tol/10
    in the mean) and the float rounding of the evolution itself, which
    accumulates like n*sqrt(steps)*ulp and dwarfs tol for large n.
    """
    params = as_flip_params(p)
    if not (0.0 < tol < 1.0):
        raise ValidationError(f"tol must be in (0, 1), got {tol}")
    kern = ReducedKernel(n, params)
    d = reduced_point_mass(n, round(params.p * n))
    k = np.arange(n + 1, dtype=np.float64)
    cap = math.ceil((n / 2.0) * math.log(20.0 * n / tol)) + 1000
    for t in range(1, cap + 1):
        nxt = reduced_step(kern, d)
        settled = _tv_last_axis(nxt, d) < tol / 10.0
        d = nxt
        if settled:
            budget = (
                n * n * tol / 10.0
                + 32.0 * n * math.sqrt(t) * np.finfo(np.float64).eps
            )
            err = abs(float(d @ k) - params.p * n)
            if err > budget:
                raise ConsistencyError(
                    f"stationary mean off pn by {err:.3e} (budget {budget:.3e}); bug"
                )
            return d
    raise ConsistencyError("reduced stationary iteration failed to settle; bug")


def reduced_tv_curve(
    n: int, p, init_k: int, tmax: int, *, worst: bool = False, tol: float = 1e-12
) -> list[tuple[int, float]]:
    """Distance to stationarity from a monochromatic start, t = 0..tmax.

    With worst=True the curve is the pointwise max over both
    monochromatic starts (init_k still has to be one of them).
    """
    params = as_flip_params(p)
    if init_k not in (0, n):
        raise ValidationError(f"init_k must be 0 or n={n}, got {init_k}")
    if tmax < 0:
        raise ValidationError(f"tmax must be >= 0, got {tmax}")
    pi = reduced_stationary(n, params, tol)
    kern = ReducedKernel(n, params)
    if worst:
        d = np.zeros((2, n + 1))
        d[0, 0] = 1.0
        d[1, n] = 1.0
    else:
        d = reduced_point_mass(n, init_k)
    out = [(0, _tv_last_axis(d, pi))]
    for t in range(1, tmax + 1):
        d = reduced_step(kern, d)
        out.append((t, _tv_last_axis(d, pi)))
    return out


@dataclass(frozen=True)
class CutoffProfile:
    """Distance snapshots around the conjectured threshold, plus t_mix."""

    p: float
    profile: tuple[tuple[int, float, int, float], ...]  # (n, gamma, t, d)
    mixing: tuple[tuple[int, float, int], ...]  # (n, eps, t_mix)


def cutoff_profile(n_list, p, gamma_list) -> CutoffProfile:
    """Evaluate d(round(n*ln(n)/4 + gamma*n)) and t_mix for each n.

    Worst-of-both-monochromatic-starts distances from the reduced chain.
    t_mix is reported for eps in MIXING_EPS_GRID; the search horizon is
    certified by n*(1-2/n)^t, which dominates every reported distance.
    """
    params = as_flip_params(p)
    n_list = [int(n) for n in n_list]
    gamma_list = [float(gm) for gm in gamma_list]
    for n in n_list:
        if n < 16:
            raise ValidationError(f"profile needs n >= 16, got {n}")
    profile = []
    mixing = []
    for n in n_list:
        pi = reduced_stationary(n, params)
        kern = ReducedKernel(n, params)
        targets = {}
        for gm in gamma_list:
            t = max(0, round(n * math.log(n) / 4.0 + gm * n))
            targets.setdefault(t, []).append(gm)
        eps_min = min(MIXING_EPS_GRID)
        horizon = math.ceil((n / 2.0) * (math.log(n) - math.log(eps_min))) + 5
        horizon = max(horizon, max(targets) if targets else 0)
        d = np.zeros((2, n + 1))
        d[0, 0] = 1.0
        d[1, n] = 1.0
        pending = {eps: None for eps in MIXING_EPS_GRID}
        got = {}
        dist = _tv_last_axis(d, pi)
        for eps in MIXING_EPS_GRID:
            if dist <= eps and pending[eps] is None:
                pending[eps] = 0
        if 0 in targets:
            got[0] = dist
        for t in range(1, horizon + 1):
            d = reduced_step(kern, d)
            dist = _tv_last_axis(d, pi)
            if t in targets:
                got[t] = dist
            for eps in MIXING_EPS_GRID:
                if pending[eps] is None and dist <= eps:
                    pending[eps] = t
            if all(v is not None for v in pending.values()) and t >= max(targets, default=0):
                break
        if any(v is None for v in pending.values()):
            raise ConsistencyError(
                f"mixing-time search for n={n} missed its certified horizon; bug"
            )
        for gm in gamma_list:
            t = max(0, round(n * math.log(n) / 4.0 + gm * n))
            profile.append((n, gm, t, got[t]))
        for eps in MIXING_EPS_GRID:
            mixing.append((n, eps, pending[eps]))
    return CutoffProfile(params.p, tuple(profile), tuple(mixing))


def expected_blue(n: int, p, t: int) -> float:
    """Mean blue count after t steps from all-red: pn*(1 - (1-2/n)^t)."""
    params = as_flip_params(p)
    return params.p * n * (1.0 - (1.0 - 2.0 / n) ** t)


@dataclass(frozen=True)
class MomentReport:
    n: int
    p: float
    tmax: int
    max_mean_residual: float
    worst_mean_t: int
    max_variance: float
    variance_cap: float


def moment_checks(n: int, p, tmax: int, *, mean_tol: float = 1e-9) -> MomentReport:
    """March the kernel from all-red checking mean and variance each step.

    The mean must track pn*(1 - (1-2/n)^t) within mean_tol and the
    variance must stay at or below 2n for every t = 1..tmax.  Violations
    raise ConsistencyError naming the first offending step.  Runs in
    extended precision end to end.
    """
    params = as_flip_params(p)
    if n < 4:
        raise ValidationError(f"need n >= 4, got {n}")
    if tmax < 1:
        raise ValidationError(f"tmax must be >= 1, got {tmax}")
    dtype = np.longdouble
    kern = ReducedKernel(n, params, dtype=dtype)
    d = reduced_point_mass(n, 0, dtype=dtype)
    k = np.arange(n + 1, dtype=dtype)
    k2 = k * k
    lam = dtype(1.0) - dtype(2.0) / dtype(n)
    lampow = dtype(1.0)
    pn = dtype(params.p) * dtype(n)
    var_cap = 2.0 * n
    worst_resid, worst_t, worst_var = 0.0, 0, 0.0
    for t in range(1, tmax + 1):
        d = reduced_step(kern, d)
        lampow *= lam
        mean = d @ k
        resid = float(abs(mean - pn * (dtype(1.0) - lampow)))
        var = float(d @ k2 - mean * mean)
        if resid > mean_tol:
            raise ConsistencyError(
                f"mean residual {resid:.3e} exceeds {mean_tol} at t={t} (n={n})"
            )
        if var > var_cap:
            raise ConsistencyError(
                f"variance {var!r} exceeds cap {var_cap} at t={t} (n={n})"
            )
        if resid > worst_resid:
            worst_resid, worst_t = resid, t
        worst_var = max(worst_var, var)
    return MomentReport(n, params.p, tmax, worst_resid, worst_t, worst_var, var_cap)
