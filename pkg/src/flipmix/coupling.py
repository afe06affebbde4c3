"""Three-stage coupling of two edge-flipping chains on a complete graph.

Chain X starts all-red, chain Y all-blue; only the blue counts W and Z
are tracked (exchangeability makes the pair (W, Z) Markov).  The gap
D = Z - W shrinks in three stages:

  stage 1: both chains take the same move.  A uniform vertex pair falls
    into one of six classes (both-disagree, disagree+agree-blue,
    disagree+agree-red, both-agree-blue, agree-blue+agree-red,
    both-agree-red) and each class prescribes how many of the chosen
    vertices were blue in X and in Y.  D never grows; the stage ends
    once D <= ceil(sqrt(n)).
  stages 2 and 3: the chains draw independent pairs but share the color
    coin, so the coin's contribution cancels out of D.  Stage 2 ends on
    D in {-1, 0, 1}, stage 3 on D = 0.  After that the chains move in
    lockstep and the counts agree forever.

Draw discipline: every step of every stage consumes exactly two bounded
integers and one coin from a replica's pair of substreams (stage 1
ignores the second integer).  That fixed shape is what lets the
vectorized replica engine and the one-step functions below produce
bit-identical trajectories from the same seeds.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .chain import RngStream, all_blue, as_flip_params, blue_count
from .errors import ConsistencyError, ValidationError

FULL_COLORING_CAP = 20
COUPLED = "coupled"

# Per-class blue-vertex counts of the chosen pair, in X and in Y, for the
# six vertex-pair classes in the order listed in the module docstring.
_CLASS_BLUE_X = (0, 1, 0, 2, 1, 0)
_CLASS_BLUE_Y = (2, 2, 1, 2, 1, 0)

_BUFFER_STEPS = 256
_CHUNK_REPLICAS = 4096


def agreement_threshold(n: int) -> int:
    """ceil(sqrt(n)): the gap at which stage 1 hands over to stage 2."""
    return math.isqrt(n - 1) + 1


def _pair_count(n: int) -> int:
    return n * (n - 1) // 2


@dataclass(frozen=True)
class CoupledState:
    """Blue counts of both chains plus the current coupling stage."""

    W: int
    Z: int
    stage: int | str  # 1, 2, 3, or "coupled"

    @property
    def delta(self) -> int:
        return self.Z - self.W


@dataclass(frozen=True)
class CouplingTrace:
    """Stage lengths of one coupling run; tau is their total."""

    tau1: int
    tau2: int
    tau3: int
    delta_history: tuple[int, ...] | None = None

    @property
    def tau(self) -> int:
        return self.tau1 + self.tau2 + self.tau3


class ReplicaRng:
    """Two substreams (bounded integers, coins) for one replica.

    Step functions always pull two integers then one coin; keeping the
    kinds on separate substreams is what allows the replica engine to
    fetch whole buffers of each without changing any draw.
    """

    def __init__(self, base_seed: int, replica_index: int = 0):
        ints_ss, coins_ss = np.random.SeedSequence(
            (int(base_seed), int(replica_index))
        ).spawn(2)
        self._ints = RngStream(ints_ss)
        self._coins = RngStream(coins_ss)

    def integer(self, bound: int) -> int:
        return self._ints.integer(bound)

    def coin(self, p: float) -> bool:
        return self._coins.coin(p)


def initial_state(n: int) -> CoupledState:
    if n < 4:
        raise ValidationError(f"coupling needs n >= 4, got {n}")
    return CoupledState(0, n, 1)


def stage1_step(n: int, p, state: CoupledState, rng) -> CoupledState:
    """One identical-move step; hands over to stage 2 at the threshold."""
    params = as_flip_params(p)
    if state.stage != 1:
        raise ValidationError(f"stage1_step needs stage 1, got {state.stage!r}")
    npairs = _pair_count(n)
    u = rng.integer(npairs)
    rng.integer(npairs)  # keep the per-step draw shape uniform across stages
    b = 2 if rng.coin(params.p) else 0
    d, w = state.delta, state.W
    r = n - d - w
    c1 = d * (d - 1) // 2
    c2 = c1 + d * w
    c3 = c2 + d * r
    c4 = c3 + w * (w - 1) // 2
    c5 = c4 + w * r
    code = (u >= c1) + (u >= c2) + (u >= c3) + (u >= c4) + (u >= c5)
    new_w = w - _CLASS_BLUE_X[code] + b
    new_z = state.Z - _CLASS_BLUE_Y[code] + b
    stage = 2 if new_z - new_w <= agreement_threshold(n) else 1
    return CoupledState(new_w, new_z, stage)


def _pair_blue_count(u: int, count: int, n: int) -> int:
    """Blue vertices among a uniform pair, decoded from one integer draw."""
    c1 = count * (count - 1) // 2
    c2 = c1 + count * (n - count)
    return 2 - ((u >= c1) + (u >= c2))


def stage2or3_step(n: int, p, state: CoupledState, rng) -> CoupledState:
    """One independent-pairs step with a shared coin."""
    params = as_flip_params(p)
    if state.stage not in (2, 3):
        raise ValidationError(f"stage2or3_step needs stage 2 or 3, got {state.stage!r}")
    npairs = _pair_count(n)
    u1 = rng.integer(npairs)
    u2 = rng.integer(npairs)
    b = 2 if rng.coin(params.p) else 0
    new_w = state.W - _pair_blue_count(u1, state.W, n) + b
    new_z = state.Z - _pair_blue_count(u2, state.Z, n) + b
    d = new_z - new_w
    stage = state.stage
    if stage == 2 and -1 <= d <= 1:
        stage = 3
    if stage == 3 and d == 0:
        stage = COUPLED
    return CoupledState(new_w, new_z, stage)


def _settle(state: CoupledState, n: int) -> CoupledState:
    """Zero-step stage promotions when a boundary is already satisfied."""
    if state.stage == 1 and state.delta <= agreement_threshold(n):
        state = replace(state, stage=2)
    if state.stage == 2 and -1 <= state.delta <= 1:
        state = replace(state, stage=3)
    if state.stage == 3 and state.delta == 0:
        state = replace(state, stage=COUPLED)
    return state


def _step_cap(n: int) -> int:
    return math.ceil(0.25 * n * math.log(n)) + 1000 * n + 10000


def coupling_time(
    n: int, p, seed: int, *, record_history: bool = False, full_colorings: bool = False
) -> CouplingTrace:
    """Run one coupling to completion; bit-for-bit reproducible per seed.

    The result equals replica 0 of tail_estimate at base_seed=seed.
    With full_colorings=True the chains are simulated as actual bitmask
    colorings (n <= 20) instead of counts; stage boundaries are still
    read off the blue counts, so both modes sample the same stage-length
    law, though not the same per-seed trajectory.
    """
    params = as_flip_params(p)
    if full_colorings:
        return _coupling_time_full(n, params, seed, record_history)
    state = initial_state(n)
    rng = ReplicaRng(seed, 0)
    state = _settle(state, n)
    history = [state.delta] if record_history else None
    ends = {}  # stage -> absolute step count when it finished
    for s in (2, 3, COUPLED):
        if _stage_rank(state.stage) >= _stage_rank(s):
            ends[s] = 0
    t = 0
    cap = _step_cap(n)
    while state.stage != COUPLED:
        if t >= cap:
            raise ConsistencyError(f"coupling ran past {cap} steps (n={n}); bug")
        if state.stage == 1:
            state = stage1_step(n, params, state, rng)
        else:
            state = stage2or3_step(n, params, state, rng)
        state = _settle(state, n)
        t += 1
        if history is not None:
            history.append(state.delta)
        for s in (2, 3, COUPLED):
            if s not in ends and _stage_rank(state.stage) >= _stage_rank(s):
                ends[s] = t
    tau1 = ends[2]
    tau2 = ends[3] - ends[2]
    tau3 = ends[COUPLED] - ends[3]
    return CouplingTrace(tau1, tau2, tau3, tuple(history) if history else None)


def _stage_rank(stage) -> int:
    return 4 if stage == COUPLED else int(stage)


def _unrank_pair(u: int, n: int) -> tuple[int, int]:
    """Pair with index u in the lexicographic list of all C(n,2) pairs."""
    a = 0
    while u >= n - 1 - a:
        u -= n - 1 - a
        a += 1
    return a, a + 1 + u


def _coupling_time_full(n, params, seed, record_history) -> CouplingTrace:
    if n > FULL_COLORING_CAP:
        raise ValidationError(
            f"full-coloring mode limited to n <= {FULL_COLORING_CAP}, got {n}"
        )
    if n < 4:
        raise ValidationError(f"coupling needs n >= 4, got {n}")
    npairs = _pair_count(n)
    rng = ReplicaRng(seed, 0)
    x, y = 0, all_blue(n)
    thresh = agreement_threshold(n)
    stage = 1
    ends = {}
    t = 0
    cap = _step_cap(n)
    history = [blue_count(y) - blue_count(x)] if record_history else None
    while stage != COUPLED:
        if t >= cap:
            raise ConsistencyError(f"coupling ran past {cap} steps (n={n}); bug")
        u1 = rng.integer(npairs)
        u2 = rng.integer(npairs)
        blue = rng.coin(params.p)
        pu, pv = _unrank_pair(u1, n)
        mask1 = (1 << pu) | (1 << pv)
        if stage == 1:
            x = (x | mask1) if blue else (x & ~mask1)
            y = (y | mask1) if blue else (y & ~mask1)
        else:
            qu, qv = _unrank_pair(u2, n)
            mask2 = (1 << qu) | (1 << qv)
            x = (x | mask1) if blue else (x & ~mask1)
            y = (y | mask2) if blue else (y & ~mask2)
        t += 1
        d = blue_count(y) - blue_count(x)
        if history is not None:
            history.append(d)
        if stage == 1 and d <= thresh:
            stage = 2
            ends[2] = t
        if stage == 2 and -1 <= d <= 1:
            stage = 3
            ends[3] = t
        if stage == 3 and d == 0:
            stage = COUPLED
            ends[COUPLED] = t
    tau1 = ends[2]
    tau2 = ends[3] - ends[2]
    tau3 = ends[COUPLED] - ends[3]
    return CouplingTrace(tau1, tau2, tau3, tuple(history) if history else None)


def _run_chunk(n: int, p: float, base_seed: int, lo: int, hi: int) -> np.ndarray:
    """Stage lengths for replicas lo..hi-1; rows are (tau1, tau2, tau3)."""
    npairs = _pair_count(n)
    thresh = agreement_threshold(n)
    count = hi - lo
    gens_int = []
    gens_coin = []
    for rep in range(lo, hi):
        ints_ss, coins_ss = np.random.SeedSequence((int(base_seed), rep)).spawn(2)
        gens_int.append(np.random.Generator(np.random.Philox(ints_ss)))
        gens_coin.append(np.random.Generator(np.random.Philox(coins_ss)))

    w = np.zeros(count, dtype=np.int64)
    z = np.full(count, n, dtype=np.int64)
    stage = np.ones(count, dtype=np.int64)
    ends = np.full((3, count), -1, dtype=np.int64)  # rows: stage2, stage3, coupled
    orig = np.arange(count)
    ix = np.array(_CLASS_BLUE_X, dtype=np.int64)
    iy = np.array(_CLASS_BLUE_Y, dtype=np.int64)
    cap = _step_cap(n)
    t = 0
    while orig.size:
        ints = np.empty((orig.size, 2 * _BUFFER_STEPS), dtype=np.int64)
        coins = np.empty((orig.size, _BUFFER_STEPS), dtype=np.float64)
        for row, rep in enumerate(orig):
            ints[row] = gens_int[rep].integers(0, npairs, size=2 * _BUFFER_STEPS)
            coins[row] = gens_coin[rep].random(_BUFFER_STEPS)
        for c in range(_BUFFER_STEPS):
            if t >= cap:
                raise ConsistencyError(f"coupling ran past {cap} steps (n={n}); bug")
            u1 = ints[:, 2 * c]
            u2 = ints[:, 2 * c + 1]
            b = np.where(coins[:, c] < p, 2, 0)
            cw = w[orig]
            cz = z[orig]
            cs = stage[orig]
            one = cs == 1
            dlt = cz - cw
            # stage 1: six-class decomposition of the shared pair
            r = n - dlt - cw
            c1 = dlt * (dlt - 1) // 2
            c2 = c1 + dlt * cw
            c3 = c2 + dlt * r
            c4 = c3 + cw * (cw - 1) // 2
            c5 = c4 + cw * r
            code = (
                (u1 >= c1).astype(np.int64)
                + (u1 >= c2)
                + (u1 >= c3)
                + (u1 >= c4)
                + (u1 >= c5)
            )
            w1 = cw - ix[code] + b
            z1 = cz - iy[code] + b
            # stages 2/3: independent pairs, shared coin
            bx = 2 - (
                (u1 >= cw * (cw - 1) // 2).astype(np.int64)
                + (u1 >= cw * (cw - 1) // 2 + cw * (n - cw))
            )
            bz = 2 - (
                (u2 >= cz * (cz - 1) // 2).astype(np.int64)
                + (u2 >= cz * (cz - 1) // 2 + cz * (n - cz))
            )
            w2 = cw - bx + b
            z2 = cz - bz + b
            nw = np.where(one, w1, w2)
            nz = np.where(one, z1, z2)
            nd = nz - nw
            t += 1
            # cascade of stage promotions at time t
            ns = cs.copy()
            hit1 = one & (nd <= thresh)
            ns[hit1] = 2
            ends[0, orig[hit1]] = t
            in2 = ns == 2
            hit2 = in2 & (np.abs(nd) <= 1)
            ns[hit2] = 3
            ends[1, orig[hit2]] = t
            in3 = ns == 3
            hit3 = in3 & (nd == 0)
            ns[hit3] = 4
            ends[2, orig[hit3]] = t
            w[orig] = nw
            z[orig] = nz
            stage[orig] = ns
            if hit3.any():
                keep = ns != 4
                orig = orig[keep]
                ints = ints[keep]
                coins = coins[keep]
                if not orig.size:
                    break
    tau1 = ends[0]
    tau2 = ends[1] - ends[0]
    tau3 = ends[2] - ends[1]
    return np.stack([tau1, tau2, tau3], axis=1)


def run_replicas(
    n: int, p, replicas: int, base_seed: int, *, threads: int = 1
) -> np.ndarray:
    """(replicas, 3) array of stage lengths; row i is replica i.

    Results depend only on (n, p, base_seed, replica index), never on
    chunking or thread count.
    """
    params = as_flip_params(p)
    if n < 4:
        raise ValidationError(f"coupling needs n >= 4, got {n}")
    if replicas < 1:
        raise ValidationError(f"need replicas >= 1, got {replicas}")
    if threads < 1:
        raise ValidationError(f"need threads >= 1, got {threads}")
    spans = [
        (lo, min(lo + _CHUNK_REPLICAS, replicas))
        for lo in range(0, replicas, _CHUNK_REPLICAS)
    ]
    if threads == 1 or len(spans) == 1:
        parts = [_run_chunk(n, params.p, base_seed, lo, hi) for lo, hi in spans]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(
                pool.map(lambda s: _run_chunk(n, params.p, base_seed, *s), spans)
            )
    return np.concatenate(parts, axis=0)


def tail_estimate(
    n: int, p, replicas: int, t_list, base_seed: int, *, threads: int = 1
) -> list[tuple[int, float, float]]:
    """Rows (t, empirical P(tau > t), binomial standard error)."""
    if replicas < 100:
        raise ValidationError(f"need replicas >= 100, got {replicas}")
    taus = run_replicas(n, p, replicas, base_seed, threads=threads).sum(axis=1)
    rows = []
    for t in t_list:
        t = int(t)
        if t < 0:
            raise ValidationError(f"tail times must be >= 0, got {t}")
        phat = float((taus > t).mean())
        stderr = math.sqrt(phat * (1.0 - phat) / replicas)
        rows.append((t, phat, stderr))
    return rows


def stage1_delta_law(n: int, delta: int) -> tuple[float, float, float]:
    """Exact (P(-2), P(-1), P(hold)) for the stage-1 gap process."""
    if not (0 <= delta <= n):
        raise ValidationError(f"delta {delta} out of range for n={n}")
    npairs = _pair_count(n)
    p2 = delta * (delta - 1) / 2.0 / npairs
    p1 = delta * (n - delta) / npairs
    return p2, p1, 1.0 - p2 - p1


def stage2_increment_law(n: int, w: int, z: int) -> np.ndarray:
    """Exact law of the stage-2/3 gap increment, indexed -2..+2 by d+2.

    The shared coin cancels out of Z - W, so the law does not involve p:
    it is the difference of the two chains' independent pair-blue-counts.
    """
    if not (0 <= w <= n and 0 <= z <= n):
        raise ValidationError(f"counts ({w}, {z}) out of range for n={n}")
    npairs = _pair_count(n)

    def pair_law(count):
        two = count * (count - 1) / 2.0 / npairs
        one = count * (n - count) / npairs
        return np.array([1.0 - two - one, one, two])  # index = blue vertices

    px = pair_law(w)
    pz = pair_law(z)
    out = np.zeros(5)
    for i in range(3):
        for j in range(3):
            out[i - j + 2] += px[i] * pz[j]
    return out


def lazy_walk_hitting(
    n: int, r: float, start: int, seed: int, *, max_steps: int | None = None
) -> int:
    """First time the comparison walk from start lands in {-1, 0, 1}.

    The walk moves +/-2 w.p. r^2(1-r)^2 each and +/-1 w.p.
    2r(1-r)(r^2+(1-r)^2) each, holding otherwise.  If max_steps is hit
    first, max_steps is returned (useful for capped-mean estimates; the
    raw hitting time is heavy-tailed).
    """
    r = float(r)
    if not (0.0 < r < 1.0):
        raise ValidationError(f"r must be in (0, 1), got {r}")
    if n < 1:
        raise ValidationError(f"need n >= 1, got {n}")
    pos = int(start)
    if -1 <= pos <= 1:
        return 0
    p2 = r * r * (1.0 - r) * (1.0 - r)
    p1 = 2.0 * r * (1.0 - r) * (r * r + (1.0 - r) * (1.0 - r))
    rng = RngStream((int(seed), int(n), int(start)))
    t = 0
    while True:
        if max_steps is not None and t >= max_steps:
            return max_steps
        u = rng.uniform()
        if u < p2:
            pos += 2
        elif u < p2 + p1:
            pos += 1
        elif u < 2.0 * p2 + p1:
            pos -= 2
        elif u < 2.0 * p2 + 2.0 * p1:
            pos -= 1
        t += 1
        if -1 <= pos <= 1:
            return t
