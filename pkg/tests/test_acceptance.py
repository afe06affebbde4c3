"""End-to-end acceptance checks, one per shipped guarantee.

Each test prints a single PASS/FAIL line; run with ``pytest -s`` to see
them all.  Tolerances are part of the contract and are pinned here, not
imported from the library.
"""

import math
from fractions import Fraction

import numpy as np

from flipmix.bounds import (
    bhr_bound,
    bhr_crossing_time,
    comaximal_bound,
    general_sandwich,
    sandwich_epsilon,
    wilson_lower_bound,
)
from flipmix.chain import all_blue
from flipmix.cli import run
from flipmix.coupling import run_replicas
from flipmix.exactdist import (
    eigenfunction_residuals,
    evolve,
    max_tv_curve,
    mixing_time,
    point_mass,
    stationary,
    trace_powers,
    tv,
)
from flipmix.graphs import complete_graph
from flipmix.kn_reduced import cutoff_profile, moment_checks, reduced_tv_curve
from flipmix.spectrum import aggregated_spectrum, spectral_trace

TRACE_TOL = 1e-9
DOMINANCE_TOL = 1e-9
REDUCTION_TOL = 1e-9
MOMENT_TOL = 1e-9
EIGENFUNCTION_TOL = 1e-12
P_GRID = (0.3, 0.5)


def _verdict(label: str, ok: bool, detail: str) -> None:
    print(f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}")
    assert ok, f"{label}: {detail}"


def test_01_spectral_trace_identity(suite):
    worst = 0.0
    for _, g in suite:
        spectral = [float(spectral_trace(g, k)) for k in range(1, 5)]
        for p in P_GRID:
            matrix = trace_powers(g, p, 4)
            for s, m in zip(spectral, matrix):
                worst = max(worst, abs(s - m))
    _verdict(
        "01 eigenvalue multiplicities reproduce matrix traces",
        worst <= TRACE_TOL,
        f"max |spectral - matrix| = {worst:.3e} over suite, p in {P_GRID}, k = 1..4",
    )


def test_02_aggregated_spectra_match_closed_forms():
    ok = True
    notes = []
    for n in range(2, 9):
        expect = {}
        npairs = n * (n - 1) // 2
        for k in range(n + 1):
            lam = Fraction(k * (k - 1) // 2, npairs)
            expect[lam] = expect.get(lam, 0) + math.comb(n, k)
        got = dict(aggregated_spectrum(complete_graph(n)))
        if got != expect:
            ok = False
            notes.append(f"complete n={n}")
    from flipmix.graphs import complete_bipartite_graph

    expect = {}
    for k in range(3):
        for j in range(4):
            lam = Fraction(k * j, 6)
            expect[lam] = expect.get(lam, 0) + math.comb(2, k) * math.comb(3, j)
    got = dict(aggregated_spectrum(complete_bipartite_graph(2, 3)))
    if got != expect:
        ok = False
        notes.append("bipartite 2,3")
    _verdict(
        "02 complete and complete-bipartite spectra match closed forms",
        ok,
        "exact rational agreement, n = 2..8 and (2,3)"
        + (f"; mismatches: {notes}" if notes else ""),
    )


def test_03_bound_dominance(suite):
    worst_pair = None
    ok = True
    for name, g in suite:
        bh = [bhr_bound(g, t) for t in range(1, 101)]
        cm = [comaximal_bound(g, t) for t in range(1, 101)]
        for p in P_GRID:
            exact = max_tv_curve(g, p, 100, starts="all")
            for t in range(1, 101):
                b, c = bh[t - 1], cm[t - 1]
                if b <= 1.0 and exact[t] > b + DOMINANCE_TOL:
                    ok = False
                    worst_pair = (name, p, t, "exact>alternating")
                if b <= 1.0 and b > c + DOMINANCE_TOL:
                    ok = False
                    worst_pair = (name, p, t, "alternating>comaximal")
    _verdict(
        "03 exact distance <= alternating bound <= co-maximal bound",
        ok,
        "t = 1..100, full suite, both p" + (f"; first break {worst_pair}" if worst_pair else ""),
    )


def test_04_blue_count_reduction_identity():
    worst = 0.0
    for n in range(4, 11):
        g = complete_graph(n)
        for p in P_GRID:
            pi = stationary(g, p)
            for start, init_k in ((0, 0), (all_blue(n), n)):
                reduced = reduced_tv_curve(n, p, init_k, 200)
                dist = point_mass(g, start)
                worst = max(worst, abs(tv(dist, pi) - reduced[0][1]))
                for t in range(1, 201):
                    dist = evolve(g, p, dist)
                    worst = max(worst, abs(tv(dist, pi) - reduced[t][1]))
    _verdict(
        "04 blue-count chain reproduces full-chain distances",
        worst <= REDUCTION_TOL,
        f"max |reduced - full| = {worst:.3e}, complete graphs n = 4..10, t <= 200",
    )


def test_05_mixing_time_sandwich(suite):
    ok = True
    notes = []
    for n in (8, 10, 12):
        g = complete_graph(n)
        for eps in (0.25, 0.1):
            lower = wilson_lower_bound(n, 0.5, eps)
            upper = bhr_crossing_time(g, eps)
            curve = reduced_tv_curve(n, 0.5, 0, upper, worst=True)
            t_mix = next((t for t, d in curve if d <= eps), None)
            if t_mix is None or not (lower <= t_mix <= upper):
                ok = False
                notes.append(f"complete n={n} eps={eps}: {lower} <= {t_mix} <= {upper}")
    for name, g in suite:
        for p in P_GRID:
            lower, upper = general_sandwich(g, p, 1.0)
            eps = sandwich_epsilon(p, 1.0)
            t_mix = mixing_time(g, p, eps, starts="all")
            if not (lower <= t_mix <= upper):
                ok = False
                notes.append(f"{name} p={p}: {lower:.2f} <= {t_mix} <= {upper:.2f}")
    _verdict(
        "05 mixing time sits inside both sandwiches",
        ok,
        "eigenfunction/crossing bracket on complete graphs and general "
        "bracket at c=1 on the suite" + (f"; failures: {notes}" if notes else ""),
    )


def test_06_cutoff_trend():
    sizes = (512, 1024, 2048, 4096)
    prof = cutoff_profile(sizes, 0.5, [0.0])
    t_mix = {(n, eps): t for n, eps, t in prof.mixing}
    ratios = {n: t_mix[(n, 0.25)] / (0.25 * n * math.log(n)) for n in sizes}
    ok_a = abs(ratios[4096] - 1.0) <= 0.15 and abs(ratios[4096] - 1.0) < abs(
        ratios[512] - 1.0
    )
    windows = [(t_mix[(n, 0.1)] - t_mix[(n, 0.9)]) / n for n in sizes]
    ok_b = all(b <= a * 1.10 for a, b in zip(windows, windows[1:]))
    gammas = (-2.0, -1.0, 0.0, 1.0, 2.0, 4.0, 8.0)
    big = cutoff_profile([16384], 0.5, gammas)
    dist_at = {gm: d for _, gm, _, d in big.profile}
    seq = [dist_at[gm] for gm in gammas]
    ok_c = all(a > b for a, b in zip(seq, seq[1:]))
    _verdict(
        "06 sharp-transition trend in the blue-count chain",
        ok_a and ok_b and ok_c,
        f"t_mix ratio at 4096 = {ratios[4096]:.4f} (512: {ratios[512]:.4f}), "
        f"windows {[round(w, 3) for w in windows]}, "
        f"profile at 16384 decreasing = {ok_c}",
    )


def test_07_moment_identities():
    n = 4096
    report = moment_checks(n, 0.5, int(n * math.log(n)), mean_tol=MOMENT_TOL)
    ok = report.max_mean_residual <= MOMENT_TOL and report.max_variance <= 2 * n
    _verdict(
        "07 mean recursion and variance cap on the blue-count chain",
        ok,
        f"n={n}, t <= {report.tmax}: max mean residual {report.max_mean_residual:.3e},"
        f" max variance {report.max_variance:.1f} <= {2 * n}",
    )


def test_08_coupling_tail_bounds():
    n, reps = 1024, 10000
    taus = run_replicas(n, 0.5, reps, 1, threads=2).sum(axis=1)
    base = 0.25 * n * math.log(n)
    tails = [float((taus > base + g * n).mean()) for g in (1, 4, 16, 64)]
    ok_mono = all(a >= b for a, b in zip(tails, tails[1:]))
    envelope = max(
        float((taus > base + g * n).mean()) * math.sqrt(g) for g in range(4, 101)
    )
    ok_env = envelope <= 10.0
    ok_small = True
    worst_slack = 1.0
    for small in range(4, 11):
        small_taus = run_replicas(small, 0.5, reps, 1).sum(axis=1)
        tcap = int(small_taus.max())
        d = max_tv_curve(complete_graph(small), 0.5, tcap - 1, starts="all")
        for t in range(tcap):
            phat = float((small_taus > t).mean())
            se = math.sqrt(phat * (1.0 - phat) / reps)
            worst_slack = min(worst_slack, phat + 3 * se - d[t])
            if phat + 3 * se < d[t]:
                ok_small = False
    _verdict(
        "08 coupling-time tails dominate exact distances",
        ok_mono and ok_env and ok_small,
        f"n=1024 tails {tails} non-increasing; envelope C = {envelope:.4f} <= 10;"
        f" n = 4..10 min slack {worst_slack:.4f}",
    )


def test_09_vertex_indicator_contraction(suite):
    worst = 0.0
    for _, g in suite:
        for p in P_GRID:
            for _, resid in eigenfunction_residuals(g, p):
                worst = max(worst, resid)
    _verdict(
        "09 centered vertex indicators contract at rate 1 - deg/m",
        worst <= EIGENFUNCTION_TOL,
        f"max one-step residual = {worst:.3e} over suite, both p, every vertex",
    )


def test_10_cli_determinism(tmp_path):
    invocations = [
        ["spectrum", "--graph", "complete:4"],
        ["tv-exact", "--graph", "bipartite:2,3", "--p", "0.3", "--tmax", "12"],
        ["bounds", "--graph", "path:4", "--tmax", "30"],
        ["sandwich", "--graph", "complete:8"],
        ["kn-profile", "--n", "64", "--gamma", "-1,0,1"],
        ["couple", "--n", "48", "--replicas", "600", "--seed", "5",
         "--gamma", "0,2", "--threads", "2"],
        ["walk-check", "--graph", "cycle:5", "--p", "0.3"],
    ]
    ok = True
    bad = []
    for i, argv in enumerate(invocations):
        out = tmp_path / f"run{i}.csv"
        full = argv + ["--out", str(out)]
        assert run(full) == 0, full
        first = out.read_bytes()
        assert run(full) == 0, full
        if out.read_bytes() != first:
            ok = False
            bad.append(argv[0])
    _verdict(
        "10 repeated CLI invocations are byte-identical",
        ok,
        f"{len(invocations)} subcommand invocations run twice each"
        + (f"; differing: {bad}" if bad else ""),
    )
