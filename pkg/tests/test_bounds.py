import math
from math import comb

import pytest

from flipmix.bounds import (
    BoundCurve,
    bhr_bound,
    bhr_crossing_time,
    bhr_curve,
    comaximal_bound,
    comaximal_curve,
    dominance_check,
    general_sandwich,
    regular_upper_bound,
    sandwich_epsilon,
    wilson_lower_bound,
)
from flipmix.chain import FlipParams
from flipmix.errors import ValidationError
from flipmix.exactdist import mixing_time
from flipmix.graphs import (
    complete_bipartite_graph,
    complete_graph,
    cycle_graph,
    path_graph,
)


def complete_alternating_sum(n, t):
    """Independent closed form for the alternating bound on K_n."""
    m = comb(n, 2)
    return -sum(
        (-1) ** (n - k) * comb(n, k) * (comb(k, 2) / m) ** t for k in range(2, n)
    )


def bipartite_lattice_sum(a, b, t):
    """Alternating bound on K_{a,b} summed over the whole flat lattice."""
    total = 0.0
    for k in range(a + 1):
        for ell in range(b + 1):
            if (k, ell) == (a, b):
                continue
            sign = (-1) ** (a + b - k - ell)
            total -= sign * comb(a, k) * comb(b, ell) * (k * ell / (a * b)) ** t
    return total


def test_alternating_bound_matches_complete_closed_form():
    for n in range(3, 9):
        g = complete_graph(n)
        for t in (1, 2, 5, 10):
            assert bhr_bound(g, t) == pytest.approx(
                complete_alternating_sum(n, t), rel=1e-12, abs=1e-12
            )


def test_alternating_bound_matches_bipartite_lattice_sum():
    for a, b in ((2, 3), (3, 3), (2, 4)):
        g = complete_bipartite_graph(a, b)
        for t in (1, 2, 5):
            assert bhr_bound(g, t) == pytest.approx(
                bipartite_lattice_sum(a, b, t), rel=1e-12, abs=1e-12
            )


def test_alternating_bound_k23_at_one_step():
    # hand-summed over all 11 nonzero-eigenvalue proper flats
    assert bhr_bound(complete_bipartite_graph(2, 3), 1) == pytest.approx(1.0)


def test_alternating_bound_vanishes():
    assert bhr_bound(complete_graph(4), 400) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValidationError):
        bhr_bound(complete_graph(4), 0)


def test_comaximal_values():
    # regular graphs: n * ((m - k) / m)^t = n * (1 - 2/n)^t
    for g, n in ((complete_graph(4), 4), (cycle_graph(5), 5)):
        for t in (0, 1, 3, 8):
            assert comaximal_bound(g, t) == pytest.approx(n * (1 - 2 / n) ** t)
    assert comaximal_bound(complete_graph(2), 0) == pytest.approx(2.0)
    assert comaximal_bound(complete_graph(2), 1) == 0.0


def test_bound_curves_clamp_and_order():
    g = complete_graph(4)
    upper = bhr_curve(g, 30)
    outer = comaximal_curve(g, 30)
    assert upper.kind == "upper" and outer.kind == "upper"
    assert all(v >= 0.0 for _, v in upper.points)
    for (_, a), (_, b) in zip(upper.points, outer.points):
        assert a <= b + 1e-9
    with pytest.raises(ValidationError):
        BoundCurve("x", "sideways", ((1, 0.5),))


def test_dominance_spec_cases():
    # each returns rows without tripping the internal ordering check
    for g, p, tmax in (
        (complete_graph(4), 0.5, 60),
        (complete_bipartite_graph(2, 3), 0.3, 80),
        (cycle_graph(5), 0.7, 80),
    ):
        rows = dominance_check(g, p, tmax)
        assert len(rows) == tmax
        t, exact, bhr, comax = rows[10]
        assert t == 11
        assert exact <= bhr + 1e-9


def test_dominance_cap():
    with pytest.raises(ValidationError):
        dominance_check(complete_graph(13), 0.5, 10)


def test_crossing_time_is_first():
    g = complete_graph(6)
    for eps in (0.5, 0.25, 0.05):
        t_star = bhr_crossing_time(g, eps)
        assert bhr_bound(g, t_star) <= eps
        assert t_star == 1 or bhr_bound(g, t_star - 1) > eps


def test_general_sandwich_single_edge():
    lower, upper = general_sandwich(complete_graph(2), 0.5, 1.0)
    assert lower == pytest.approx(1.0)
    assert upper == pytest.approx(math.log(2) + 2 + math.log(2))
    eps = sandwich_epsilon(FlipParams(0.5), 1.0)
    assert eps == pytest.approx(math.exp(-2) / 2)
    # the bracket does hold the exact mixing time here
    assert lower <= mixing_time(complete_graph(2), 0.5, eps) <= upper


def test_general_sandwich_regular_substitution():
    # k-regular graphs have m/delta = n/2
    n, c = 5, 1.5
    lower, upper = general_sandwich(cycle_graph(n), 0.3, c)
    assert lower == pytest.approx(c * n / 2)
    assert upper == pytest.approx((n / 2) * (math.log(n) + 2 * c - math.log(0.7)))


def test_general_sandwich_ordering(suite):
    for _, g in suite:
        for c in (0.5, 1.0, 2.0):
            lower, upper = general_sandwich(g, 0.3, c)
            assert lower < upper


def test_wilson_frozen_value():
    # 1/(2 ln(8/7)) * (ln 1 + ln 3) at n=16, p=1/2, eps=1/4
    value = wilson_lower_bound(16, 0.5, 0.25)
    assert value == pytest.approx(math.log(3) / (2 * math.log(8 / 7)))
    assert value == pytest.approx(4.113685, abs=1e-6)


def test_wilson_monotone_in_eps():
    values = [wilson_lower_bound(32, 0.5, e) for e in (0.4, 0.25, 0.1, 0.01)]
    assert values == sorted(values)
    with pytest.raises(ValidationError):
        wilson_lower_bound(2, 0.5, 0.25)


def test_regular_upper_bound_certificate():
    for n in (10, 100, 1000):
        for c in (1.0, 5.0):
            t = regular_upper_bound(n, c)
            assert n * (1 - 2 / n) ** t <= math.exp(-c) * (1 + 1e-9)
    # c -> 0 leaves the pure n log n / 2 term
    assert regular_upper_bound(50, 1e-12) == pytest.approx(50 * math.log(50) / 2)


def test_path_min_degree_sandwich():
    lower, upper = general_sandwich(path_graph(4), 0.5, 1.0)
    assert lower == pytest.approx(3.0)  # m=3, delta=1
    assert upper == pytest.approx(3 * (math.log(4) + 2 + math.log(2)))
