"""Command-line front end: reproducible experiments written as CSV.

Each subcommand maps onto one analysis family: spectrum, tv-exact,
bounds, sandwich, kn-profile, couple, walk-check.  Every output file
carries `#` comment lines with the command, the seed, and the package
version, so a result can be regenerated from its own header.  Floats
are serialized with repr(), which round-trips exactly: the same
invocation always produces byte-identical files.

Exit codes: 0 success, 1 bad input, 2 a consistency guard tripped.
"""

from __future__ import annotations

import argparse
import math
import os
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .bounds import (
    bhr_crossing_time,
    dominance_check,
    general_sandwich,
    sandwich_epsilon,
    wilson_lower_bound,
)
from .chain import all_blue, as_flip_params
from .coupling import run_replicas, tail_estimate
from .errors import ConsistencyError, ValidationError
from .exactdist import eigenfunction_residuals, tv_curve
from .graphs import complete_graph, generate, parse_graph
from .kn_reduced import MIXING_EPS_GRID, cutoff_profile
from .spectrum import TRACE_TOLERANCE, full_spectrum, trace_check

EIGENFUNCTION_TOLERANCE = 1e-12

_PLOTTABLE = {"spectrum", "tv-exact", "bounds", "kn-profile", "couple"}


@dataclass
class RunConfig:
    """Validated knobs for one run; populated straight from argv."""

    command: str
    graph: str | None = None
    p: float = 0.5
    seed: int = 1
    tmax: int = 100
    eps: tuple[float, ...] = (0.25, 0.1)
    gamma: tuple[float, ...] = ()
    n_list: tuple[int, ...] = ()
    replicas: int = 10000
    out: str | None = None
    tol: float = 1e-12
    c: float = 1.0
    kmax: int = 4
    threads: int = 1
    plot: bool = False
    mixing_out: str | None = None
    traces_out: str | None = None
    argv: tuple[str, ...] = field(default_factory=tuple)


class _Parser(argparse.ArgumentParser):
    # argparse wants to sys.exit(2) on bad input; route it through the
    # package's own validation error so run() can return 1 instead
    def error(self, message):
        raise ValidationError(message)


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(tok) for tok in text.split(",") if tok.strip() != "")
    except ValueError:
        raise ValidationError(f"expected comma-separated numbers, got {text!r}")


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(tok) for tok in text.split(",") if tok.strip() != "")
    except ValueError:
        raise ValidationError(f"expected comma-separated integers, got {text!r}")


def _build_parser() -> _Parser:
    parser = _Parser(prog="flipmix", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"flipmix {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="command")

    def common(sp, *, graph=False, p=False, seed=False, tmax=None, plot=False):
        if graph:
            sp.add_argument(
                "--graph",
                required=True,
                help="generator spec (complete:4, cycle:5, path:4, bipartite:2,3, "
                "random_regular:8,3,7) or a path to an edge-list file",
            )
        if p:
            sp.add_argument("--p", type=float, default=0.5, help="blue probability")
        if seed:
            sp.add_argument("--seed", type=int, default=1)
        if tmax is not None:
            sp.add_argument("--tmax", type=int, default=tmax)
        sp.add_argument("--out", default=None, help="CSV path (default: stdout)")
        if plot:
            sp.add_argument(
                "--plot",
                action="store_true",
                help="also write a PNG figure next to --out",
            )

    sp = sub.add_parser("spectrum", help="all eigenvalues with multiplicities")
    common(sp, graph=True, plot=True)

    sp = sub.add_parser("tv-exact", help="distance to stationarity, all-blue start")
    common(sp, graph=True, p=True, tmax=20, plot=True)
    sp.add_argument("--tol", type=float, default=1e-12)

    sp = sub.add_parser("bounds", help="exact distance vs. the two upper bounds")
    common(sp, graph=True, p=True, tmax=100, plot=True)

    sp = sub.add_parser("sandwich", help="lower/upper mixing-time estimates")
    common(sp, graph=True, p=True)
    sp.add_argument("--c", type=float, default=1.0, help="slack parameter")
    sp.add_argument("--eps", type=_float_list, default=(0.25, 0.1))

    sp = sub.add_parser("kn-profile", help="cutoff profile of the blue-count chain")
    sp.add_argument("--n", type=_int_list, required=True, help="comma-separated sizes")
    sp.add_argument("--p", type=float, default=0.5)
    sp.add_argument("--gamma", type=_float_list, required=True)
    sp.add_argument("--out", default=None)
    sp.add_argument(
        "--mixing-out", default=None, help="also write the n,eps,t_mix table here"
    )
    sp.add_argument("--plot", action="store_true")

    sp = sub.add_parser("couple", help="coupling-time tail estimates")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--p", type=float, default=0.5)
    sp.add_argument("--replicas", type=int, default=10000)
    sp.add_argument("--seed", type=int, default=1)
    sp.add_argument("--gamma", type=_float_list, default=(1.0, 4.0, 16.0, 64.0))
    sp.add_argument("--threads", type=int, default=None)
    sp.add_argument("--out", default=None)
    sp.add_argument(
        "--traces-out", default=None, help="also write per-replica stage lengths here"
    )
    sp.add_argument("--plot", action="store_true")

    sp = sub.add_parser("walk-check", help="trace identity and eigenfunction checks")
    common(sp, graph=True, p=True)
    sp.add_argument("--kmax", type=int, default=4)

    return parser


def _resolve_threads(value: int | None) -> int:
    if value is None:
        raw = os.environ.get("FLIPMIX_THREADS", "1")
        try:
            value = int(raw)
        except ValueError:
            raise ValidationError(f"FLIPMIX_THREADS must be an integer, got {raw!r}")
    if value < 1:
        raise ValidationError(f"threads must be >= 1, got {value}")
    return value


def _load_graph(spec: str):
    if ":" in spec or not Path(spec).exists():
        return generate(spec)
    return parse_graph(Path(spec).read_text())


def _cell(value) -> str:
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(config: RunConfig, header: str, rows, path_override=None) -> None:
    command_line = "flipmix " + " ".join(config.argv)
    lines = [
        f"# command: {command_line}",
        f"# seed: {config.seed}",
        f"# version: {__version__}",
        header,
    ]
    lines.extend(",".join(_cell(v) for v in row) for row in rows)
    text = "\n".join(lines) + "\n"
    target = path_override if path_override is not None else config.out
    if target is None:
        sys.stdout.write(text)
    else:
        Path(target).write_text(text)


def _plot_path(config: RunConfig) -> str:
    if config.out is None:
        raise ValidationError("--plot needs --out (figures go next to the CSV)")
    return str(Path(config.out).with_suffix(".png"))


def _cmd_spectrum(config: RunConfig) -> None:
    g = _load_graph(config.graph)
    entries = full_spectrum(g)
    rows = [
        (e.flat, e.eigenvalue.numerator, e.eigenvalue.denominator, e.multiplicity)
        for e in entries
    ]
    _write_csv(config, "flat_bitmask,eigenvalue_num,eigenvalue_den,multiplicity", rows)
    if config.plot:
        from . import figures

        figures.save_spectrum_plot(
            rows, _plot_path(config), f"spectrum, n={g.n}, m={g.m}"
        )


def _cmd_tv_exact(config: RunConfig) -> None:
    g = _load_graph(config.graph)
    params = as_flip_params(config.p)
    curve = tv_curve(g, params, all_blue(g.n), config.tmax, tol=config.tol)
    _write_csv(config, "t,d_tv", curve)
    if config.plot:
        from . import figures

        figures.save_tv_plot(
            curve, _plot_path(config), f"all-blue start, n={g.n}, p={params.p}"
        )


def _cmd_bounds(config: RunConfig) -> None:
    g = _load_graph(config.graph)
    params = as_flip_params(config.p)
    rows = dominance_check(g, params, config.tmax)
    _write_csv(config, "t,exact_dtv,bhr,comaximal", rows)
    if config.plot:
        from . import figures

        figures.save_bounds_plot(
            rows, _plot_path(config), f"bounds, n={g.n}, p={params.p}"
        )


def _cmd_sandwich(config: RunConfig) -> None:
    g = _load_graph(config.graph)
    params = as_flip_params(config.p)
    lower, upper = general_sandwich(g, params, config.c)
    rows = [("general", lower, upper, sandwich_epsilon(params, config.c))]
    if g == complete_graph(g.n):
        # eigenfunction lower bound and the alternating-sum crossing both
        # specialize to complete graphs
        for eps in config.eps:
            rows.append(
                (
                    f"wilson@{_cell(eps)}",
                    wilson_lower_bound(g.n, params, eps),
                    float(bhr_crossing_time(g, eps)),
                    eps,
                )
            )
    _write_csv(config, "name,lower,upper,eps", rows)


def _cmd_kn_profile(config: RunConfig) -> None:
    if not config.n_list:
        raise ValidationError("--n needs at least one size")
    if not config.gamma:
        raise ValidationError("--gamma needs at least one value")
    result = cutoff_profile(config.n_list, config.p, config.gamma)
    _write_csv(config, "n,gamma,t,d_tv", result.profile)
    if config.mixing_out is not None:
        _write_csv(config, "n,eps,t_mix", result.mixing, path_override=config.mixing_out)
    if config.plot:
        from . import figures

        figures.save_profile_plot(
            result.profile, _plot_path(config), f"cutoff profile, p={config.p}"
        )


def _cmd_couple(config: RunConfig) -> None:
    params = as_flip_params(config.p)
    n = config.n_list[0]
    base = 0.25 * n * math.log(n)
    t_list = sorted({int(round(base + g * n)) for g in config.gamma})
    if config.traces_out is None:
        rows = tail_estimate(
            n, params, config.replicas, t_list, config.seed, threads=config.threads
        )
    else:
        stage_lengths = run_replicas(
            n, params, config.replicas, config.seed, threads=config.threads
        )
        taus = stage_lengths.sum(axis=1)
        rows = []
        for t in t_list:
            phat = float((taus > t).mean())
            stderr = math.sqrt(phat * (1.0 - phat) / config.replicas)
            rows.append((t, phat, stderr))
        trace_rows = [
            (i, int(a), int(b), int(c), int(a + b + c))
            for i, (a, b, c) in enumerate(stage_lengths)
        ]
        _write_csv(
            config,
            "replica,tau1,tau2,tau3,tau",
            trace_rows,
            path_override=config.traces_out,
        )
    _write_csv(config, "t,p_tail,stderr", rows)
    if config.plot:
        from . import figures

        figures.save_tail_plot(
            rows, _plot_path(config), f"coupling tail, n={n}, p={params.p}"
        )


def _cmd_walk_check(config: RunConfig) -> None:
    g = _load_graph(config.graph)
    params = as_flip_params(config.p)
    rows = []
    for k, _, _, residual in trace_check(g, params, config.kmax):
        rows.append(("trace", k, residual, TRACE_TOLERANCE, "ok"))
    failed = False
    for vertex, residual in eigenfunction_residuals(g, params):
        ok = residual <= EIGENFUNCTION_TOLERANCE
        failed = failed or not ok
        rows.append(
            ("eigenfunction", vertex, residual, EIGENFUNCTION_TOLERANCE,
             "ok" if ok else "FAIL")
        )
    _write_csv(config, "check,index,residual,tolerance,status", rows)
    if failed:
        raise ConsistencyError("an eigenfunction residual exceeded its tolerance")


_DISPATCH = {
    "spectrum": _cmd_spectrum,
    "tv-exact": _cmd_tv_exact,
    "bounds": _cmd_bounds,
    "sandwich": _cmd_sandwich,
    "kn-profile": _cmd_kn_profile,
    "couple": _cmd_couple,
    "walk-check": _cmd_walk_check,
}


def _to_config(ns: argparse.Namespace, argv) -> RunConfig:
    if ns.command is None:
        raise ValidationError("missing subcommand (see flipmix --help)")
    config = RunConfig(command=ns.command, argv=tuple(argv))
    for name in (
        "graph", "p", "seed", "tmax", "eps", "gamma", "replicas",
        "out", "tol", "c", "kmax", "mixing_out", "traces_out",
    ):
        if hasattr(ns, name):
            setattr(config, name, getattr(ns, name))
    if hasattr(ns, "plot"):
        config.plot = ns.plot
    if hasattr(ns, "n"):
        config.n_list = ns.n if isinstance(ns.n, tuple) else (ns.n,)
    if hasattr(ns, "threads"):
        config.threads = _resolve_threads(ns.threads)
    if config.plot and config.command in _PLOTTABLE and config.out is None:
        raise ValidationError("--plot needs --out (figures go next to the CSV)")
    if not 0.0 < config.p < 1.0:
        raise ValidationError(f"p must lie in (0, 1), got {config.p}")
    if config.tol <= 0.0:
        raise ValidationError(f"tolerance must be positive, got {config.tol}")
    return config


def _glue_negative_values(argv):
    # argparse reads "-2,0,2,8" as an option string; attach such values to
    # their flag with '=' so `--gamma -2,0,2,8` works as written
    out = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok == "--gamma" and i + 1 < len(argv) and re.match(r"^-\d", argv[i + 1]):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def run(argv) -> int:
    """Parse argv, dispatch, return the process exit code."""
    argv = list(argv)
    try:
        ns = _build_parser().parse_args(_glue_negative_values(argv))
        config = _to_config(ns, argv)
        _DISPATCH[config.command](config)
    except ValidationError as exc:
        print(f"flipmix: error: {exc}", file=sys.stderr)
        return 1
    except ConsistencyError as exc:
        print(f"flipmix: consistency check failed: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:  # argparse --help / --version
        code = exc.code
        return 0 if code is None else int(code)
    return 0


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
