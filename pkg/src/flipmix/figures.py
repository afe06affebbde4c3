"""Matplotlib renderings of the CSV reports, written next to the data.

Every function takes the same row tuples the CSV writer gets, so a
figure always shows exactly what the file says.  The Agg backend keeps
this usable in headless runs.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

_DPI = 150


def _finish(fig, ax, path, title, xlabel, ylabel):
    ax.set_title(title)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def _maybe_log(ax, values):
    positive = [v for v in values if v > 0]
    # log scale only when it can show every plotted point
    if positive and len(positive) == len(values):
        ax.set_yscale("log")


def save_spectrum_plot(rows, path, title):
    """rows: (flat_bitmask, eigenvalue_num, eigenvalue_den, multiplicity)."""
    eig = [num / den for _, num, den, _ in rows]
    mult = [m for *_, m in rows]
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.stem(eig, mult, basefmt=" ")
    _finish(fig, ax, path, title, "eigenvalue", "multiplicity")


def save_tv_plot(rows, path, title):
    """rows: (t, d_tv)."""
    t = [r[0] for r in rows]
    d = [r[1] for r in rows]
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(t, d, marker=".", lw=1.0)
    _maybe_log(ax, d)
    _finish(fig, ax, path, title, "step", "distance to stationarity")


def save_bounds_plot(rows, path, title):
    """rows: (t, exact_dtv, bhr, comaximal)."""
    t = [r[0] for r in rows]
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    labels = ("exact", "alternating-sum bound", "co-maximal bound")
    for col, label in zip((1, 2, 3), labels):
        ax.plot(t, [r[col] for r in rows], lw=1.2, label=label)
    _maybe_log(ax, [r[c] for r in rows for c in (1, 2, 3)])
    ax.legend()
    _finish(fig, ax, path, title, "step", "total variation")


def save_profile_plot(rows, path, title):
    """rows: (n, gamma, t, d_tv); one line per n."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for n in sorted({r[0] for r in rows}):
        pts = [(r[1], r[3]) for r in rows if r[0] == n]
        ax.plot([g for g, _ in pts], [d for _, d in pts], marker="o", label=f"n={n}")
    ax.legend()
    _finish(fig, ax, path, title, "offset multiplier", "total variation")


def save_tail_plot(rows, path, title):
    """rows: (t, p_tail, stderr)."""
    t = [r[0] for r in rows]
    p = [r[1] for r in rows]
    err = [r[2] for r in rows]
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.errorbar(t, p, yerr=err, marker="o", lw=1.0, capsize=3)
    _maybe_log(ax, p)
    _finish(fig, ax, path, title, "step", "P(coupling time > t)")
