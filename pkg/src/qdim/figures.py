"""Matplotlib renderings of the report CSV payloads.

Figures are opt-in from the CLI (--figures) and land next to the delimited
output; the CSVs remain the canonical, deterministic artifacts.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .boxdim import DimensionEstimate
from .moran import MoranReport
from .pressure import DimensionRoot, PressureCurve


def plot_pressure_curves(curves: Sequence[PressureCurve], path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    for curve in curves:
        ts = [s.t for s in curve.samples]
        lower = [s.lower for s in curve.samples]
        upper = [s.upper for s in curve.samples]
        (line,) = ax.plot(ts, lower, label=f"q={curve.q:g}")
        ax.fill_between(ts, lower, upper, alpha=0.25, color=line.get_color())
    ax.axhline(0.0, color="k", lw=0.8)
    ax.set_xlabel("t")
    ax.set_ylabel("pressure")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_roots(roots: Sequence[DimensionRoot], path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    qs = [r.q for r in roots]
    ds = [r.d_value for r in roots]
    drifts = [r.drift for r in roots]
    ax.errorbar(qs, ds, yerr=drifts, fmt="o-", capsize=3)
    ax.set_xlabel("q")
    ax.set_ylabel("dimension root")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_boxcount(estimates: Sequence[DimensionEstimate], path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    for est in estimates:
        if est.q == 1:
            xs = [p.log_delta for p in est.ladder]
        else:
            xs = [(est.q - 1) * p.log_delta for p in est.ladder]
        ys = [p.log_value for p in est.ladder]
        (line,) = ax.plot(xs, ys, "o", label=f"q={est.q:g}: slope {est.slope_ls:.4f}")
        x0, x1 = min(xs), max(xs)
        y0 = ys[xs.index(x0)]
        ax.plot([x0, x1], [y0, y0 + est.slope_ls * (x1 - x0)], "--", color=line.get_color())
    ax.set_xlabel("(q-1) log delta  [log delta at q=1]")
    ax.set_ylabel("log moment sum  [entropy sum at q=1]")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_compare(rows: Sequence[dict], path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    qs = [row["q"] for row in rows]
    diffs = [row["abs_diff"] for row in rows]
    tol = rows[0]["tolerance"] if rows else 0.0
    ax.bar([f"q={q:g}" for q in qs], diffs)
    ax.axhline(tol, color="r", lw=1.0, label=f"tolerance {tol:g}")
    ax.set_ylabel("|box-count D_q - pressure root|")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_moran(report: MoranReport, path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    ks = range(1, len(report.s_k) + 1)
    ax.plot(ks, report.s_k, "o-", ms=3, label="per-prefix root")
    ax.axhline(report.s_star, color="g", lw=0.8, label=f"window min {report.s_star:.5f}")
    ax.axhline(report.s_upper, color="r", lw=0.8, label=f"window max {report.s_upper:.5f}")
    ax.set_xlabel("prefix depth k")
    ax.set_ylabel("root s_k")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
