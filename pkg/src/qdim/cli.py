"""Config-driven experiment runner.

qdim <validate|pressure|dq|boxcount|compare|moran> --config <path> [--out <dir>]

Exit codes: 0 success, 1 usage/config error, 2 validation failure,
3 numerical failure (no bracket, budget exceeded, contraction violated).
CSV output is comma-separated, UTF-8, LF line endings, '.' decimal point;
identical config and version produce byte-identical files.  --figures
additionally renders matplotlib PNGs next to the CSVs.
"""

from __future__ import annotations

import argparse
import os
import sys
import tempfile
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import __version__
from .boxdim import estimate_Dq
from .config import ConfigError, ExperimentConfig, load_config
from .measures import NotMixingError
from .moran import NotSimilarityError, moran_limits
from .pressure import (
    RootOutOfRangeError,
    pressure_curve,
    root_dq,
)
from .system import BudgetExceededError, ContractionError

USAGE_ERROR = 1
VALIDATION_FAILURE = 2
NUMERICAL_FAILURE = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        sys.exit(USAGE_ERROR)


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    """Atomic CSV write: version comment, header row, then payload rows."""
    lines = [f"# qdim {__version__}", ",".join(header)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    payload = "\n".join(lines) + "\n"
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _workers() -> int:
    raw = os.environ.get("QDIM_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def cmd_validate(cfg: ExperimentConfig, out: Path, figures: bool) -> int:
    report = cfg.system.validate(depth=cfg.validate_depth)
    diag = cfg.system.condition_1_10(cfg.condition_k_max)
    rows = [
        ("contraction", "ok" if report.contraction_ok else "fail", repr(report.contraction)),
        ("nesting", "ok" if report.nesting_ok else "fail", f"depth {report.depth_checked}"),
        ("osc", "ok" if report.osc else "fail", f"depth {report.depth_checked}"),
        ("ssc", "true" if report.ssc else "false", ""),
        ("shrink_ratio", diag.verdict, repr(float(diag.ratio_k[-1]))),
    ]
    rows.extend(("failure", "detail", msg.replace(",", ";")) for msg in report.failures)
    write_csv(out / "validate.csv", ("check", "status", "detail"), rows)
    return 0 if report.ok else VALIDATION_FAILURE


def _default_t_grid() -> list[float]:
    return [j * 0.1 for j in range(13)]


def cmd_pressure(cfg: ExperimentConfig, out: Path, figures: bool) -> int:
    ts = cfg.t_grid or _default_t_grid()
    curves = [
        pressure_curve(
            cfg.system,
            cfg.measure,
            q,
            ts,
            mode=cfg.mode,
            level=cfg.level,
            deltas=cfg.delta_ladder,
        )
        for q in cfg.q_values
    ]
    rows = [
        (c.q, s.t, s.lower, s.upper, c.mode)
        for c in curves
        for s in c.samples
    ]
    write_csv(out / "pressure.csv", ("q", "t", "value_lower", "value_upper", "mode"), rows)
    if figures:
        from .figures import plot_pressure_curves

        plot_pressure_curves(curves, out / "pressure.png")
    return 0


def _roots(cfg: ExperimentConfig):
    return [
        root_dq(
            cfg.system,
            cfg.measure,
            q,
            mode=cfg.mode,
            tol=cfg.root_tol,
            level=cfg.level,
            deltas=cfg.delta_ladder,
        )
        for q in cfg.q_values
    ]


def cmd_dq(cfg: ExperimentConfig, out: Path, figures: bool) -> int:
    roots = _roots(cfg)
    rows = [
        (r.q, r.d_value, r.bracket[0], r.bracket[1], r.drift, r.mode)
        for r in roots
    ]
    write_csv(out / "dq.csv", ("q", "d_q", "bracket_lo", "bracket_hi", "drift", "mode"), rows)
    if figures:
        from .figures import plot_roots

        plot_roots(roots, out / "dq.png")
    return 0


def _estimates(cfg: ExperimentConfig, roots=None):
    workers = _workers()
    out = []
    for i, q in enumerate(cfg.q_values):
        root = roots[i].d_value if roots is not None else None
        out.append(
            estimate_Dq(
                cfg.system,
                cfg.measure,
                q,
                cfg.delta_ladder,
                refine=cfg.refine,
                pressure_root=root,
                workers=workers,
            )
        )
    return out


def cmd_boxcount(cfg: ExperimentConfig, out: Path, figures: bool) -> int:
    estimates = _estimates(cfg)
    ladder_rows = [
        (e.q, p.delta, p.value, p.log_delta, p.log_value)
        for e in estimates
        for p in e.ladder
    ]
    write_csv(
        out / "boxcount_ladder.csv",
        ("q", "delta", "sum", "log_delta", "log_sum"),
        ladder_rows,
    )
    est_rows = [
        (e.q, e.slope_ls, e.slope_min, e.slope_max, e.threshold_sensitive)
        for e in estimates
    ]
    write_csv(
        out / "boxcount_estimates.csv",
        ("q", "slope_ls", "slope_min", "slope_max", "threshold_sensitive"),
        est_rows,
    )
    if figures:
        from .figures import plot_boxcount

        plot_boxcount(estimates, out / "boxcount.png")
    return 0


def cmd_compare(cfg: ExperimentConfig, out: Path, figures: bool) -> int:
    roots = _roots(cfg)
    estimates = _estimates(cfg, roots)
    rows = []
    for r, e in zip(roots, estimates):
        target = min(r.d_value, 1.0)  # ambient-dimension clamp in d = 1
        diff = abs(e.slope_ls - target)
        rows.append(
            {
                "q": r.q,
                "estimate": e.slope_ls,
                "root": target,
                "abs_diff": diff,
                "tolerance": cfg.compare_tol,
                "pass": diff <= cfg.compare_tol,
            }
        )
    write_csv(
        out / "compare.csv",
        ("q", "boxcount_Dq", "pressure_dq", "abs_diff", "tolerance", "pass"),
        [
            (row["q"], row["estimate"], row["root"], row["abs_diff"], row["tolerance"], row["pass"])
            for row in rows
        ],
    )
    if figures:
        from .figures import plot_compare

        plot_compare(rows, out / "compare.png")
    return 0


def cmd_moran(cfg: ExperimentConfig, out: Path, figures: bool) -> int:
    report = moran_limits(cfg.system.schedule, max(cfg.series_k_max, 4))
    write_csv(
        out / "moran.csv",
        ("k", "s_k"),
        [(k + 1, float(s)) for k, s in enumerate(report.s_k)],
    )
    write_csv(
        out / "moran_limits.csv",
        ("s_star", "s_upper", "gap", "verdict"),
        [(report.s_star, report.s_upper, report.gap, report.verdict)],
    )
    if figures:
        from .figures import plot_moran

        plot_moran(report, out / "moran.png")
    return 0


COMMANDS = {
    "validate": cmd_validate,
    "pressure": cmd_pressure,
    "dq": cmd_dq,
    "boxcount": cmd_boxcount,
    "compare": cmd_compare,
    "moran": cmd_moran,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = _Parser(prog="qdim", description=__doc__)
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, help="path to the JSON experiment config")
    parser.add_argument("--out", default=".", help="output directory for CSV reports")
    parser.add_argument(
        "--figures", action="store_true", help="also render matplotlib PNGs"
    )
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return USAGE_ERROR
    out = Path(args.out)
    try:
        return COMMANDS[args.command](cfg, out, args.figures)
    except (
        RootOutOfRangeError,
        BudgetExceededError,
        ContractionError,
        NotMixingError,
        NotSimilarityError,
    ) as exc:
        sys.stderr.write(f"numerical failure: {exc}\n")
        return NUMERICAL_FAILURE


if __name__ == "__main__":
    sys.exit(main())
