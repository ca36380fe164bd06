"""JSON experiment configuration: parsing and validation.

The config is a UTF-8 JSON document with tagged-union map descriptions.
Parsing failures carry the offending field path so CLI users get a usable
diagnostic.  Aperiodic schedules are only available programmatically via a
level callback, never through the config file.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

from .maps import Map1D, Mobius, Similarity
from .measures import GibbsMeasure, ProductMeasure, SymbolicMeasure
from .system import LevelSchedule, System


class ConfigError(ValueError):
    """Invalid experiment config; message carries the field path."""


@dataclass
class ExperimentConfig:
    system: System
    measure: SymbolicMeasure
    q_values: list[float]
    t_grid: list[float]
    delta_ladder: list[float]
    refine: int = 32
    mode: str = "level"
    level: Optional[int] = None
    validate_depth: int = 8
    condition_k_max: int = 12
    series_k_max: int = 20
    root_tol: float = 1e-9
    compare_tol: float = 0.05
    raw: dict = field(default_factory=dict)


def _need(obj: dict, key: str, path: str) -> Any:
    if key not in obj:
        raise ConfigError(f"{path}.{key}: missing required field")
    return obj[key]


def _parse_map(obj: dict, path: str) -> Map1D:
    kind = _need(obj, "kind", path)
    offset = float(obj.get("offset", 0.0))
    try:
        if kind == "similarity":
            return Similarity(
                ratio=float(_need(obj, "ratio", path)),
                offset=offset,
                orientation=int(obj.get("orientation", 1)),
            )
        if kind == "mobius":
            return Mobius(shift=float(_need(obj, "shift", path)), offset=offset)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    if kind == "smooth":
        raise ConfigError(f"{path}: smooth maps need derivative oracles and are programmatic-only")
    raise ConfigError(f"{path}.kind: unknown map kind {kind!r}")


def _parse_families(items: list, path: str) -> tuple[tuple[Map1D, ...], ...]:
    out = []
    for i, fam in enumerate(items):
        if not isinstance(fam, list):
            raise ConfigError(f"{path}[{i}]: expected a list of maps")
        out.append(tuple(_parse_map(m, f"{path}[{i}][{j}]") for j, m in enumerate(fam)))
    return tuple(out)


def _parse_system(obj: dict, path: str = "system") -> System:
    if "callback" in obj:
        raise ConfigError(f"{path}.callback: tail rule required in config mode")
    interval = _need(obj, "interval", path)
    if (
        not isinstance(interval, list)
        or len(interval) != 2
        or not interval[1] > interval[0]
    ):
        raise ConfigError(f"{path}.interval: expected [low, high] with low < high")
    tail_items = obj.get("tail")
    if not tail_items:
        raise ConfigError(f"{path}.tail: tail rule required in config mode")
    try:
        schedule = LevelSchedule(
            interval=(float(interval[0]), float(interval[1])),
            tail=_parse_families(tail_items, f"{path}.tail"),
            prefix=_parse_families(obj.get("prefix", []), f"{path}.prefix"),
        )
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return System(
        schedule,
        grid_points=int(obj.get("grid_points", 257)),
        budget=int(obj.get("budget", 2**24)),
    )


def _parse_measure(obj: dict, system: System, path: str = "measure") -> SymbolicMeasure:
    kind = _need(obj, "kind", path)
    try:
        if kind == "product":
            tail = _need(obj, "tail", path)
            measure = ProductMeasure(
                tail=tuple(tuple(float(p) for p in v) for v in tail),
                prefix=tuple(tuple(float(p) for p in v) for v in obj.get("prefix", [])),
            )
        elif kind == "gibbs":
            measure = GibbsMeasure(potential=_need(obj, "potential", path))
        else:
            raise ConfigError(f"{path}.kind: unknown measure kind {kind!r}")
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return measure


def _parse_ladder(obj: Any, path: str) -> list[float]:
    if isinstance(obj, list):
        ladder = [float(d) for d in obj]
    elif isinstance(obj, dict):
        start = float(_need(obj, "start", path))
        count = int(_need(obj, "count", path))
        factor = float(obj.get("factor", 0.5))
        ladder = [start * factor**j for j in range(count)]
    else:
        raise ConfigError(f"{path}: expected a list of deltas or a geometric spec")
    if any(not 0 < d < 1 for d in ladder):
        raise ConfigError(f"{path}: deltas must lie in (0, 1)")
    return ladder


def _parse_grid(obj: Any, path: str) -> list[float]:
    if obj is None:
        return []
    if isinstance(obj, list):
        return [float(t) for t in obj]
    if isinstance(obj, dict):
        start = float(_need(obj, "start", path))
        stop = float(_need(obj, "stop", path))
        count = int(_need(obj, "count", path))
        if count < 2:
            raise ConfigError(f"{path}.count: need at least 2 grid points")
        step = (stop - start) / (count - 1)
        return [start + j * step for j in range(count)]
    raise ConfigError(f"{path}: expected a list of t values or a start/stop/count spec")


def load_config(path: str | Path) -> ExperimentConfig:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: line {exc.lineno}: {exc.msg}") from exc
    return parse_config(raw)


def parse_config(raw: dict) -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigError("top level: expected a JSON object")
    system = _parse_system(_need(raw, "system", "top level"))
    measure = _parse_measure(_need(raw, "measure", "top level"), system)
    q_values = [float(q) for q in raw.get("q", [2.0])]
    if any(q <= 0 for q in q_values):
        raise ConfigError("q: values must be positive")
    depths = raw.get("depths", {})
    tolerances = raw.get("tolerances", {})
    mode = raw.get("mode", "level")
    if mode not in ("level", "cutset"):
        raise ConfigError(f"mode: expected 'level' or 'cutset', got {mode!r}")
    ladder_spec = raw.get("delta_ladder")
    ladder = (
        _parse_ladder(ladder_spec, "delta_ladder")
        if ladder_spec is not None
        else [2.0**-j for j in range(8, 17)]
    )
    refine = int(raw.get("refine", 32))
    if refine < 4:
        raise ConfigError("refine: must be >= 4")
    cfg = ExperimentConfig(
        system=system,
        measure=measure,
        q_values=q_values,
        t_grid=_parse_grid(raw.get("t_grid"), "t_grid"),
        delta_ladder=ladder,
        refine=refine,
        mode=mode,
        level=depths.get("level"),
        validate_depth=int(depths.get("validate", 8)),
        condition_k_max=int(depths.get("condition_k_max", 12)),
        series_k_max=int(depths.get("series_k_max", 20)),
        root_tol=float(tolerances.get("root", 1e-9)),
        compare_tol=float(tolerances.get("compare", 0.05)),
        raw=raw,
    )
    if not math.isfinite(cfg.root_tol) or cfg.root_tol <= 0:
        raise ConfigError("tolerances.root: must be a positive number")
    return cfg
