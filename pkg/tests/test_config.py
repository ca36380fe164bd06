"""JSON config parsing and its error diagnostics."""

import json

import numpy as np
import pytest

from qdim.config import ConfigError, load_config, parse_config
from qdim.maps import Mobius, Similarity
from qdim.measures import GibbsMeasure, ProductMeasure

CANTOR = {
    "system": {
        "interval": [0.0, 1.0],
        "tail": [
            [
                {"kind": "similarity", "ratio": 1 / 3},
                {"kind": "similarity", "ratio": 1 / 3, "offset": 2 / 3},
            ]
        ],
    },
    "measure": {"kind": "product", "tail": [[0.3, 0.7]]},
    "q": [0.5, 2.0],
}


def test_parse_minimal_config():
    cfg = parse_config(json.loads(json.dumps(CANTOR)))
    assert cfg.q_values == [0.5, 2.0]
    assert isinstance(cfg.measure, ProductMeasure)
    fam = cfg.system.schedule.family(1)
    assert isinstance(fam[0], Similarity)
    assert fam[1].offset == pytest.approx(2 / 3)
    assert cfg.mode == "level"
    assert cfg.compare_tol == 0.05


def test_load_config_roundtrip(tmp_path):
    path = tmp_path / "exp.json"
    path.write_text(json.dumps(CANTOR), encoding="utf-8")
    cfg = load_config(path)
    assert cfg.system.schedule.period == 1


def test_mobius_and_gibbs_config():
    raw = {
        "system": {
            "interval": [0.0, 1.0],
            "tail": [[{"kind": "mobius", "shift": 2.0}, {"kind": "mobius", "shift": 3.0}]],
        },
        "measure": {"kind": "gibbs", "potential": [[0.0, 0.0], [0.0, 0.0]]},
    }
    cfg = parse_config(raw)
    assert isinstance(cfg.system.schedule.family(1)[0], Mobius)
    assert isinstance(cfg.measure, GibbsMeasure)


def test_ladder_and_grid_specs():
    raw = dict(CANTOR)
    raw["delta_ladder"] = {"start": 0.25, "factor": 0.5, "count": 5}
    raw["t_grid"] = {"start": 0.0, "stop": 1.0, "count": 5}
    cfg = parse_config(raw)
    assert cfg.delta_ladder == pytest.approx([0.25 * 0.5**j for j in range(5)])
    assert cfg.t_grid == pytest.approx([0.0, 0.25, 0.5, 0.75, 1.0])


@pytest.mark.parametrize(
    "mutate, fragment",
    [
        (lambda r: r.pop("system"), "system"),
        (lambda r: r["system"].pop("tail"), "tail rule required"),
        (lambda r: r["system"].__setitem__("callback", "maps.py:f"), "tail rule required"),
        (lambda r: r["system"].__setitem__("interval", [1.0, 0.0]), "interval"),
        (lambda r: r["system"]["tail"][0][0].pop("ratio"), "ratio"),
        (lambda r: r["system"]["tail"][0][0].__setitem__("kind", "affine"), "kind"),
        (lambda r: r["measure"].__setitem__("tail", [[0.3, 0.6]]), "sums to"),
        (lambda r: r.__setitem__("q", [0.0]), "positive"),
        (lambda r: r.__setitem__("mode", "spectral"), "mode"),
        (lambda r: r.__setitem__("refine", 2), "refine"),
        (lambda r: r.__setitem__("delta_ladder", [2.0]), "deltas"),
    ],
)
def test_invalid_configs_carry_field_context(mutate, fragment):
    raw = json.loads(json.dumps(CANTOR))
    mutate(raw)
    with pytest.raises(ConfigError, match=fragment):
        parse_config(raw)


def test_smooth_maps_rejected_in_config():
    raw = json.loads(json.dumps(CANTOR))
    raw["system"]["tail"][0][0] = {"kind": "smooth"}
    with pytest.raises(ConfigError, match="programmatic"):
        parse_config(raw)


def test_invalid_json_reported(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json", encoding="utf-8")
    with pytest.raises(ConfigError, match="JSON"):
        load_config(path)


def test_missing_file_reported(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "absent.json")
