"""End-to-end CLI runs: exit codes, CSV format, determinism, figures."""

import json
import math
import os
import subprocess
import sys

import pytest

from qdim import __version__
from qdim.cli import main

CANTOR_CFG = {
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
    "q": [0.5, 1.0, 2.0],
    "delta_ladder": {"start": 2.0**-8, "factor": 0.5, "count": 6},
}

MOBIUS_CFG = {
    "system": {
        "interval": [0.0, 1.0],
        "tail": [[{"kind": "mobius", "shift": 2.0}, {"kind": "mobius", "shift": 3.0}]],
    },
    "measure": {"kind": "gibbs", "potential": [[0.0, 0.0], [0.0, 0.0]]},
    "q": [2.0],
    "depths": {"level": 10},
    "delta_ladder": {"start": 2.0**-6, "factor": 0.5, "count": 5},
}


@pytest.fixture
def cantor_cfg(tmp_path):
    path = tmp_path / "cantor.json"
    path.write_text(json.dumps(CANTOR_CFG), encoding="utf-8")
    return path


@pytest.fixture
def mobius_cfg(tmp_path):
    path = tmp_path / "mobius.json"
    path.write_text(json.dumps(MOBIUS_CFG), encoding="utf-8")
    return path


def read_csv(path):
    lines = path.read_text(encoding="utf-8").splitlines()
    return lines[0], lines[1].split(","), [ln.split(",") for ln in lines[2:]]


class TestExitCodes:
    def test_usage_error_without_config(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["validate"])
        assert exc.value.code == 1

    def test_unknown_command(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["frobnicate", "--config", "x.json"])
        assert exc.value.code == 1

    def test_config_error_is_exit_1(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{}", encoding="utf-8")
        assert main(["dq", "--config", str(bad)]) == 1
        assert "config error" in capsys.readouterr().err

    def test_validation_failure_is_exit_2(self, tmp_path):
        cfg = json.loads(json.dumps(CANTOR_CFG))
        cfg["system"]["tail"][0] = [
            {"kind": "similarity", "ratio": 0.6},
            {"kind": "similarity", "ratio": 0.6, "offset": 0.4},
        ]
        path = tmp_path / "overlap.json"
        path.write_text(json.dumps(cfg), encoding="utf-8")
        assert main(["validate", "--config", str(path), "--out", str(tmp_path)]) == 2

    def test_numerical_failure_is_exit_3(self, tmp_path, capsys):
        cfg = json.loads(json.dumps(CANTOR_CFG))
        cfg["system"]["tail"][0] = [
            {"kind": "similarity", "ratio": 0.999},
            {"kind": "similarity", "ratio": 0.999, "offset": 0.001},
        ]
        cfg["measure"] = {"kind": "product", "tail": [[0.5, 0.5]]}
        path = tmp_path / "slack.json"
        path.write_text(json.dumps(cfg), encoding="utf-8")
        assert main(["dq", "--config", str(path), "--out", str(tmp_path)]) == 3
        assert "numerical failure" in capsys.readouterr().err

    def test_success_is_exit_0(self, cantor_cfg, tmp_path):
        assert main(["validate", "--config", str(cantor_cfg), "--out", str(tmp_path)]) == 0


class TestCsvFormat:
    def test_version_comment_and_header(self, cantor_cfg, tmp_path):
        main(["dq", "--config", str(cantor_cfg), "--out", str(tmp_path)])
        comment, header, rows = read_csv(tmp_path / "dq.csv")
        assert comment == f"# qdim {__version__}"
        assert header == ["q", "d_q", "bracket_lo", "bracket_hi", "drift", "mode"]
        assert len(rows) == 3

    def test_lf_line_endings_and_decimal_points(self, cantor_cfg, tmp_path):
        main(["dq", "--config", str(cantor_cfg), "--out", str(tmp_path)])
        blob = (tmp_path / "dq.csv").read_bytes()
        assert b"\r" not in blob
        assert blob.endswith(b"\n")
        text = blob.decode("utf-8")
        assert "," in text and ";" not in text

    def test_dq_values_roundtrip(self, cantor_cfg, tmp_path):
        main(["dq", "--config", str(cantor_cfg), "--out", str(tmp_path)])
        _, _, rows = read_csv(tmp_path / "dq.csv")
        by_q = {float(r[0]): float(r[1]) for r in rows}
        assert by_q[2.0] == pytest.approx(
            -math.log(0.3**2 + 0.7**2) / math.log(3.0), abs=1e-8
        )

    def test_determinism_byte_identical(self, cantor_cfg, tmp_path):
        out1 = tmp_path / "run1"
        out2 = tmp_path / "run2"
        for out in (out1, out2):
            for cmd in ("validate", "pressure", "dq", "boxcount", "compare", "moran"):
                assert main([cmd, "--config", str(cantor_cfg), "--out", str(out)]) == 0
        for name in sorted(os.listdir(out1)):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes(), name


class TestCommands:
    def test_pressure_csv_shape(self, cantor_cfg, tmp_path):
        main(["pressure", "--config", str(cantor_cfg), "--out", str(tmp_path)])
        _, header, rows = read_csv(tmp_path / "pressure.csv")
        assert header == ["q", "t", "value_lower", "value_upper", "mode"]
        assert all(float(r[2]) <= float(r[3]) for r in rows)

    def test_boxcount_outputs(self, cantor_cfg, tmp_path):
        main(["boxcount", "--config", str(cantor_cfg), "--out", str(tmp_path)])
        _, _, ladder = read_csv(tmp_path / "boxcount_ladder.csv")
        _, header, est = read_csv(tmp_path / "boxcount_estimates.csv")
        assert len(ladder) == 3 * 6
        assert header[:2] == ["q", "slope_ls"]
        assert len(est) == 3

    def test_compare_passes_on_cantor(self, cantor_cfg, tmp_path):
        assert main(["compare", "--config", str(cantor_cfg), "--out", str(tmp_path)]) == 0
        _, header, rows = read_csv(tmp_path / "compare.csv")
        assert header[-1] == "pass"
        assert all(r[-1] == "true" for r in rows)

    def test_moran_outputs(self, cantor_cfg, tmp_path):
        main(["moran", "--config", str(cantor_cfg), "--out", str(tmp_path)])
        _, _, limits = read_csv(tmp_path / "moran_limits.csv")
        assert limits[0][3] == "converged"

    def test_moran_on_gibbs_system_is_numerical_failure(self, mobius_cfg, tmp_path):
        assert main(["moran", "--config", str(mobius_cfg), "--out", str(tmp_path)]) == 3

    def test_mobius_gibbs_dq(self, mobius_cfg, tmp_path):
        assert main(["dq", "--config", str(mobius_cfg), "--out", str(tmp_path)]) == 0
        _, _, rows = read_csv(tmp_path / "dq.csv")
        assert 0.2 < float(rows[0][1]) < 0.5

    def test_figures_rendered_alongside_csv(self, cantor_cfg, tmp_path):
        for cmd, png in (
            ("pressure", "pressure.png"),
            ("dq", "dq.png"),
            ("boxcount", "boxcount.png"),
            ("compare", "compare.png"),
            ("moran", "moran.png"),
        ):
            assert (
                main([cmd, "--config", str(cantor_cfg), "--out", str(tmp_path), "--figures"])
                == 0
            )
            assert (tmp_path / png).exists(), cmd

    def test_no_figures_by_default(self, cantor_cfg, tmp_path):
        main(["dq", "--config", str(cantor_cfg), "--out", str(tmp_path)])
        assert not list(tmp_path.glob("*.png"))


class TestThreadsEnv:
    def test_qdim_threads_respected(self, cantor_cfg, tmp_path, monkeypatch):
        monkeypatch.setenv("QDIM_THREADS", "4")
        out4 = tmp_path / "t4"
        assert main(["boxcount", "--config", str(cantor_cfg), "--out", str(out4)]) == 0
        monkeypatch.setenv("QDIM_THREADS", "1")
        out1 = tmp_path / "t1"
        assert main(["boxcount", "--config", str(cantor_cfg), "--out", str(out1)]) == 0
        for name in ("boxcount_ladder.csv", "boxcount_estimates.csv"):
            assert (out4 / name).read_bytes() == (out1 / name).read_bytes()

    def test_garbage_env_falls_back(self, cantor_cfg, tmp_path, monkeypatch):
        monkeypatch.setenv("QDIM_THREADS", "many")
        assert main(["boxcount", "--config", str(cantor_cfg), "--out", str(tmp_path)]) == 0


def test_console_script_entry_point(cantor_cfg, tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "qdim.cli", "dq", "--config", str(cantor_cfg), "--out", str(tmp_path)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert (tmp_path / "dq.csv").exists()
