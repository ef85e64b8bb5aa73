import json
import math

import numpy as np
import pytest

from berrygate.cli import (EXIT_CONFIG, EXIT_IO, EXIT_NUMERICAL, EXIT_OK,
                           main)
from berrygate.scenario import SCHEMA_VERSION


def _write_cfg(tmp_path, extra=None, name="cfg.json"):
    cfg = {"schema": SCHEMA_VERSION,
           "model": {"include_decay": False},
           "propagation": {"rel_tol": 1e-8, "abs_tol": 1e-10}}
    for section, value in (extra or {}).items():
        cfg.setdefault(section, {}).update(value)
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


class TestRap:
    def test_outputs(self, tmp_path, capsys):
        cfg = _write_cfg(tmp_path)
        rc = main(["rap", "--config", cfg, "--out", str(tmp_path)])
        assert rc == EXIT_OK
        summary = json.loads((tmp_path / "rap_summary.json").read_text())
        assert summary["transfer_probability"] > 0.999
        assert 0.0 < summary["adiabaticity_max"] < 1.0
        traj = (tmp_path / "rap_trajectory.csv").read_text().splitlines()
        assert traj[0].startswith("# config_hash=")
        assert "rap: transfer=" in capsys.readouterr().out

    def test_dry_run_prints_resolved_config(self, tmp_path, capsys):
        cfg = _write_cfg(tmp_path)
        rc = main(["rap", "--config", cfg, "--dry-run"])
        assert rc == EXIT_OK
        resolved = json.loads(capsys.readouterr().out)
        assert resolved["pulse"]["count"] == 1
        assert resolved["pulse"]["area_pi"] == 6.0
        assert not list(tmp_path.glob("*.csv"))


class TestGate:
    def test_outputs(self, tmp_path, capsys):
        cfg = _write_cfg(tmp_path)
        rc = main(["gate", "--config", cfg, "--out", str(tmp_path)])
        assert rc == EXIT_OK
        gate = json.loads((tmp_path / "gate.json").read_text())
        assert gate["fidelity"] > 0.999
        assert gate["leakage"] < 1e-3
        assert gate["ideal_rotation_angle_rad"] == pytest.approx(math.pi)
        for tag in ("sigma_plus", "sigma_minus"):
            lines = (tmp_path / f"bloch_{tag}.csv").read_text().splitlines()
            header = [ln for ln in lines if not ln.startswith("#")][0]
            assert header == "t_ps,x,y,z"

    def test_decay_flag_override(self, tmp_path):
        cfg = _write_cfg(tmp_path)
        rc = main(["gate", "--config", cfg, "--out", str(tmp_path),
                   "--decay", "on"])
        assert rc == EXIT_OK
        gate = json.loads((tmp_path / "gate.json").read_text())
        assert gate["fidelity"] > 0.99


class TestRamsey:
    def test_fit_recovers_hyperfine_frequency(self, tmp_path, capsys):
        cfg = _write_cfg(tmp_path)
        rc = main(["ramsey", "--config", cfg, "--out", str(tmp_path)])
        assert rc == EXIT_OK
        fit = json.loads((tmp_path / "ramsey_fit.json").read_text())
        assert fit["converged"]
        assert fit["params"]["f_r_ghz"] == pytest.approx(6.8346826109,
                                                         rel=1e-4)
        rows = [ln for ln in
                (tmp_path / "ramsey.csv").read_text().splitlines()
                if not ln.startswith("#")]
        assert rows[0] == "delta_t_ps,probability"
        assert len(rows) == 1 + 31


class TestSweep:
    def test_preset_run(self, tmp_path, capsys):
        rc = main(["sweep", "--preset", "figS1c", "--grid", "3",
                   "--out", str(tmp_path), "--decay", "off"])
        assert rc == EXIT_OK
        csvs = list(tmp_path.glob("figS1c_*.csv"))
        jsons = list(tmp_path.glob("figS1c_*.json"))
        assert len(csvs) == 1 and len(jsons) == 1
        data = json.loads(jsons[0].read_text())
        assert np.asarray(data["values"]).shape == (3, 3)

    def test_config_sweep_block(self, tmp_path):
        cfg = _write_cfg(tmp_path, extra={
            "sweep": {"observable": "fidelity",
                      "axes": [{"path": "pulse.area_pi",
                                "values": [6.0, 8.0]}]}})
        rc = main(["sweep", "--config", cfg, "--out", str(tmp_path)])
        assert rc == EXIT_OK
        assert list(tmp_path.glob("sweep_*.csv"))

    def test_dry_run(self, tmp_path, capsys):
        rc = main(["sweep", "--preset", "figS1a", "--grid", "5",
                   "--dry-run"])
        assert rc == EXIT_OK
        plan = json.loads(capsys.readouterr().out)
        assert plan["axes"] == [
            {"path": "pulse.spectral_width_thz", "points": 5},
            {"path": "pulse.chirp_ps2", "points": 5}]

    def test_missing_sweep_block_is_config_error(self, tmp_path, capsys):
        cfg = _write_cfg(tmp_path)
        rc = main(["sweep", "--config", cfg, "--out", str(tmp_path)])
        assert rc == EXIT_CONFIG


class TestFit:
    def test_fringe_fit_from_csv(self, tmp_path, capsys):
        theta = np.linspace(0.0, math.pi, 21)
        p = 0.8 * np.sin(theta + 0.1) ** 2 + 0.05
        path = tmp_path / "fringe.csv"
        path.write_text("# comment\ntheta,p\n" + "\n".join(
            f"{t},{v}" for t, v in zip(theta, p)))
        rc = main(["fit", str(path), "--model", "fringe",
                   "--out", str(tmp_path)])
        assert rc == EXIT_OK
        out = json.loads((tmp_path / "fit.json").read_text())
        assert out["model"] == "fringe"
        assert out["params"]["dtheta"] == pytest.approx(0.1, abs=1e-6)

    def test_empty_csv_is_numerical_error(self, tmp_path, capsys):
        path = tmp_path / "empty.csv"
        path.write_text("# nothing\n")
        rc = main(["fit", str(path), "--model", "ramsey"])
        assert rc == EXIT_NUMERICAL

    def test_missing_file_is_io_error(self, tmp_path, capsys):
        rc = main(["fit", str(tmp_path / "nope.csv"), "--model", "fringe"])
        assert rc == EXIT_IO


class TestErrorPaths:
    def test_invalid_config_exits_2(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"schema": SCHEMA_VERSION,
                                   "pulse": {"bogus_key": 1}}))
        rc = main(["gate", "--config", str(bad)])
        assert rc == EXIT_CONFIG
        assert "config error" in capsys.readouterr().err

    def test_malformed_json_exits_2(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{")
        assert main(["rap", "--config", str(bad)]) == EXIT_CONFIG

    def test_version_flag(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["--version"])
        assert exc.value.code == 0
