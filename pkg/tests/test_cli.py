"""Command-line surface: config handling, dispatch, deterministic output."""

import json
import subprocess
import sys
from pathlib import Path

import pytest

from ordkl.cli import (
    GRID_CSV_COLUMNS,
    RunConfig,
    build_parser,
    fmt,
    load_config,
    main,
    run,
)
from ordkl.errors import ConfigError


def read_csv(path: Path):
    lines = path.read_text().splitlines()
    assert lines[0] == "# schema_version=1"
    header = lines[1].split(",")
    rows = [line.split(",") for line in lines[2:]]
    return header, rows


def run_cli(argv, cwd=None):
    return main(argv)


class TestConfig:
    def test_defaults_validate(self):
        config = RunConfig(command="validate")
        config.validate()

    def test_rejects_bad_values(self):
        with pytest.raises(ConfigError):
            RunConfig(command="nope").validate()
        with pytest.raises(ConfigError):
            RunConfig(command="mcd", k2=-1.0).validate()
        with pytest.raises(ConfigError):
            RunConfig(command="mcd", size=31).validate()
        with pytest.raises(ConfigError):
            RunConfig(command="mcd", formats=("xml",)).validate()
        with pytest.raises(ConfigError):
            RunConfig(command="corners", sweep_samples=3, sweep_axis="k9").validate()

    def test_pi_unit_conversion(self):
        config = RunConfig(command="mcd", k1=0.5, k2=3.5, k3=0.5, k4=1.5)
        params = config.params()
        assert params.k2 == pytest.approx(3.5 * 3.141592653589793)

    def test_file_then_flags_precedence(self, tmp_path):
        cfg = tmp_path / "run.yaml"
        cfg.write_text("k1: 0.5\nk2: 2.5\nsize: 100\ntmax: 7\n")
        parser = build_parser()
        args = parser.parse_args(
            ["mcd", "--config", str(cfg), "--k2", "3.5", "--out", str(tmp_path)]
        )
        config = load_config("mcd", args)
        assert config.k1 == 0.5        # from file
        assert config.k2 == 3.5        # flag wins
        assert config.size == 100
        assert config.tmax == 7

    def test_unknown_config_key_rejected(self, tmp_path):
        cfg = tmp_path / "run.yaml"
        cfg.write_text("k1: 0.5\nuh_oh: 1\n")
        parser = build_parser()
        args = parser.parse_args(["mcd", "--config", str(cfg)])
        with pytest.raises(ConfigError):
            load_config("mcd", args)

    def test_float_formatting(self):
        assert fmt(3.5) == "3.5"
        assert fmt(1 / 3) == "0.333333333333"
        assert fmt(7) == "7"


class TestCommands:
    def test_corners_census_json(self, tmp_path):
        code = run_cli([
            "corners", "--k1", "0.5", "--k2", "3.5", "--k3", "0.5",
            "--k4", "1.5", "--size", "200", "--out", str(tmp_path),
        ])
        assert code == 0
        body = json.loads((tmp_path / "corners.json").read_text())
        assert body["schema_version"] == "1"
        payload = body["payload"]
        assert (payload["n0"], payload["npi"]) == (8, 4)
        assert payload["invariant_check"] is True
        for sector, total in (("zero", 8), ("pi", 4)):
            assert sum(payload["per_corner"][sector].values()) == total
        # density rows rebuild normalized per-mode maps up to the prune cut
        header, rows = read_csv(tmp_path / "corner_density.csv")
        assert header == ["sector", "corner", "mode", "nx", "ny", "prob"]
        mass = {}
        for sector, corner, mode, nx, ny, prob in rows:
            key = (sector, corner, mode)
            mass[key] = mass.get(key, 0.0) + float(prob)
        assert len(mass) == 12
        assert all(abs(total - 1.0) < 1e-6 for total in mass.values())

    def test_phase_diagram_grid_csv(self, tmp_path):
        code = run_cli([
            "phase-diagram", "--k1", "0.5", "--k3", "0.5",
            "--scan-axes", "k2,k4", "--scan-range-1", "0.3:4.7",
            "--scan-range-2", "0.3:4.7", "--grid", "6x6",
            "--workers", "1", "--out", str(tmp_path),
        ])
        assert code == 0
        header, rows = read_csv(tmp_path / "phase_diagram.csv")
        assert tuple(header) == GRID_CSV_COLUMNS
        assert len(rows) == 36
        clean = [r for r in rows if r[8] == "0"]
        assert clean, "expected invariant cells"
        for row in clean:
            w0x, wpix, w0y, wpiy, w0, wpi = (int(v) for v in row[2:8])
            assert w0 == abs(w0x * w0y) + abs(wpix * wpiy)
            assert wpi == abs(w0x * wpiy) + abs(wpix * w0y)

    def test_mcd_trace(self, tmp_path):
        code = run_cli([
            "mcd", "--k1", "0.5", "--k2", "3.5", "--k3", "0.5", "--k4", "1.5",
            "--tmax", "5", "--out", str(tmp_path),
        ])
        assert code == 0
        header, rows = read_csv(tmp_path / "mcd_trace.csv")
        assert header == ["t", "c1", "c2", "c3", "c4", "c13", "c14", "c23", "c24"]
        assert len(rows) == 5
        for row in rows:
            c1, c2, c3, c4, c13 = (float(v) for v in row[1:6])
            assert c13 == pytest.approx(c1 * c3, abs=1e-9)

    def test_mcd_sweep(self, tmp_path):
        code = run_cli([
            "mcd", "--k1", "0.5", "--k2", "3.5", "--k3", "0.5",
            "--sweep", "k4", "--sweep-range", "0.4:1.6", "--sweep-samples", "2",
            "--tmax", "5", "--out", str(tmp_path),
        ])
        assert code == 0
        header, rows = read_csv(tmp_path / "mcd_sweep.csv")
        assert header == ["value", "c0bar", "cpibar", "w0", "wpi", "boundary_flag"]
        assert [row[0] for row in rows] == ["0.4", "1.6"]
        assert [row[3] for row in rows] == ["0", "2"]

    def test_boundaries(self, tmp_path):
        code = run_cli([
            "boundaries", "--grid", "5x2", "--scan-range-1", "1:3",
            "--scan-range-2", "0.4:0.6", "--boundary-tol", "1e-9",
            "--out", str(tmp_path),
        ])
        assert code == 0
        header, rows = read_csv(tmp_path / "boundaries.csv")
        hits = [r for r in rows if r[6] == "1"]
        # the first scan axis passes through k2 = 2pi exactly
        assert any(r[0] == "2" and r[2] == "x" for r in hits)

    def test_validate_clean(self, tmp_path):
        code = run_cli(["validate", "--out", str(tmp_path)])
        assert code == 0
        body = json.loads((tmp_path / "validate.json").read_text())
        assert body["payload"]["passed"] is True
        assert body["warnings"] == []

    def test_spectrum(self, tmp_path):
        code = run_cli([
            "spectrum", "--k1", "0.5", "--k2", "3.5", "--k3", "0.5",
            "--k4", "1.5", "--size", "60", "--out", str(tmp_path),
        ])
        assert code == 0
        for name in ("spectrum_x.csv", "spectrum_y.csv", "spectrum_2d.csv"):
            assert (tmp_path / name).exists()
        _, rows = read_csv(tmp_path / "spectrum_2d.csv")
        assert len(rows) == 3600


class TestDeterminism:
    def test_identical_runs_byte_identical(self, tmp_path):
        outs = []
        for sub in ("a", "b"):
            out = tmp_path / sub
            run_cli([
                "phase-diagram", "--k1", "0.5", "--k3", "0.5",
                "--scan-axes", "k2,k4", "--scan-range-1", "0.3:4.7",
                "--scan-range-2", "0.3:4.7", "--grid", "5x5",
                "--workers", "1", "--out", str(out),
            ])
            outs.append(out)
        for name in ("phase_diagram.csv", "phase_diagram.json"):
            assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()

    def test_worker_count_does_not_change_bytes(self, tmp_path):
        outs = []
        for sub, workers in (("w1", "1"), ("w3", "3")):
            out = tmp_path / sub
            run_cli([
                "phase-diagram", "--k1", "0.5", "--k3", "0.5",
                "--scan-axes", "k2,k4", "--scan-range-1", "0.3:4.7",
                "--scan-range-2", "0.3:4.7", "--grid", "5x5",
                "--workers", workers, "--out", str(out),
            ])
            outs.append(out)
        assert ((outs[0] / "phase_diagram.csv").read_bytes()
                == (outs[1] / "phase_diagram.csv").read_bytes())

    def test_config_echo_excludes_timing(self, tmp_path):
        run_cli(["validate", "--out", str(tmp_path)])
        body = json.loads((tmp_path / "validate.json").read_text())
        assert "elapsed" not in json.dumps(body)


class TestErrors:
    def test_config_error_exit_code(self, capsys):
        code = run_cli(["mcd", "--size", "31"])
        assert code == 2
        err = capsys.readouterr().err
        assert json.loads(err.splitlines()[0])["error"] == "config"

    def test_model_error_surfaces(self, tmp_path, capsys):
        # exactly on a boundary: windings are undefined
        code = run_cli([
            "corners", "--k1", "0.5", "--k2", "2.0", "--k3", "0.5",
            "--k4", "1.5", "--size", "60", "--out", str(tmp_path),
        ])
        assert code == 1
        err = capsys.readouterr().err
        assert "GaplessPoint" in err

    def test_console_script_installed(self):
        proc = subprocess.run(
            [sys.executable, "-m", "ordkl.cli", "--version"],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0
