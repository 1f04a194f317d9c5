"""Rendering from committed fixtures only: no simulation package involved."""

import sys
from pathlib import Path

import pytest

from ordkl_figures import FigureJob, SchemaError, read_envelope, read_table, render
from ordkl_figures.cli import main

FIXTURES = Path(__file__).parent / "fixtures"

JOBS = {
    "heatmap": ("phase_diagram.csv",),
    "sweep": ("mcd_sweep.csv", "census_sweep.csv"),
    "spectrum": ("spectrum_2d.csv",),
    "density": ("corner_density.csv", "corners.json"),
}


def make_job(kind, out_dir, name="img.png"):
    return FigureJob(
        kind=kind,
        inputs=tuple(FIXTURES / f for f in JOBS[kind]),
        output=out_dir / name,
    )


def test_core_library_not_imported():
    assert "ordkl" not in sys.modules


@pytest.mark.parametrize("kind", sorted(JOBS))
def test_kind_renders(kind, tmp_path):
    path = render(make_job(kind, tmp_path))
    assert path.exists()
    data = path.read_bytes()
    assert data[:8] == b"\x89PNG\r\n\x1a\n"
    assert len(data) > 5000


@pytest.mark.parametrize("kind", sorted(JOBS))
def test_byte_stable(kind, tmp_path):
    a = render(make_job(kind, tmp_path, "a.png")).read_bytes()
    b = render(make_job(kind, tmp_path, "b.png")).read_bytes()
    assert a == b


def test_unknown_schema_rejected(tmp_path):
    bad = tmp_path / "bad.csv"
    good = (FIXTURES / "mcd_sweep.csv").read_text().splitlines()
    bad.write_text("\n".join(["# schema_version=99"] + good[1:]) + "\n")
    with pytest.raises(SchemaError):
        render(FigureJob(kind="sweep", inputs=(bad,), output=tmp_path / "x.png"))


def test_missing_marker_rejected(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("value,c0bar\n1,2\n")
    with pytest.raises(SchemaError):
        read_table(bad)


def test_envelope_version_checked(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"schema_version": "99", "payload": {}}')
    with pytest.raises(SchemaError):
        read_envelope(bad)


def test_unknown_kind_rejected(tmp_path):
    with pytest.raises(SchemaError):
        FigureJob(kind="pie", inputs=("x.csv",), output=tmp_path / "x.png")


def test_cli_round_trip(tmp_path):
    out = tmp_path / "sweep.png"
    code = main([
        "render", "--kind", "sweep",
        "--in", str(FIXTURES / "mcd_sweep.csv"), str(FIXTURES / "census_sweep.csv"),
        "--out", str(out),
    ])
    assert code == 0
    assert out.exists()


def test_cli_schema_error_exit_code(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("nope\n")
    code = main(["render", "--kind", "sweep", "--in", str(bad),
                 "--out", str(tmp_path / "x.png")])
    assert code == 2


def test_all_fixture_tables_parse():
    # round-trip guarantee: every emitted table format is consumable here
    for name in ("phase_diagram.csv", "mcd_sweep.csv", "census_sweep.csv",
                 "spectrum_2d.csv", "spectrum_x.csv", "spectrum_y.csv",
                 "corner_density.csv"):
        rows = read_table(FIXTURES / name)
        assert rows
    for name in ("phase_diagram.json", "corners.json", "mcd.json",
                 "spectrum.json"):
        body = read_envelope(FIXTURES / name)
        assert body["payload"]
