"""Figure rendering from the repository fixtures and synthetic artifacts."""

import numpy as np
import pytest

from beamplots import FigureSpec, read_artifact_csv, render
from beamplots.cli import main as plots_main
from beamplots.figures import ArtifactError, REFERENCE_SLOPE

from pathlib import Path

FIXTURES = Path(__file__).parent / "fixtures"


def write_csv(path, columns, rows, meta=None):
    with open(path, "w", newline="\n") as fh:
        for key, value in (meta or {}).items():
            fh.write(f"# {key} = {value}\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(f"{c:.17e}" for c in row) + "\n")


@pytest.mark.parametrize(
    "kind,csv_name",
    [
        ("spectrum-scatter", "spectrum.csv"),
        ("resolvent-loglog", "resolvent.csv"),
        ("energy-decay", "energy.csv"),
    ],
)
def test_fixture_renders(tmp_path, kind, csv_name):
    inputs = {"main": FIXTURES / csv_name}
    if kind == "energy-decay":
        inputs["spectrum"] = FIXTURES / "spectrum.csv"
    spec = FigureSpec(kind=kind, inputs=inputs, output=tmp_path / f"{kind}.png")
    result = render(spec)
    assert result.path.exists()
    assert result.path.stat().st_size > 0


def test_resolvent_overlay_labels(tmp_path):
    # synthetic lambda^{-1/8} data: the reference overlay stays -1/24 while
    # the annotated data slope reports the synthetic exponent
    lams = np.geomspace(10.0, 1e4, 25)
    rows = [(lam, 3.0 * lam ** (-1.0 / 8.0), 1) for lam in lams]
    path = tmp_path / "resolvent.csv"
    write_csv(path, ("lambda", "norm", "resolution_ok"), rows, meta={"seed": 1})
    spec = FigureSpec(
        kind="resolvent-loglog", inputs={"main": path}, output=tmp_path / "r.png"
    )
    result = render(spec)
    assert result.annotations["reference_slope"] == REFERENCE_SLOPE
    assert abs(result.annotations["data_slope"] - (-0.125)) < 1e-10


def test_energy_annotations(tmp_path):
    ts = np.linspace(0.0, 10.0, 200)
    rows = list(zip(ts, 0.5 * np.exp(-0.8 * ts)))
    path = tmp_path / "energy.csv"
    write_csv(path, ("t", "energy"), rows)
    spec = FigureSpec(kind="energy-decay", inputs={"main": path}, output=tmp_path / "e.png")
    result = render(spec)
    assert abs(result.annotations["fitted_rate"] - (-0.4)) < 1e-8


def test_empty_csv_error(tmp_path):
    path = tmp_path / "spectrum.csv"
    path.write_text("")
    spec = FigureSpec(
        kind="spectrum-scatter", inputs={"main": path}, output=tmp_path / "s.png"
    )
    with pytest.raises(ArtifactError, match="spectrum.csv"):
        render(spec)


def test_missing_column_error(tmp_path):
    path = tmp_path / "spectrum.csv"
    write_csv(path, ("re_only",), [(1.0,)])
    spec = FigureSpec(
        kind="spectrum-scatter", inputs={"main": path}, output=tmp_path / "s.png"
    )
    with pytest.raises(ArtifactError, match="'re'"):
        render(spec)


def test_missing_file_error(tmp_path):
    spec = FigureSpec(
        kind="spectrum-scatter",
        inputs={"main": tmp_path / "nope.csv"},
        output=tmp_path / "s.png",
    )
    with pytest.raises(ArtifactError, match="nope.csv"):
        render(spec)


def test_unknown_kind():
    with pytest.raises(ArtifactError, match="unknown figure kind"):
        FigureSpec(kind="pie", inputs={}, output=Path("x.png"))


def test_rendering_is_read_only_and_deterministic(tmp_path):
    src = FIXTURES / "spectrum.csv"
    before = src.read_bytes()
    out1, out2 = tmp_path / "a.png", tmp_path / "b.png"
    for out in (out1, out2):
        render(FigureSpec(kind="spectrum-scatter", inputs={"main": src}, output=out))
    assert src.read_bytes() == before
    assert out1.read_bytes() == out2.read_bytes()


def test_subtitle_carries_config_echo(tmp_path):
    meta, _ = read_artifact_csv(FIXTURES / "spectrum.csv")
    assert meta.get("ell0") is not None
    assert meta.get("seed") is not None


def test_cli_renders_all(tmp_path, capsys):
    rc = plots_main(["--in", str(FIXTURES), "--out", str(tmp_path)])
    assert rc == 0
    for name in ("spectrum.png", "resolvent.png", "energy.png"):
        assert (tmp_path / name).stat().st_size > 0
    out = capsys.readouterr().out
    assert "wrote" in out


def test_cli_missing_dir(tmp_path):
    rc = plots_main(["--in", str(tmp_path / "void"), "--out", str(tmp_path)])
    assert rc == 1
