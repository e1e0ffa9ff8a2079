import csv
import pathlib

import numpy as np
import pytest

from fv_figures import (
    EmptyInput,
    FigureSpec,
    MissingColumn,
    build_figure,
    read_frame,
    render,
)
from fv_figures.cli import main

_FIXTURE_FOR = {
    "envelope": "envelope_kingman.csv",
    "dimension": "dimension_square.csv",
    "tm_decay": "tm_kingman.csv",
    "cdi_trend": "cdi_kingman.csv",
    "radius": "radius_kingman.csv",
}


def _column(path, name):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [row[name] for row in rows]


def _line_by_label(fig, prefix):
    for ax in fig.axes:
        for line in ax.lines:
            label = line.get_label()
            if isinstance(label, str) and label.startswith(prefix):
                return line
        for box in ax.containers:
            label = box.get_label()
            if isinstance(label, str) and label.startswith(prefix):
                return box.lines[0]
    raise AssertionError(f"no line labeled {prefix!r}")


@pytest.mark.parametrize("kind", sorted(_FIXTURE_FOR))
def test_each_kind_renders_a_png(kind, fixtures, tmp_path):
    spec = FigureSpec.from_dict(
        {"kind": kind, "inputs": [str(fixtures / _FIXTURE_FOR[kind])],
         "output": f"{kind}.png"})
    target = render(spec, out_dir=tmp_path)
    assert target == tmp_path / f"{kind}.png"
    blob = target.read_bytes()
    assert blob[:8] == b"\x89PNG\r\n\x1a\n"
    assert len(blob) > 5000


def test_envelope_reference_line_is_the_csv_constant(fixtures):
    path = fixtures / "envelope_kingman.csv"
    spec = FigureSpec.from_dict({"kind": "envelope",
                                 "inputs": [str(path)],
                                 "output": "e.png"})
    fig = build_figure(spec)
    c_theory = float(_column(path, "c_theory")[0])
    ref = _line_by_label(fig, "theory constant")
    assert np.allclose(ref.get_ydata(), c_theory)
    series = _line_by_label(fig, "max ratio")
    assert len(series.get_xdata()) == 3
    expected = [float(v) for v in _column(path, "c_hat")]
    assert np.allclose(series.get_ydata(), expected)


def test_dimension_annotates_the_csv_slope_verbatim(fixtures):
    path = fixtures / "dimension_square.csv"
    spec = FigureSpec.from_dict({"kind": "dimension",
                                 "inputs": [str(path)],
                                 "output": "d.png"})
    fig = build_figure(spec)
    slope = float(_column(path, "slope")[0])
    fit = _line_by_label(fig, f"slope {slope:.2f}")
    x = np.log(fit.get_xdata())
    y = np.log(fit.get_ydata())
    drawn = (y[-1] - y[0]) / (x[-1] - x[0])
    assert abs(drawn - slope) < 1e-9
    assert abs(slope - 2.0) < 0.1


def test_tm_decay_overlays_the_bound_columns(fixtures):
    path = fixtures / "tm_kingman.csv"
    spec = FigureSpec.from_dict({"kind": "tm_decay",
                                 "inputs": [str(path)],
                                 "output": "t.png"})
    fig = build_figure(spec)
    bound = [float(v) for v in _column(path, "bound_lambda")]
    means = [float(v) for v in _column(path, "mean")]
    line = _line_by_label(fig, "rate-sum bound")
    assert np.allclose(line.get_ydata(), bound)
    pts = _line_by_label(fig, "MC mean")
    assert np.allclose(pts.get_ydata(), means)
    # the fixture run keeps every MC point under the rendered bound
    assert all(m < b for m, b in zip(means, bound))
    chain = _line_by_label(fig, "chain bound")
    expected = [float(v) for v in _column(path, "bound_gamma")]
    assert np.allclose(chain.get_ydata(), expected)


def test_cdi_trend_draws_one_panel_per_method(fixtures):
    path = fixtures / "cdi_kingman.csv"
    spec = FigureSpec.from_dict({"kind": "cdi_trend",
                                 "inputs": [str(path)],
                                 "output": "c.png"})
    fig = build_figure(spec)
    titles = sorted(ax.get_title() for ax in fig.axes)
    assert titles == ["gamma_series", "psi_integral"]
    verdicts = {line.get_label() for ax in fig.axes for line in ax.lines}
    assert "ComesDown" in verdicts


def test_radius_plots_every_row(fixtures):
    path = fixtures / "radius_kingman.csv"
    spec = FigureSpec.from_dict({"kind": "radius",
                                 "inputs": [str(path)],
                                 "output": "r.png"})
    fig = build_figure(spec)
    n_rows = len(_column(path, "t"))
    assert len(fig.axes[0].lines[0].get_xdata()) == n_rows


def test_two_inputs_become_labeled_series(fixtures):
    path = str(fixtures / "radius_kingman.csv")
    spec = FigureSpec.from_dict({"kind": "radius",
                                 "inputs": [path, path],
                                 "output": "r.png",
                                 "style": {"labels": ["run a", "run b"]}})
    fig = build_figure(spec)
    labels = [line.get_label() for line in fig.axes[0].lines]
    assert labels == ["run a", "run b"]


def test_missing_column_names_the_column(fixtures, tmp_path):
    src = (fixtures / "envelope_kingman.csv").read_text().splitlines()
    header = src[0].split(",")
    keep = [i for i, h in enumerate(header) if h != "c_theory"]
    trimmed = tmp_path / "envelope.csv"
    trimmed.write_text("\n".join(
        ",".join(line.split(",")[i] for i in keep) for line in src) + "\n")
    with pytest.raises(MissingColumn, match="c_theory"):
        read_frame(trimmed, "envelope")


def test_empty_input_is_rejected(tmp_path):
    header_only = tmp_path / "radius.csv"
    header_only.write_text("t,ratio\n")
    with pytest.raises(EmptyInput):
        read_frame(header_only, "radius")
    empty = tmp_path / "none.csv"
    empty.write_text("")
    with pytest.raises(EmptyInput):
        read_frame(empty, "radius")


@pytest.mark.parametrize("ext", ["png", "svg"])
def test_rerender_is_byte_identical(fixtures, tmp_path, ext):
    blobs = []
    for sub in ("a", "b"):
        spec = FigureSpec.from_dict(
            {"kind": "envelope",
             "inputs": [str(fixtures / "envelope_kingman.csv")],
             "output": f"fig.{ext}",
             "style": {"title": "envelope"}})
        target = render(spec, out_dir=tmp_path / sub)
        blobs.append(target.read_bytes())
    assert blobs[0] == blobs[1]


def test_cli_renders_and_reports_the_path(fixtures, tmp_path, capsys):
    spec_path = tmp_path / "fig.json"
    spec_path.write_text(
        '{"kind": "radius", "inputs": ["%s"], "output": "r.png"}'
        % (fixtures / "radius_kingman.csv"))
    code = main(["--spec", str(spec_path), "--out", str(tmp_path)])
    captured = capsys.readouterr()
    assert code == 0
    assert captured.out.startswith("wrote ")
    assert (tmp_path / "r.png").exists()


def test_cli_exit_codes(fixtures, tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"kind": "nope", "inputs": ["x.csv"], '
                   '"output": "r.png"}')
    assert main(["--spec", str(bad), "--out", str(tmp_path)]) == 2
    assert "spec error:" in capsys.readouterr().err

    header_only = tmp_path / "radius.csv"
    header_only.write_text("t,ratio\n")
    data_err = tmp_path / "empty.json"
    data_err.write_text('{"kind": "radius", "inputs": ["radius.csv"], '
                        '"output": "r.png"}')
    assert main(["--spec", str(data_err), "--out", str(tmp_path)]) == 1
    assert "error:" in capsys.readouterr().err
