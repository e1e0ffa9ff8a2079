"""Acceptance check for figure generation, printed as one verdict line."""

import csv
import time

import numpy as np

from fv_figures import FigureSpec, KINDS, build_figure, render

_FIXTURE_FOR = {
    "envelope": "envelope_kingman.csv",
    "dimension": "dimension_square.csv",
    "tm_decay": "tm_kingman.csv",
    "cdi_trend": "cdi_kingman.csv",
    "radius": "radius_kingman.csv",
}


def _column(path, name):
    with open(path, newline="") as fh:
        return [float(row[name]) for row in csv.DictReader(fh)]


def _labeled_ys(fig, prefix):
    for ax in fig.axes:
        for artist in list(ax.lines) + list(ax.containers):
            label = artist.get_label()
            if isinstance(label, str) and label.startswith(prefix):
                line = artist if hasattr(artist, "get_ydata") \
                    else artist.lines[0]
                return np.asarray(line.get_ydata(), dtype=float)
    return None


def test_figures_render_with_correct_overlays(capsys, fixtures, tmp_path):
    t0 = time.time()
    rendered = 0
    identical = True
    for kind in KINDS:
        blobs = []
        for sub in ("a", "b"):
            spec = FigureSpec.from_dict(
                {"kind": kind,
                 "inputs": [str(fixtures / _FIXTURE_FOR[kind])],
                 "output": f"{kind}.png"})
            target = render(spec, out_dir=tmp_path / sub)
            blobs.append(target.read_bytes())
        rendered += 1
        identical = identical and blobs[0] == blobs[1] \
            and blobs[0][:8] == b"\x89PNG\r\n\x1a\n"

    env = build_figure(FigureSpec.from_dict(
        {"kind": "envelope",
         "inputs": [str(fixtures / _FIXTURE_FOR["envelope"])],
         "output": "e.png"}))
    c_theory = _column(fixtures / _FIXTURE_FOR["envelope"], "c_theory")[0]
    ref = _labeled_ys(env, "theory constant")
    envelope_ok = ref is not None and np.allclose(ref, c_theory)

    tm = build_figure(FigureSpec.from_dict(
        {"kind": "tm_decay",
         "inputs": [str(fixtures / _FIXTURE_FOR["tm_decay"])],
         "output": "t.png"}))
    bound = _column(fixtures / _FIXTURE_FOR["tm_decay"], "bound_lambda")
    means = _column(fixtures / _FIXTURE_FOR["tm_decay"], "mean")
    drawn = _labeled_ys(tm, "rate-sum bound")
    tm_ok = (drawn is not None and np.allclose(drawn, bound)
             and all(m < b for m, b in zip(means, bound)))

    elapsed = time.time() - t0
    ok = (rendered == len(KINDS) and identical and envelope_ok and tm_ok
          and elapsed < 30.0)
    with capsys.disabled():
        print(f"[{'PASS' if ok else 'FAIL'}] figure generation: "
              f"{rendered}/{len(KINDS)} kinds rendered, byte-identical "
              f"re-render: {identical}, envelope reference == c_theory: "
              f"{envelope_ok}, decay bound overlay from CSV with MC "
              f"points below: {tm_ok}, {elapsed:.1f}s")
    assert ok
