"""Figure builders and the deterministic renderer.

Every figure is a pure function of its input CSVs and the spec: fonts,
sizes, and ids are pinned, no clock or RNG is consulted, so re-rendering
the same spec yields byte-identical image files.
"""

from __future__ import annotations

import os
import pathlib

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .readers import Frame, read_frame
from .spec import FigureSpec

_RC = {
    "font.family": "DejaVu Sans",
    "font.size": 10.0,
    "axes.titlesize": 11.0,
    "svg.hashsalt": "make-figures",
    "path.simplify": False,
}


def load_frames(spec: FigureSpec) -> list[Frame]:
    spec.validate()
    return [read_frame(p, spec.kind) for p in spec.input_paths()]


def _series_labels(spec: FigureSpec, frames) -> list[str]:
    labels = spec.styled()["labels"]
    if labels:
        return list(labels)
    if len(frames) == 1:
        return [""]
    return [f.path.stem for f in frames]


def _finish(ax, spec: FigureSpec):
    style = spec.styled()
    if style["title"]:
        ax.set_title(style["title"])
    if style["grid"]:
        ax.grid(True, which="both", alpha=0.3)
    if ax.get_legend_handles_labels()[1]:
        ax.legend(loc="best", fontsize=9)


def _build_envelope(spec, frames, fig, ax):
    labels = _series_labels(spec, frames)
    for frame, label in zip(frames, labels):
        scale = frame["scale"]
        c_hat = frame["c_hat"]
        passed = frame["pass"]
        name = label or "max ratio"
        line, = ax.plot(scale, c_hat, label=name)
        # open markers flag scales whose pass fraction fell short
        faces = [line.get_color() if p >= 0.5 else "white" for p in passed]
        ax.scatter(scale, c_hat, facecolors=faces,
                   edgecolors=line.get_color(), zorder=3)
    c_theory = float(frames[0]["c_theory"][0])
    ax.axhline(c_theory, color="black", linestyle="--",
               label=f"theory constant {c_theory:.1f}")
    ax.set_xscale("log", base=2)
    ax.set_xlabel("window width")
    ax.set_ylabel("envelope ratio sup H / h")


def _build_dimension(spec, frames, fig, ax):
    labels = _series_labels(spec, frames)
    for frame, label in zip(frames, labels):
        inv = 1.0 / frame["scale"]
        counts = frame["count"]
        slope = float(frame["slope"][0])
        lo, hi = float(frame["ci_lo"][0]), float(frame["ci_hi"][0])
        name = label or "box counts"
        line, = ax.loglog(inv, counts, "o", label=name)
        # anchor the reported slope at the log-mean of the points
        lx, ly = np.log(inv), np.log(counts)
        anchor = ly.mean() - slope * lx.mean()
        fit = np.exp(anchor + slope * lx)
        ax.loglog(inv, fit, "-", color=line.get_color(),
                  label=f"slope {slope:.2f} [{lo:.2f}, {hi:.2f}]")
    ax.set_xlabel("1 / box size")
    ax.set_ylabel("occupied boxes")


def _build_tm_decay(spec, frames, fig, ax):
    labels = _series_labels(spec, frames)
    for frame, label in zip(frames, labels):
        m = frame["m"]
        prefix = f"{label}: " if label else ""
        pts = ax.errorbar(m, frame["mean"], yerr=frame["stderr"],
                          fmt="o", capsize=3, label=f"{prefix}MC mean")
        color = pts.lines[0].get_color()
        ax.plot(m, frame["bound_lambda"], "-", color=color, alpha=0.7,
                label=f"{prefix}rate-sum bound")
        ax.plot(m, frame["bound_gamma"], "--", color=color, alpha=0.7,
                label=f"{prefix}chain bound")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("target block count m")
    ax.set_ylabel("mean time to m blocks")


def _build_cdi_trend(spec, frames, fig, ax_unused):
    fig.clf()
    methods = []
    for frame in frames:
        for name in frame["method"]:
            if name not in methods:
                methods.append(name)
    axes = fig.subplots(1, len(methods), squeeze=False)[0]
    labels = _series_labels(spec, frames)
    for ax, method in zip(axes, methods):
        for frame, label in zip(frames, labels):
            mask = np.array([m == method for m in frame["method"]])
            if not mask.any():
                continue
            level = frame["level"][mask]
            value = frame["value"][mask]
            verdict = [v for v, keep in zip(frame["verdict"], mask)
                       if keep][0]
            name = f"{label}: {verdict}" if label else verdict
            ax.semilogx(level, value, marker="o", label=name)
        ax.set_title(method)
        ax.set_xlabel("level")
        style = spec.styled()
        if style["grid"]:
            ax.grid(True, which="both", alpha=0.3)
        ax.legend(loc="best", fontsize=9)
    axes[0].set_ylabel("partial value")
    style = spec.styled()
    if style["title"]:
        fig.suptitle(style["title"])
    return True


def _build_radius(spec, frames, fig, ax):
    labels = _series_labels(spec, frames)
    for frame, label in zip(frames, labels):
        ax.plot(frame["t"], frame["ratio"], "o", markersize=3,
                alpha=0.7, label=label or None)
    ax.set_xscale("log")
    ax.set_xlabel("t")
    ax.set_ylabel("radius / h(t)")


_BUILDERS = {
    "envelope": _build_envelope,
    "dimension": _build_dimension,
    "tm_decay": _build_tm_decay,
    "cdi_trend": _build_cdi_trend,
    "radius": _build_radius,
}


def build_figure(spec: FigureSpec):
    """Build (but do not save) the matplotlib figure for a spec."""
    frames = load_frames(spec)
    style = spec.styled()
    with matplotlib.rc_context(_RC):
        fig, ax = plt.subplots(figsize=tuple(style["figsize"]),
                               dpi=style["dpi"])
        handled_own_finish = _BUILDERS[spec.kind](spec, frames, fig, ax)
        if not handled_own_finish:
            _finish(ax, spec)
        fig.tight_layout()
    return fig


def render(spec: FigureSpec, out_dir=None) -> pathlib.Path:
    """Render the figure to spec.output (resolved against out_dir)."""
    target = spec.output_path(out_dir)
    target.parent.mkdir(parents=True, exist_ok=True)
    suffix = target.suffix.lower()
    with matplotlib.rc_context(_RC):
        fig = build_figure(spec)
        tmp = target.with_name(target.name + ".tmp")
        try:
            if suffix == ".svg":
                fig.savefig(tmp, format="svg", metadata={"Date": None})
            else:
                fig.savefig(tmp, format="png",
                            metadata={"Software": "make-figures"})
        finally:
            plt.close(fig)
    os.replace(tmp, target)
    return target
