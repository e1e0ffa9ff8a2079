"""Figure specs: what to read, which figure kind, where to write."""

from __future__ import annotations

import json
import pathlib
from dataclasses import dataclass, field

from .errors import SpecError

KINDS = ("envelope", "dimension", "tm_decay", "cdi_trend", "radius")

_STYLE_DEFAULTS = {
    "title": "",
    "dpi": 120,
    "figsize": (6.4, 4.4),
    "labels": (),
    "grid": True,
}

_SUFFIXES = (".png", ".svg")


@dataclass
class FigureSpec:
    """One figure: input CSVs, a kind, styling knobs, an output path.

    labels, when given, must name each input in order; they become legend
    entries.  Relative input paths are resolved against base_dir (the spec
    file's directory when loaded from disk).
    """

    kind: str
    inputs: list[str]
    output: str
    style: dict = field(default_factory=dict)
    base_dir: str = "."

    @classmethod
    def from_dict(cls, raw: dict, base_dir: str = ".") -> "FigureSpec":
        if not isinstance(raw, dict):
            raise SpecError("figure spec must be a JSON object")
        known = {"kind", "inputs", "output", "style"}
        extra = sorted(set(raw) - known)
        if extra:
            raise SpecError(f"unknown spec field(s): {', '.join(extra)}")
        for req in ("kind", "inputs", "output"):
            if req not in raw:
                raise SpecError(f"spec is missing {req!r}")
        return cls(kind=raw["kind"], inputs=list(raw["inputs"]),
                   output=raw["output"], style=dict(raw.get("style", {})),
                   base_dir=base_dir)

    @classmethod
    def from_file(cls, path) -> "FigureSpec":
        p = pathlib.Path(path)
        try:
            raw = json.loads(p.read_text())
        except OSError as exc:
            raise SpecError(f"cannot read spec {p}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise SpecError(f"spec {p} is not valid JSON: {exc}") from exc
        return cls.from_dict(raw, base_dir=str(p.parent))

    def validate(self) -> None:
        if self.kind not in KINDS:
            raise SpecError(f"unknown figure kind {self.kind!r}; "
                            f"expected one of {', '.join(KINDS)}")
        if not self.inputs:
            raise SpecError("inputs must list at least one CSV path")
        for p in self.input_paths():
            if not p.is_file():
                raise SpecError(f"input CSV does not exist: {p}")
        suffix = pathlib.Path(self.output).suffix.lower()
        if suffix not in _SUFFIXES:
            raise SpecError(f"output must end in one of "
                            f"{', '.join(_SUFFIXES)}, got {self.output!r}")
        extra = sorted(set(self.style) - set(_STYLE_DEFAULTS))
        if extra:
            raise SpecError(f"unknown style key(s): {', '.join(extra)}")
        merged = self.styled()
        if not isinstance(merged["title"], str):
            raise SpecError("style.title must be a string")
        if not isinstance(merged["dpi"], int) or merged["dpi"] < 30:
            raise SpecError("style.dpi must be an integer >= 30")
        fs = merged["figsize"]
        if len(fs) != 2 or any(float(v) <= 0 for v in fs):
            raise SpecError("style.figsize must be two positive numbers")
        labels = merged["labels"]
        if labels and len(labels) != len(self.inputs):
            raise SpecError("style.labels must name every input once")

    def input_paths(self) -> list[pathlib.Path]:
        base = pathlib.Path(self.base_dir)
        out = []
        for raw in self.inputs:
            p = pathlib.Path(raw)
            out.append(p if p.is_absolute() else base / p)
        return out

    def styled(self) -> dict:
        merged = dict(_STYLE_DEFAULTS)
        merged.update(self.style)
        return merged

    def output_path(self, out_dir=None) -> pathlib.Path:
        p = pathlib.Path(self.output)
        if p.is_absolute() or out_dir is None:
            return p
        return pathlib.Path(out_dir) / p
