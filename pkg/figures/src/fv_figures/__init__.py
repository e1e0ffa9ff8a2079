"""Figure generation for the coalescent toolkit's CSV outputs."""

from .errors import EmptyInput, FigureError, MissingColumn, SpecError
from .readers import REQUIRED, Frame, read_frame
from .render import build_figure, load_frames, render
from .spec import KINDS, FigureSpec

__version__ = "0.1.0"

__all__ = [
    "EmptyInput",
    "FigureError",
    "Frame",
    "FigureSpec",
    "KINDS",
    "MissingColumn",
    "REQUIRED",
    "SpecError",
    "build_figure",
    "load_frames",
    "read_frame",
    "render",
]
