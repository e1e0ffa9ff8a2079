"""Error types for figure generation."""


class FigureError(Exception):
    """Base class for all errors raised by this package."""


class SpecError(FigureError):
    """A figure spec failed validation (unknown kind, missing file,
    unrecognized styling key, bad output suffix)."""


class MissingColumn(FigureError):
    """An input CSV lacks a column the figure consumes.

    The message names the column and the file so the producing run can be
    identified.
    """

    def __init__(self, column: str, path):
        self.column = column
        self.path = str(path)
        super().__init__(f"{self.path} lacks required column {column!r}")


class EmptyInput(FigureError):
    """An input CSV has a header but no data rows."""
