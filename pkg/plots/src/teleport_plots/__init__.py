"""Figure rendering for the teleport CLI's CSV result tables.

This package never recomputes any physics: it consumes the CSV column
contract of the engine's command line and draws the standard figures, writing
a JSON overlay with the plotted coordinates alongside each image so that
tests can assert on data rather than pixels alone.
"""

__version__ = "0.1.0"

from .figures import FigureSpec, MissingColumnError, render

__all__ = ["FigureSpec", "MissingColumnError", "render", "__version__"]
