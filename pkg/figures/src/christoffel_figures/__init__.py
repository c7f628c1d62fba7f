"""Plot renderers for the CSV studies produced by christoffel-sampling.

The package is a read-only consumer of the study CSV contract: loaders in
`plotdata` parse and validate the files into plain arrays, and `render`
turns those arrays into PNG figures.  Nothing here recomputes the studies'
mathematics.
"""

from .plotdata import (
    ErrorCurves,
    FanData,
    LevelSetData,
    SchemaError,
    load_error_curves,
    load_fan,
    load_levelsets,
    suboptimality_bound,
)
from .render import render_cd, render_errors, render_fan

__version__ = "0.1.0"

__all__ = [
    "ErrorCurves",
    "FanData",
    "LevelSetData",
    "SchemaError",
    "load_error_curves",
    "load_fan",
    "load_levelsets",
    "render_cd",
    "render_errors",
    "render_fan",
    "suboptimality_bound",
    "__version__",
]
