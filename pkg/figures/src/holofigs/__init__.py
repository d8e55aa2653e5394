"""Publication-style figure renderer for sfholo CSV/JSON artifacts."""

__version__ = "0.1.0"

from .spec import FigureError, FigureSpec, load_spec
from .render import render, render_pmd_panels, render_scaling_panels
