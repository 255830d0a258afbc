"""Figure reproduction for topicsim campaign results.

Reads the documented results.csv schema only; every statistic shown is
recomputed here (via scipy) rather than trusted from the producing run, so
the figures double as an independent check on the simulator's numbers.
"""

from .render import FigureSpec, MetricName, render_figure
from .stats import spearman

__version__ = "0.1.0"

__all__ = ["FigureSpec", "MetricName", "render_figure", "spearman", "__version__"]
