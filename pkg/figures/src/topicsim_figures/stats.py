"""Rank statistics, computed independently of the simulator package."""

from __future__ import annotations

import numpy as np
import scipy.stats


def spearman(x, y) -> float | None:
    """Spearman rank correlation with average-rank ties; None when undefined.

    Undefined means fewer than two points or a constant argument.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.size < 2 or np.all(x == x[0]) or np.all(y == y[0]):
        return None
    return float(scipy.stats.spearmanr(x, y).statistic)
