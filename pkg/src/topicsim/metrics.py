"""Aggregation of run counters into per-network ratios, fill rate and
rank correlations."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

METRIC_NAMES = ("eligibility", "low_competition", "sole_competitor")


@dataclass(frozen=True)
class NetworkCounters:
    spaces_present: int
    spaces_eligible: int
    spaces_low_competition: int
    spaces_sole: int


@dataclass(frozen=True)
class NetworkRatios:
    network_id: int
    presence: float
    eligibility_ratio: float
    low_competition_ratio: float
    sole_competitor_ratio: float
    no_presence: bool  # True when the network appeared on zero counted spaces


@dataclass
class RunCounters:
    """Merged per-network space counters for one run (warm-up excluded)."""

    present: np.ndarray
    eligible: np.ndarray
    low_competition: np.ndarray
    sole: np.ndarray
    filled_spaces: int
    total_spaces: int

    @classmethod
    def zeros(cls, num_networks: int) -> "RunCounters":
        z = lambda: np.zeros(num_networks, dtype=np.int64)
        return cls(z(), z(), z(), z(), 0, 0)

    def merge(self, other: "RunCounters") -> "RunCounters":
        """Commutative addition; final totals do not depend on merge order."""
        self.present += other.present
        self.eligible += other.eligible
        self.low_competition += other.low_competition
        self.sole += other.sole
        self.filled_spaces += other.filled_spaces
        self.total_spaces += other.total_spaces
        return self

    def network(self, network_id: int) -> NetworkCounters:
        return NetworkCounters(
            spaces_present=int(self.present[network_id]),
            spaces_eligible=int(self.eligible[network_id]),
            spaces_low_competition=int(self.low_competition[network_id]),
            spaces_sole=int(self.sole[network_id]),
        )


def finalize_ratios(counters: RunCounters, presence: np.ndarray) -> list[NetworkRatios]:
    """Per-network ratios against presence-relative denominators.

    Networks that never appeared on a counted page report zero ratios and are
    flagged rather than dividing by zero.
    """
    out = []
    for n in range(len(presence)):
        denom = int(counters.present[n])
        if denom == 0:
            out.append(NetworkRatios(n, float(presence[n]), 0.0, 0.0, 0.0, True))
            continue
        out.append(
            NetworkRatios(
                network_id=n,
                presence=float(presence[n]),
                eligibility_ratio=int(counters.eligible[n]) / denom,
                low_competition_ratio=int(counters.low_competition[n]) / denom,
                sole_competitor_ratio=int(counters.sole[n]) / denom,
                no_presence=False,
            )
        )
    return out


def fill_rate(total_spaces: int, filled_spaces: int) -> float:
    """Fraction of all counted ad spaces won via behavioral targeting."""
    if total_spaces <= 0:
        raise ValueError("fill rate is undefined for zero counted spaces")
    if filled_spaces > total_spaces:
        raise ValueError(f"filled {filled_spaces} exceeds total {total_spaces}")
    return filled_spaces / total_spaces


def _average_ranks(values: np.ndarray) -> np.ndarray:
    """1-based ranks with ties assigned the group average."""
    values = np.asarray(values, dtype=np.float64)
    order = np.argsort(values, kind="mergesort")
    ranks = np.empty(values.size, dtype=np.float64)
    sorted_vals = values[order]
    i = 0
    while i < values.size:
        j = i
        while j + 1 < values.size and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def spearman(x, y) -> float:
    """Spearman rank correlation: Pearson correlation of average ranks.

    Raises on degenerate input (fewer than two points, or a constant
    argument) instead of returning 0.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("spearman expects two 1-d arrays of equal length")
    if x.size < 2:
        raise ValueError("spearman needs at least two points")
    if np.all(x == x[0]) or np.all(y == y[0]):
        raise ValueError("spearman is undefined for constant input")
    rx = _average_ranks(x)
    ry = _average_ranks(y)
    rx -= rx.mean()
    ry -= ry.mean()
    return float((rx * ry).sum() / np.sqrt((rx * rx).sum() * (ry * ry).sum()))


@dataclass
class MetricsReport:
    """Per-network ratios plus scenario-level fill rate and correlations."""

    per_network: list[NetworkRatios]
    fill_rate: float
    spearman_by_metric: dict[str, float | None]
    meta: dict = field(default_factory=dict)


def build_report(
    counters: RunCounters, presence: np.ndarray, meta: dict | None = None
) -> MetricsReport:
    per_network = finalize_ratios(counters, presence)
    rate = fill_rate(counters.total_spaces, counters.filled_spaces)
    ratios_by_metric = {
        "eligibility": [r.eligibility_ratio for r in per_network],
        "low_competition": [r.low_competition_ratio for r in per_network],
        "sole_competitor": [r.sole_competitor_ratio for r in per_network],
    }
    pres = [r.presence for r in per_network]
    corr: dict[str, float | None] = {}
    for name, ratios in ratios_by_metric.items():
        try:
            corr[name] = spearman(pres, ratios)
        except ValueError:
            corr[name] = None
    return MetricsReport(
        per_network=per_network,
        fill_rate=rate,
        spearman_by_metric=corr,
        meta=dict(meta or {}),
    )
