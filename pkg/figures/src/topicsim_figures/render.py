"""Five-panel presence-vs-ratio scatter figures from campaign CSVs."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .stats import spearman

PERCENTILES = (10, 25, 50, 75, 90)

EXPECTED_COLUMNS = (
    "scenario",
    "seed",
    "network_id",
    "presence",
    "eligibility_ratio",
    "low_competition_ratio",
    "sole_competitor_ratio",
    "fill_rate",
)

METRIC_COLUMNS = {
    "eligibility": "eligibility_ratio",
    "low_competition": "low_competition_ratio",
    "sole_competitor": "sole_competitor_ratio",
}

METRIC_TITLES = {
    "eligibility": "ad placement eligibility",
    "low_competition": "low-competition ratio",
    "sole_competitor": "sole-competitor ratio",
}

MetricName = str


class SchemaError(ValueError):
    pass


@dataclass
class FigureSpec:
    metric: MetricName
    csv_by_percentile: dict[int, Path]
    out_path: Path
    stats_path: Path | None = None
    x_log: bool = True
    dpi: int = 150
    extra: dict = field(default_factory=dict)

    def validate(self) -> "FigureSpec":
        if self.metric not in METRIC_COLUMNS:
            raise SchemaError(
                f"unknown metric {self.metric!r}; expected one of {sorted(METRIC_COLUMNS)}"
            )
        missing = [p for p in PERCENTILES if p not in self.csv_by_percentile]
        if missing:
            raise SchemaError(f"missing CSVs for percentiles {missing}")
        return self


def read_rows(path: Path) -> list[dict]:
    """Parse one results.csv; raises SchemaError on column mismatch or no rows."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        columns = tuple(reader.fieldnames or ())
        if columns != EXPECTED_COLUMNS:
            unexpected = [c for c in columns if c not in EXPECTED_COLUMNS]
            absent = [c for c in EXPECTED_COLUMNS if c not in columns]
            raise SchemaError(
                f"{path}: column mismatch (unexpected={unexpected}, missing={absent})"
            )
        rows = []
        for rec in reader:
            rows.append(
                {
                    "scenario": rec["scenario"],
                    "seed": int(rec["seed"]),
                    "network_id": int(rec["network_id"]),
                    "presence": float(rec["presence"]),
                    "eligibility_ratio": float(rec["eligibility_ratio"]),
                    "low_competition_ratio": float(rec["low_competition_ratio"]),
                    "sole_competitor_ratio": float(rec["sole_competitor_ratio"]),
                    "fill_rate": float(rec["fill_rate"]),
                }
            )
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return rows


def find_percentile_csvs(csv_dir: Path) -> dict[int, Path]:
    """Locate one results CSV per percentile under ``csv_dir``.

    Accepts either campaign directories (``.../market-p50/results.csv``) or
    flat files whose names carry the percentile tag (``market_p50.csv``).
    """
    found: dict[int, Path] = {}
    candidates = sorted(csv_dir.glob("**/results.csv")) + sorted(csv_dir.glob("*.csv"))
    for path in candidates:
        tagged = path.parent.name if path.name == "results.csv" else path.stem
        for pct in PERCENTILES:
            if f"p{pct}" in tagged and pct not in found:
                found[pct] = path
    return found


def render_figure(spec: FigureSpec) -> dict:
    """Render the five-panel scatter and write the sidecar stats file.

    One dot per (network, run) row; the Spearman annotation is recomputed
    from the CSV itself.  Output bytes are deterministic for identical
    inputs.
    """
    spec.validate()
    column = METRIC_COLUMNS[spec.metric]

    panels = []
    fig, axes = plt.subplots(1, 5, figsize=(20, 4), sharey=True)
    for ax, pct in zip(axes, PERCENTILES):
        rows = read_rows(spec.csv_by_percentile[pct])
        presence = [r["presence"] for r in rows]
        ratios = [r[column] for r in rows]
        rho = spearman(presence, ratios)
        n_networks = len({r["network_id"] for r in rows})

        ax.scatter(presence, ratios, s=12, alpha=0.6, edgecolors="none")
        if spec.x_log:
            ax.set_xscale("log")
        ax.set_title(f"percentile {pct}")
        ax.set_xlabel("presence")
        label = "n/a" if rho is None else f"{rho:.2f}"
        ax.text(
            0.04,
            0.95,
            f"Spearman = {label}",
            transform=ax.transAxes,
            va="top",
            fontsize=9,
        )
        panels.append(
            {
                "percentile": pct,
                "spearman": rho,
                "n_points": len(rows),
                "n_networks": n_networks,
                "csv": str(spec.csv_by_percentile[pct]),
            }
        )
    axes[0].set_ylabel(METRIC_TITLES[spec.metric])
    fig.suptitle(f"presence vs {METRIC_TITLES[spec.metric]}")
    fig.tight_layout()
    spec.out_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(spec.out_path, dpi=spec.dpi, metadata={"Software": "topicsim-figures"})
    plt.close(fig)

    stats = {"metric": spec.metric, "image": str(spec.out_path), "panels": panels}
    if spec.stats_path is not None:
        spec.stats_path.parent.mkdir(parents=True, exist_ok=True)
        spec.stats_path.write_text(json.dumps(stats, indent=2) + "\n", encoding="utf-8")
    return stats
