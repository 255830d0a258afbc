"""Campaign execution: scenario presets, parameter sweeps, seed replication,
process-level parallelism and CSV/JSON emission."""

from __future__ import annotations

import itertools
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

from .config import (
    ConfigError,
    PERCENTILE_PROFILES,
    SimConfig,
    serialize_config,
    validate_config,
)
from .metrics import METRIC_NAMES, spearman
from .runner import run_simulation
from .world import market_presence_table

CSV_HEADER = (
    "scenario,seed,network_id,presence,eligibility_ratio,"
    "low_competition_ratio,sole_competitor_ratio,fill_rate"
)

# Fixed parameters of the two theoretical sweeps.
THEORY_BASE = dict(
    num_users=100,
    num_websites=50_000,
    num_ad_networks=50,
    num_weeks=50,
    pages_per_epoch=334,
    user_loyalty=0.43,
    ads_on_site=10,
    max_topics=3,
    presence=0.8,
    interest_proportion=1.0,
)

PRESET_NAMES = ("theory-1", "theory-2", "market")


class CampaignError(RuntimeError):
    pass


@dataclass
class Scenario:
    """A base config plus swept axes; campaign size = grid points x replications."""

    name: str
    base: SimConfig
    axes: dict[str, list] = field(default_factory=dict)
    replications: int = 1
    seed_base: int = 0
    percentile: int | None = None

    def validate(self) -> "Scenario":
        cfg_fields = {f.name for f in fields(SimConfig)}
        for axis in self.axes:
            if axis not in cfg_fields:
                raise ConfigError([(axis, "swept axis is not a config field")])
        if self.replications < 1:
            raise ConfigError([("replications", "must be >= 1")])
        for point in self.points():
            validate_config(replace(self.base, **point))
        return self

    def points(self) -> list[dict]:
        """Grid points in deterministic (sorted-axis, given-value) order."""
        if not self.axes:
            return [{}]
        names = sorted(self.axes)
        return [
            dict(zip(names, combo))
            for combo in itertools.product(*(self.axes[n] for n in names))
        ]

    def point_label(self, point: dict) -> str:
        if not point:
            return self.name
        inner = ",".join(f"{k}={point[k]}" for k in sorted(point))
        return f"{self.name}/{inner}"


def scenario_from_dict(payload: dict) -> Scenario:
    base_fields = dict(payload.get("base", {}))
    if isinstance(base_fields.get("presence"), list):
        base_fields["presence"] = tuple(base_fields["presence"])
    try:
        base = SimConfig(**base_fields)
    except TypeError as exc:
        raise ConfigError([("base", str(exc))]) from exc
    return Scenario(
        name=str(payload.get("name", "scenario")),
        base=base,
        axes={k: list(v) for k, v in payload.get("axes", {}).items()},
        replications=int(payload.get("replications", 1)),
        seed_base=int(payload.get("seed_base", 0)),
        percentile=payload.get("percentile"),
    ).validate()


def load_scenario(path: str | Path) -> Scenario:
    return scenario_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def preset_theory_1(seed_base: int = 0, replications: int = 1) -> Scenario:
    """Fill rate versus network count and presence."""
    return Scenario(
        name="theory-1",
        base=SimConfig(**THEORY_BASE, seed=seed_base),
        axes={
            "num_ad_networks": [10, 25, 50, 100, 200],
            "presence": [0.01, 0.02, 0.05, 0.1, 0.2, 0.4, 0.8, 1.0],
        },
        replications=replications,
        seed_base=seed_base,
    )


def preset_theory_2(seed_base: int = 0, replications: int = 1) -> Scenario:
    """Vacancy versus interest share and presence, over the whole run
    including the cold-start epochs (warmup_epochs=0)."""
    return Scenario(
        name="theory-2",
        base=SimConfig(**THEORY_BASE, seed=seed_base, warmup_epochs=0),
        axes={
            "interest_proportion": [0.1, 0.2, 0.4, 0.6, 0.8, 1.0],
            "presence": [0.01, 0.02, 0.05, 0.1, 0.2, 0.4, 0.8, 1.0],
        },
        replications=replications,
        seed_base=seed_base,
    )


def preset_market(
    percentile: int,
    seed_base: int = 0,
    replications: int = 3,
    paper_scale: bool = False,
    paper_exact: bool = False,
    num_users: int | None = None,
) -> Scenario:
    """The 174-network market scenario for one browsing percentile.

    Desk scale (default) runs 500 users for 20 weeks so campaigns finish in
    minutes; ``paper_scale`` restores 10,000 users and 55 weeks.
    ``paper_exact`` substitutes the reported runtime page count (334) for the
    median percentile's 335.
    """
    if percentile not in PERCENTILE_PROFILES:
        raise ConfigError(
            [("percentile", f"must be one of {sorted(PERCENTILE_PROFILES)}, got {percentile!r}")]
        )
    prof = PERCENTILE_PROFILES[percentile]
    pages = prof.pages_per_epoch
    if paper_exact and percentile == 50:
        pages = 334
    users = num_users if num_users is not None else (10_000 if paper_scale else 500)
    base = SimConfig(
        num_users=users,
        num_websites=50_000,
        num_ad_networks=174,
        num_weeks=55 if paper_scale else 20,
        pages_per_epoch=pages,
        user_loyalty=prof.loyalty,
        ads_on_site=10,
        max_topics=3,
        presence=tuple(market_presence_table()),
        interest_proportion=1.0,
        seed=seed_base,
    )
    return Scenario(
        name=f"market-p{percentile}",
        base=base,
        replications=replications,
        seed_base=seed_base,
        percentile=percentile,
    )


def _run_point(args: tuple) -> dict:
    cfg_kwargs, point, seed, label, percentile, events = args
    cfg = replace(SimConfig(**cfg_kwargs), **point, seed=seed)
    meta = {"scenario": label}
    if percentile is not None:
        meta["percentile"] = percentile
    result = run_simulation(cfg, collect_events=events, meta=meta)
    return {
        "label": label,
        "point": point,
        "seed": seed,
        "fill_rate": result.report.fill_rate,
        "spearman": result.report.spearman_by_metric,
        "per_network": [
            (r.network_id, r.presence, r.eligibility_ratio, r.low_competition_ratio,
             r.sole_competitor_ratio)
            for r in result.report.per_network
        ],
        "num_page_visits": result.num_page_visits,
        "events": result.events,
    }


@dataclass
class CampaignResult:
    scenario: Scenario
    csv_path: Path
    summary_path: Path
    events_path: Path | None
    rows: int


def run_campaign(
    scenario: Scenario,
    out_dir: str | Path,
    parallelism: int = 1,
    events: bool = False,
) -> CampaignResult:
    """Execute every (grid point x replication) run and write the outputs.

    Output rows are ordered by (grid point, seed, network id) so identical
    campaigns are byte-identical regardless of ``parallelism``.  A failed run
    aborts the campaign, leaving an ``INCOMPLETE`` marker in the output
    directory.
    """
    scenario.validate()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    marker = out / "INCOMPLETE"
    marker.write_text("campaign in progress\n", encoding="utf-8")

    base_kwargs = asdict(scenario.base)
    tasks = []
    for point in scenario.points():
        label = scenario.point_label(point)
        for rep in range(scenario.replications):
            seed = scenario.seed_base + rep
            tasks.append((base_kwargs, point, seed, label, scenario.percentile, events))

    try:
        if parallelism <= 1:
            results = [_run_point(t) for t in tasks]
        else:
            with ProcessPoolExecutor(max_workers=parallelism) as pool:
                results = list(pool.map(_run_point, tasks))
    except Exception as exc:
        raise CampaignError(f"campaign {scenario.name!r} failed: {exc}") from exc

    csv_path = out / "results.csv"
    with open(csv_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(CSV_HEADER + "\n")
        for res in results:
            for net_id, presence, elig, low, sole in res["per_network"]:
                fh.write(
                    f"{res['label']},{res['seed']},{net_id},{presence!r},"
                    f"{elig!r},{low!r},{sole!r},{res['fill_rate']!r}\n"
                )

    events_path = None
    if events:
        events_path = out / "events.log"
        with open(events_path, "w", encoding="utf-8", newline="\n") as fh:
            for res in results:
                for ev in res["events"] or ():
                    fh.write(json.dumps({"scenario": res["label"], "seed": res["seed"], **ev}) + "\n")

    pooled: dict[str, float | None] = {}
    pres_all = [p for res in results for (_, p, _, _, _) in res["per_network"]]
    for idx, metric in enumerate(METRIC_NAMES):
        vals = [row[2 + idx] for res in results for row in res["per_network"]]
        try:
            pooled[metric] = spearman(pres_all, vals)
        except ValueError:
            pooled[metric] = None

    fill_by_point: dict[str, list[float]] = {}
    for res in results:
        fill_by_point.setdefault(res["label"], []).append(res["fill_rate"])

    summary = {
        "scenario": scenario.name,
        "percentile": scenario.percentile,
        "replications": scenario.replications,
        "seed_base": scenario.seed_base,
        "axes": scenario.axes,
        "config": serialize_config(scenario.base),
        "runs": [
            {
                "scenario_id": res["label"],
                "point": res["point"],
                "seed": res["seed"],
                "fill_rate": res["fill_rate"],
                "spearman": res["spearman"],
                "num_page_visits": res["num_page_visits"],
            }
            for res in results
        ],
        "aggregate": {
            "fill_rate_by_point": {
                label: sum(v) / len(v) for label, v in fill_by_point.items()
            },
            "spearman_pooled": pooled,
        },
    }
    summary_path = out / "summary.json"
    summary_path.write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")

    marker.unlink()
    return CampaignResult(
        scenario=scenario,
        csv_path=csv_path,
        summary_path=summary_path,
        events_path=events_path,
        rows=sum(len(res["per_network"]) for res in results),
    )
