"""Full-run orchestration: world generation, the per-user epoch loop,
warm-up gating, counter merging and report building.

Users are fully independent given the immutable world, so they can be
partitioned across worker threads; every per-user draw comes from a labelled
stream or a stateless hash, which makes the result an exact function of
``(config, seed)`` no matter how many workers run.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .browsing import UserHistory, generate_epoch_visits, update_history
from .config import SimConfig, config_hash, validate_config
from .hashing import STICKY, derive_rng_stream, hash_path
from .kernels import get_backend
from .metrics import MetricsReport, RunCounters, build_report
from .topics import select_top_topics
from .world import World, generate_world


@dataclass
class RunResult:
    report: MetricsReport
    counters: RunCounters
    duration_s: float
    num_page_visits: int
    num_observations: int
    events: list[dict] | None = None


@dataclass
class _UserOutcome:
    user_id: int
    counters: RunCounters
    num_page_visits: int
    num_observations: int
    events: list[dict] | None
    tops: list[tuple[int, list[int]]] | None
    visits_by_epoch: list[np.ndarray] | None


def _simulate_user(
    cfg: SimConfig,
    world: World,
    user_id: int,
    backend,
    collect_events: bool,
    collect_debug: bool,
) -> _UserOutcome:
    n, t = world.num_networks, world.taxonomy_size
    seen_ever = np.zeros((max(n, 1), t), dtype=bool)
    if cfg.observation_scope == "source-epoch":
        seen_bits = np.zeros((max(n, 1), t), dtype=np.uint8)
        use_bits = True
    else:
        seen_bits = np.zeros((1, 1), dtype=np.uint8)
        use_bits = False
    tops_vals = np.zeros((cfg.num_weeks + 1, cfg.top_n_topics), dtype=np.int64)
    tops_len = np.zeros(cfg.num_weeks + 1, dtype=np.int64)
    counters = RunCounters.zeros(n)

    history = UserHistory(user_id=user_id, num_websites=cfg.num_websites)
    rng = derive_rng_stream(cfg.seed, "visits", user_id)

    cumulative_tops = cfg.topic_histogram == "cumulative"
    cum_hist = np.zeros(t, dtype=np.int64) if cumulative_tops else None

    events: list[dict] | None = [] if collect_events else None
    visits_log: list[np.ndarray] | None = [] if collect_debug else None
    num_visits = 0
    num_obs = 0

    for epoch in range(1, cfg.num_weeks + 1):
        visits = generate_epoch_visits(history, cfg, epoch, rng)
        counting = epoch > cfg.warmup_epochs
        filled, total, n_new, row_off, nets_flat, elig_flat, winners, hist = backend.epoch_step(
            visits,
            world.site_net_off,
            world.site_net_ids,
            world.site_topic_off,
            world.site_topic_ids,
            world.interest,
            tops_vals,
            tops_len,
            seen_ever,
            seen_bits,
            use_bits,
            cfg.observation_scope == "any-epoch",
            epoch,
            cfg.topic_window,
            cfg.ads_on_site,
            cfg.top_n_topics,
            np.uint64(cfg.seed),
            user_id,
            counting,
            cfg.strict_low_competition,
            counters.present,
            counters.eligible,
            counters.low_competition,
            counters.sole,
            not cumulative_tops,
        )
        if cumulative_tops:
            cum_hist += hist
            top = select_top_topics(cum_hist, cfg.seed, user_id, epoch, cfg.top_n_topics)
            tops_len[epoch] = top.shape[0]
            tops_vals[epoch, : top.shape[0]] = top
        counters.filled_spaces += int(filled)
        counters.total_spaces += int(total)
        num_visits += int(visits.shape[0])
        num_obs += int(n_new)

        if events is not None:
            ads = cfg.ads_on_site
            for i in range(visits.shape[0]):
                lo, hi = int(row_off[i]), int(row_off[i + 1])
                present = nets_flat[lo:hi]
                events.append(
                    {
                        "user": user_id,
                        "epoch": epoch,
                        "site": int(visits[i]),
                        "present": [int(x) for x in present],
                        "eligible": [int(x) for x in present[elig_flat[lo:hi]]],
                        "winners": [int(x) for x in winners[i * ads : (i + 1) * ads]],
                        "counted": bool(counting),
                    }
                )
        if visits_log is not None:
            visits_log.append(visits)
        update_history(history, visits)

    tops_out = None
    if collect_debug:
        tops_out = [
            (e, [int(x) for x in tops_vals[e, : tops_len[e]]])
            for e in range(1, cfg.num_weeks + 1)
        ]
    return _UserOutcome(
        user_id=user_id,
        counters=counters,
        num_page_visits=num_visits,
        num_observations=num_obs,
        events=events,
        tops=tops_out,
        visits_by_epoch=visits_log,
    )


def _write_debug_dump(path, cfg: SimConfig, outcomes: list[_UserOutcome]) -> None:
    """JSON-lines dump: per (user, epoch) the top list and the sticky topic
    drawn for every (site, source-epoch) query that used this epoch."""
    with open(path, "w", encoding="utf-8") as fh:
        for oc in outcomes:
            visits = oc.visits_by_epoch or []
            for epoch, top in oc.tops or ():
                sticky = {}
                if top:
                    for later in range(epoch + 1, min(epoch + cfg.topic_window, cfg.num_weeks) + 1):
                        for site in visits[later - 1]:
                            key = str(int(site))
                            if key not in sticky:
                                h = hash_path(cfg.seed, STICKY, oc.user_id, int(site), epoch)
                                sticky[key] = top[h % len(top)]
                fh.write(
                    json.dumps(
                        {"user": oc.user_id, "epoch": epoch, "top": top, "sticky": sticky}
                    )
                    + "\n"
                )


def run_simulation(
    cfg: SimConfig,
    *,
    workers: int = 1,
    backend: str | None = None,
    collect_events: bool = False,
    debug_dump_path=None,
    meta: dict | None = None,
) -> RunResult:
    """Execute one full simulation and aggregate its metrics.

    The result is a deterministic function of ``(cfg, cfg.seed)``; ``workers``
    only changes wall-clock time.
    """
    validate_config(cfg)
    kern = get_backend(backend)
    started = time.perf_counter()
    world = generate_world(cfg)

    collect_debug = debug_dump_path is not None
    user_ids = range(cfg.num_users)
    if workers <= 1:
        outcomes = [
            _simulate_user(cfg, world, u, kern, collect_events, collect_debug)
            for u in user_ids
        ]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(
                pool.map(
                    lambda u: _simulate_user(cfg, world, u, kern, collect_events, collect_debug),
                    user_ids,
                )
            )

    outcomes.sort(key=lambda oc: oc.user_id)
    total = RunCounters.zeros(cfg.num_ad_networks)
    num_visits = 0
    num_obs = 0
    events: list[dict] | None = [] if collect_events else None
    for oc in outcomes:
        total.merge(oc.counters)
        num_visits += oc.num_page_visits
        num_obs += oc.num_observations
        if events is not None:
            events.extend(oc.events or ())

    if collect_debug:
        _write_debug_dump(debug_dump_path, cfg, outcomes)

    run_meta = {
        "seed": cfg.seed,
        "config_hash": config_hash(cfg),
        "backend": kern.NAME,
        "observation_scope": cfg.observation_scope,
        "counted_epochs": cfg.num_weeks - cfg.warmup_epochs,
    }
    run_meta.update(meta or {})
    report = build_report(total, world.presence, meta=run_meta)
    return RunResult(
        report=report,
        counters=total,
        duration_s=time.perf_counter() - started,
        num_page_visits=num_visits,
        num_observations=num_obs,
        events=events,
    )
