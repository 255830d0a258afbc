"""Object-level reference runner.

Drives the protocol and auction modules directly over Website/AdNetwork
objects, with dict/set state.  It is far too slow for production scale but
serves as the behavioral oracle for the optimized array kernels: on small
instances both must produce identical counters, top lists, eligible sets and
winners.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .auction import VisitCounters, simulate_page_visit
from .browsing import UserHistory, generate_epoch_visits, update_history
from .config import SimConfig, validate_config
from .hashing import derive_rng_stream
from .metrics import RunCounters
from .topics import (
    EpochTopTopics,
    ObservationLedger,
    StickySelectionCache,
    compute_top_topics,
    make_tie_break,
)
from .world import World, generate_world


@dataclass
class VisitEvent:
    user: int
    epoch: int
    site: int
    present: tuple[int, ...]
    eligible: tuple[int, ...]
    winners: tuple[int, ...]
    counted: bool


@dataclass
class ReferenceResult:
    counters: RunCounters
    events: list[VisitEvent]
    tops: dict[int, dict[int, EpochTopTopics]]  # user -> epoch -> top list
    ledgers: dict[int, ObservationLedger] = field(default_factory=dict)
    caches: dict[int, StickySelectionCache] = field(default_factory=dict)


def run_reference(cfg: SimConfig, world: World | None = None) -> ReferenceResult:
    """Simulate every user with the object engine and return full traces."""
    validate_config(cfg)
    if world is None:
        world = generate_world(cfg)
    networks = world.networks()
    websites = {}

    total = RunCounters.zeros(cfg.num_ad_networks)
    events: list[VisitEvent] = []
    all_tops: dict[int, dict[int, EpochTopTopics]] = {}
    ledgers: dict[int, ObservationLedger] = {}
    caches: dict[int, StickySelectionCache] = {}

    cumulative_tops = cfg.topic_histogram == "cumulative"

    for user_id in range(cfg.num_users):
        ledger = ObservationLedger()
        cache = StickySelectionCache(cfg.seed)
        tops: dict[int, EpochTopTopics] = {}
        history = UserHistory(user_id=user_id, num_websites=cfg.num_websites)
        rng = derive_rng_stream(cfg.seed, "visits", user_id)
        counters = VisitCounters.zeros(cfg.num_ad_networks)
        running_hist: dict[int, int] = {}

        for epoch in range(1, cfg.num_weeks + 1):
            visits = generate_epoch_visits(history, cfg, epoch, rng)
            counting = epoch > cfg.warmup_epochs
            histogram = running_hist if cumulative_tops else {}
            for site_id in visits:
                site = websites.get(site_id)
                if site is None:
                    site = world.website(int(site_id))
                    websites[site_id] = site
                outcome = simulate_page_visit(
                    user_id,
                    site,
                    epoch,
                    networks=networks,
                    tops=tops,
                    ledger=ledger,
                    cache=cache,
                    counters=counters,
                    seed=cfg.seed,
                    counting=counting,
                    topic_window=cfg.topic_window,
                    scope=cfg.observation_scope,
                    strict_low_competition=cfg.strict_low_competition,
                )
                for topic in site.topics:
                    histogram[topic] = histogram.get(topic, 0) + 1
                events.append(
                    VisitEvent(
                        user=user_id,
                        epoch=epoch,
                        site=int(site_id),
                        present=tuple(sorted(outcome.present)),
                        eligible=tuple(sorted(outcome.eligible)),
                        winners=outcome.winners,
                        counted=counting,
                    )
                )
            update_history(history, visits)
            top = compute_top_topics(
                histogram, cfg.top_n_topics, make_tie_break(cfg.seed, user_id, epoch)
            )
            tops[epoch] = EpochTopTopics(user_id=user_id, epoch=epoch, top=top)

        total.merge(
            RunCounters(
                present=counters.present,
                eligible=counters.eligible,
                low_competition=counters.low_competition,
                sole=counters.sole,
                filled_spaces=counters.filled_spaces,
                total_spaces=counters.total_spaces,
            )
        )
        all_tops[user_id] = tops
        ledgers[user_id] = ledger
        caches[user_id] = cache

    return ReferenceResult(
        counters=total, events=events, tops=all_tops, ledgers=ledgers, caches=caches
    )
