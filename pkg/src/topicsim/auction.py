"""Page-visit simulation: per-network eligibility, winner draws, counters.

This is the object-level engine used by the reference runner and the unit
tests; the optimized array kernels in :mod:`topicsim.kernels` implement the
same semantics and are checked against it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

from .hashing import WINNER, hash_path
from .topics import (
    ObservationLedger,
    StickySelectionCache,
    record_observation,
    topics_for_caller,
)
from .world import AdNetwork, Website

NO_WINNER = -1


@dataclass(frozen=True)
class PageVisitOutcome:
    site_id: int
    present: frozenset[int]
    eligible: frozenset[int]
    winners: tuple[int, ...]  # NO_WINNER marks an unfilled space


def determine_eligibility(
    site: Website,
    user_id: int,
    epoch: int,
    *,
    networks: Sequence[AdNetwork],
    tops,
    ledger: ObservationLedger,
    cache: StickySelectionCache,
    topic_window: int = 3,
    scope: str = "any-epoch",
) -> set[int]:
    """Present networks that received at least one topic they target.

    Computed once per page visit; every ad space on the page shares it.
    """
    eligible = set()
    for network_id in site.networks_present:
        disclosed = topics_for_caller(
            user_id,
            site.site_id,
            network_id,
            epoch,
            tops,
            ledger,
            cache,
            topic_window=topic_window,
            scope=scope,
        )
        interest = networks[network_id].interest_topics
        if any(t in interest for t in disclosed):
            eligible.add(network_id)
    return eligible


def pick_winner(eligible: set[int], rng: np.random.Generator) -> Optional[int]:
    """Uniform draw over the eligible networks; None when nobody qualifies."""
    if not eligible:
        return None
    ordered = sorted(eligible)
    return ordered[int(rng.integers(len(ordered)))]


def _winner_from_hash(ordered_eligible: list[int], h: int) -> int:
    return ordered_eligible[h % len(ordered_eligible)]


@dataclass
class VisitCounters:
    """Additive per-network space counters plus the scenario fill tally."""

    present: np.ndarray
    eligible: np.ndarray
    low_competition: np.ndarray
    sole: np.ndarray
    filled_spaces: int = 0
    total_spaces: int = 0

    @classmethod
    def zeros(cls, num_networks: int) -> "VisitCounters":
        z = lambda: np.zeros(num_networks, dtype=np.int64)
        return cls(present=z(), eligible=z(), low_competition=z(), sole=z())


def simulate_page_visit(
    user_id: int,
    site: Website,
    epoch: int,
    *,
    networks: Sequence[AdNetwork],
    tops,
    ledger: ObservationLedger,
    cache: StickySelectionCache,
    counters: VisitCounters,
    seed: int,
    counting: bool,
    topic_window: int = 3,
    scope: str = "any-epoch",
    strict_low_competition: bool = False,
) -> PageVisitOutcome:
    """One page view: observe, determine eligibility, draw winners, count.

    Observations recorded here only become queryable in later epochs, so the
    record/query order within a visit does not matter.  ``counting`` is False
    during warm-up; then no counters move.
    """
    record_observation(ledger, user_id, site, epoch)

    eligible = determine_eligibility(
        site,
        user_id,
        epoch,
        networks=networks,
        tops=tops,
        ledger=ledger,
        cache=cache,
        topic_window=topic_window,
        scope=scope,
    )
    ordered = sorted(eligible)
    ads = site.ad_spaces
    if ordered:
        winners = tuple(
            _winner_from_hash(ordered, hash_path(seed, WINNER, user_id, epoch, site.site_id, k))
            for k in range(ads)
        )
    else:
        winners = (NO_WINNER,) * ads

    if counting:
        counters.total_spaces += ads
        if ordered:
            counters.filled_spaces += ads
        n_present = len(site.networks_present)
        n_eligible = len(eligible)
        for network_id in site.networks_present:
            counters.present[network_id] += ads
        for network_id in eligible:
            counters.eligible[network_id] += ads
            fewer = n_eligible < n_present or (n_present == 1 and not strict_low_competition)
            if fewer:
                counters.low_competition[network_id] += ads
            if n_eligible == 1:
                counters.sole[network_id] += ads

    return PageVisitOutcome(
        site_id=site.site_id,
        present=frozenset(site.networks_present),
        eligible=frozenset(eligible),
        winners=winners,
    )
