"""Interest-topics disclosure protocol: observation ledger, weekly top lists,
and the per-caller filtered, sticky topic query.

The state machine:

* every page visit registers the site's topics in the user's epoch histogram
  and records which ad networks saw the user with those topics;
* at each epoch's end the user's most frequent topics form that epoch's top
  list (at most ``top_n_topics`` entries, ties broken by a seeded shuffle);
* a query by a caller on a site returns at most one topic per past window
  epoch: the sticky candidate for (user, site, source epoch), included only
  if the caller's own observations qualify it.

All random choices are hash draws keyed by stable paths, so candidates are
sticky by construction and identical across backends and worker layouts.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .hashing import STICKY, TIE, hash_path, hash_path_arr
from .world import Website

_COUNT_BITS = 20
_COUNT_CAP = 1 << _COUNT_BITS  # per-epoch topic counts must stay below this


@dataclass(frozen=True)
class EpochTopTopics:
    user_id: int
    epoch: int
    top: tuple[int, ...]


class ObservationLedger:
    """Membership structure over (network, user, topic, epoch) records."""

    def __init__(self):
        self._epochs: dict[tuple[int, int, int], set[int]] = defaultdict(set)
        self._count = 0

    def add(self, network_id: int, user_id: int, topic: int, epoch: int) -> None:
        epochs = self._epochs[(network_id, user_id, topic)]
        if epoch not in epochs:
            epochs.add(epoch)
            self._count += 1

    def contains(self, network_id: int, user_id: int, topic: int, epoch: int) -> bool:
        return epoch in self._epochs.get((network_id, user_id, topic), ())

    def seen_before(self, network_id: int, user_id: int, topic: int, epoch: int) -> bool:
        """True if the caller observed (user, topic) in any epoch < ``epoch``."""
        epochs = self._epochs.get((network_id, user_id, topic))
        return bool(epochs) and min(epochs) < epoch

    def __len__(self) -> int:
        return self._count

    def records(self) -> Iterable[tuple[int, int, int, int]]:
        for (n, u, t), epochs in self._epochs.items():
            for e in epochs:
                yield (n, u, t, e)


class StickySelectionCache:
    """Memoized sticky topic per (user, site, source epoch).

    The draw is a pure hash of the key, so the mapping can never change within
    a run; the cache exists for inspection and debug dumps.
    """

    def __init__(self, seed: int):
        self.seed = seed
        self._map: dict[tuple[int, int, int], int] = {}

    def candidate(self, user_id: int, site_id: int, source_epoch: int, top: tuple[int, ...]) -> int | None:
        if not top:
            return None
        key = (user_id, site_id, source_epoch)
        got = self._map.get(key)
        if got is None:
            h = hash_path(self.seed, STICKY, user_id, site_id, source_epoch)
            got = top[h % len(top)]
            self._map[key] = got
        return got

    def selections(self) -> Mapping[tuple[int, int, int], int]:
        return dict(self._map)


def record_observation(ledger: ObservationLedger, user_id: int, site: Website, epoch: int) -> None:
    """Register every (present network, site topic) pair for this visit; idempotent."""
    for network_id in site.networks_present:
        for topic in site.topics:
            ledger.add(network_id, user_id, topic, epoch)


def make_tie_break(seed: int, user_id: int, epoch: int):
    """Key function realizing a seeded uniform shuffle among count-tied topics."""

    def key(topic: int) -> int:
        return hash_path(seed, TIE, user_id, epoch, topic)

    return key


def _sort_key(count: int, tie_hash: int, topic: int) -> tuple[int, int]:
    # Composite 64-bit key: higher count first, then the tie hash, then the
    # topic id (packed so one integer compare decides all three).
    return (((_COUNT_CAP - count) << 44) | (tie_hash >> _COUNT_BITS), topic)


def compute_top_topics(
    histogram: Mapping[int, int], top_n: int, tie_break
) -> tuple[int, ...]:
    """Top ``top_n`` topics by descending count; ties shuffled by ``tie_break``.

    Returns fewer than ``top_n`` entries when fewer distinct topics were seen.
    """
    ordered = sorted(
        histogram, key=lambda t: _sort_key(histogram[t], tie_break(t), t)
    )
    return tuple(ordered[:top_n])


def select_top_topics(
    counts: np.ndarray, seed: int, user_id: int, epoch: int, top_n: int
) -> np.ndarray:
    """Array variant of :func:`compute_top_topics` over a dense count vector."""
    present = np.flatnonzero(counts)
    if present.size == 0:
        return np.empty(0, dtype=np.int64)
    tie = hash_path_arr(seed, TIE, user_id, epoch, present)
    key = ((np.uint64(_COUNT_CAP) - counts[present].astype(np.uint64)) << np.uint64(44)) | (
        tie >> np.uint64(_COUNT_BITS)
    )
    order = np.argsort(key, kind="stable")
    return present[order[:top_n]].astype(np.int64)


def topics_for_caller(
    user_id: int,
    site_id: int,
    caller: int,
    current_epoch: int,
    tops: Mapping[int, EpochTopTopics],
    ledger: ObservationLedger,
    cache: StickySelectionCache,
    *,
    topic_window: int = 3,
    scope: str = "any-epoch",
) -> list[int]:
    """Topics disclosed to ``caller`` for this (user, site) query.

    One sticky candidate per source epoch in the window; each candidate is
    included only if the caller's observations qualify it under ``scope``.
    Duplicates across epochs collapse to one entry.
    """
    result: list[int] = []
    for source_epoch in range(current_epoch - 1, current_epoch - topic_window - 1, -1):
        if source_epoch < 1:
            break
        top = tops.get(source_epoch)
        if top is None or not top.top:
            continue
        candidate = cache.candidate(user_id, site_id, source_epoch, top.top)
        if candidate is None:
            continue
        if scope == "any-epoch":
            ok = ledger.seen_before(caller, user_id, candidate, current_epoch)
        else:
            ok = ledger.contains(caller, user_id, candidate, source_epoch)
        if ok and candidate not in result:
            result.append(candidate)
    return result
