"""Per-user, per-epoch visit list generation under the loyalty model.

Each epoch a user visits exactly ``pages_per_epoch`` distinct sites:
``round(loyalty * pages)`` uniform revisits from everything they have ever
visited, the rest uniform draws from never-visited sites.  The realized
revisit fraction therefore equals the loyalty knob exactly (up to history
size), which is what calibrates it to the percentile profile table.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import SimConfig


@dataclass
class UserHistory:
    """Cumulative browsing state for one user; owned by a single worker."""

    user_id: int
    num_websites: int
    visited_mask: np.ndarray = field(default=None)  # bool[num_websites]
    visited_count: int = 0
    last_epoch_visits: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.visited_mask is None:
            self.visited_mask = np.zeros(self.num_websites, dtype=bool)
        if self.last_epoch_visits is None:
            self.last_epoch_visits = np.empty(0, dtype=np.int64)

    @property
    def visited_ever(self) -> set[int]:
        return set(np.flatnonzero(self.visited_mask).tolist())


def generate_epoch_visits(
    history: UserHistory, cfg: SimConfig, epoch: int, rng: np.random.Generator
) -> np.ndarray:
    """Distinct site ids for one epoch: revisits first, then new sites.

    Does not mutate ``history``; call :func:`update_history` afterwards.
    """
    pages = cfg.pages_per_epoch
    if epoch <= 1 or history.visited_count == 0:
        fresh = np.flatnonzero(~history.visited_mask)
        return np.asarray(rng.choice(fresh, size=pages, replace=False), dtype=np.int64)

    n_revisit = min(int(round(cfg.user_loyalty * pages)), history.visited_count)
    visited_ids = np.flatnonzero(history.visited_mask)
    revisits = np.asarray(
        rng.choice(visited_ids, size=n_revisit, replace=False), dtype=np.int64
    )

    n_new = pages - n_revisit
    fresh = np.flatnonzero(~history.visited_mask)
    if n_new <= fresh.size:
        new_sites = np.asarray(rng.choice(fresh, size=n_new, replace=False), dtype=np.int64)
    else:
        # Never-visited pool exhausted: take it all, then fall back to
        # previously-visited sites not already picked this epoch.
        deficit = n_new - fresh.size
        fallback_pool = np.setdiff1d(visited_ids, revisits, assume_unique=True)
        extra = np.asarray(
            rng.choice(fallback_pool, size=deficit, replace=False), dtype=np.int64
        )
        new_sites = np.concatenate([fresh.astype(np.int64), extra])

    return np.concatenate([revisits, new_sites])


def update_history(history: UserHistory, visits: np.ndarray) -> None:
    newly = ~history.visited_mask[visits]
    history.visited_count += int(newly.sum())
    history.visited_mask[visits] = True
    history.last_epoch_visits = visits
