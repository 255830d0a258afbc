"""Deterministic generation of the immutable simulated universe.

A :class:`World` holds websites (with topic labels and the ad networks placed
on them) and ad networks (with presence fractions and interest sets).  For
speed the world is stored as flat arrays (CSR layout for the two ragged
site->topics and site->networks relations); object views are built on demand.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import SimConfig
from .hashing import derive_rng_stream

_PLACEMENT_CHUNK = 16384  # fixed so chunking never changes the draw sequence


@dataclass(frozen=True)
class Website:
    site_id: int
    topics: frozenset[int]
    networks_present: frozenset[int]
    ad_spaces: int


@dataclass(frozen=True)
class AdNetwork:
    network_id: int
    presence: float
    interest_topics: frozenset[int]


@dataclass(frozen=True, eq=False)
class World:
    """Immutable run universe; safe to share read-only across workers."""

    taxonomy_size: int
    num_websites: int
    num_networks: int
    ads_on_site: int
    site_topic_off: np.ndarray  # int64[num_websites + 1]
    site_topic_ids: np.ndarray  # int64, concatenated per-site topic lists
    site_net_off: np.ndarray    # int64[num_websites + 1]
    site_net_ids: np.ndarray    # int64, ascending within each site
    presence: np.ndarray        # float64[num_networks]
    interest: np.ndarray        # bool[num_networks, taxonomy_size]

    def site_topics(self, site_id: int) -> np.ndarray:
        return self.site_topic_ids[self.site_topic_off[site_id] : self.site_topic_off[site_id + 1]]

    def site_networks(self, site_id: int) -> np.ndarray:
        return self.site_net_ids[self.site_net_off[site_id] : self.site_net_off[site_id + 1]]

    def website(self, site_id: int) -> Website:
        return Website(
            site_id=site_id,
            topics=frozenset(int(t) for t in self.site_topics(site_id)),
            networks_present=frozenset(int(n) for n in self.site_networks(site_id)),
            ad_spaces=self.ads_on_site,
        )

    def network(self, network_id: int) -> AdNetwork:
        return AdNetwork(
            network_id=network_id,
            presence=float(self.presence[network_id]),
            interest_topics=frozenset(np.flatnonzero(self.interest[network_id]).tolist()),
        )

    def networks(self) -> list[AdNetwork]:
        return [self.network(n) for n in range(self.num_networks)]


def generate_world(cfg: SimConfig) -> World:
    """Generate the world for a validated config.

    The same ``(cfg, seed)`` always produces a byte-identical world: all
    randomness flows through the seed-derived "world" stream in a fixed order
    (topic counts, topic labels, network placement, interest sets).
    """
    rng = derive_rng_stream(cfg.seed, "world")
    s, n, t = cfg.num_websites, cfg.num_ad_networks, cfg.taxonomy_size

    topic_counts = rng.integers(1, cfg.max_topics + 1, size=s)
    site_topic_off = np.zeros(s + 1, dtype=np.int64)
    np.cumsum(topic_counts, out=site_topic_off[1:])
    site_topic_ids = np.empty(site_topic_off[-1], dtype=np.int64)
    for i in range(s):
        k = topic_counts[i]
        site_topic_ids[site_topic_off[i] : site_topic_off[i + 1]] = rng.choice(
            t, size=k, replace=False
        )

    presence = cfg.presence_array()
    chunks_ids = []
    chunk_counts = np.zeros(s, dtype=np.int64)
    if n > 0:
        for lo in range(0, s, _PLACEMENT_CHUNK):
            hi = min(lo + _PLACEMENT_CHUNK, s)
            mask = rng.random((hi - lo, n)) < presence[None, :]
            rows, cols = np.nonzero(mask)
            chunks_ids.append(cols.astype(np.int64))
            chunk_counts[lo:hi] = mask.sum(axis=1)
    site_net_off = np.zeros(s + 1, dtype=np.int64)
    np.cumsum(chunk_counts, out=site_net_off[1:])
    site_net_ids = (
        np.concatenate(chunks_ids) if chunks_ids else np.empty(0, dtype=np.int64)
    )

    interest = np.zeros((n, t), dtype=bool)
    k_interest = cfg.interest_set_size()
    for j in range(n):
        interest[j, rng.choice(t, size=k_interest, replace=False)] = True

    return World(
        taxonomy_size=t,
        num_websites=s,
        num_networks=n,
        ads_on_site=cfg.ads_on_site,
        site_topic_off=site_topic_off,
        site_topic_ids=site_topic_ids,
        site_net_off=site_net_off,
        site_net_ids=site_net_ids,
        presence=presence,
        interest=interest,
    )


def synth_market_presence(n: int, head: float, alpha: float, floor: float) -> np.ndarray:
    """Power-law presence list: rank 1 gets ``head``, rank r gets head * r**-alpha.

    Entries are clamped from below at ``floor`` and returned in descending
    order, one per network.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not 0.0 < floor <= head <= 1.0:
        raise ValueError(f"need 0 < floor <= head <= 1, got floor={floor}, head={head}")
    if not alpha > 0.0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    ranks = np.arange(1, n + 1, dtype=np.float64)
    return np.maximum(floor, head * ranks**-alpha)


# Stand-in presence table for the 174-network market scenario.  The real
# per-network share table is not public; this composite is calibrated to two
# anchors (dominant presence 59.24%, ~77% of networks below 0.03% presence)
# while keeping enough high-presence competitor mass that the dominant
# network faces real competition even for the lightest browsing percentile.
# Three blocks: a power-law head (ranks 1..12), a geometric bridge down to
# the tail (ranks 13..40), and a floor tail (ranks 41..174).
MARKET_NETWORKS = 174
MARKET_HEAD_PRESENCE = 0.5924
MARKET_HEAD_RANKS = 12
MARKET_ALPHA = 0.60
MARKET_BRIDGE_RANKS = 28
MARKET_BRIDGE_START = 0.006
MARKET_BRIDGE_END = 4e-4
MARKET_TAIL_PRESENCE = 1e-4


def market_presence_table(
    n: int = MARKET_NETWORKS,
    head: float = MARKET_HEAD_PRESENCE,
    head_ranks: int = MARKET_HEAD_RANKS,
    alpha: float = MARKET_ALPHA,
    bridge_ranks: int = MARKET_BRIDGE_RANKS,
    bridge_start: float = MARKET_BRIDGE_START,
    bridge_end: float = MARKET_BRIDGE_END,
    tail: float = MARKET_TAIL_PRESENCE,
) -> np.ndarray:
    """Composite market presence list: power-law head, geometric bridge, floor tail."""
    head_ranks = min(head_ranks, n)
    bridge_ranks = min(bridge_ranks, n - head_ranks)
    head_block = synth_market_presence(head_ranks, head, alpha, tail)
    bridge_block = np.geomspace(bridge_start, bridge_end, num=bridge_ranks)
    tail_block = np.full(n - head_ranks - bridge_ranks, tail, dtype=np.float64)
    return np.concatenate([head_block, bridge_block, tail_block])


def read_presence_file(path, expected_n: int) -> np.ndarray:
    """Read one presence fraction per line; length must match expected_n."""
    values = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            try:
                values.append(float(line))
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: not a number: {line!r}") from exc
    if len(values) != expected_n:
        raise ValueError(
            f"{path}: expected {expected_n} presence entries, found {len(values)}"
        )
    arr = np.asarray(values, dtype=np.float64)
    if np.any((arr <= 0.0) | (arr > 1.0)):
        raise ValueError(f"{path}: presence entries must lie in (0, 1]")
    return arr
