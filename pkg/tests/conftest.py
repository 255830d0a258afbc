import numpy as np
import pytest

from topicsim import SimConfig


@pytest.fixture
def tiny_cfg():
    return SimConfig(
        num_users=2,
        num_websites=12,
        num_ad_networks=3,
        num_weeks=6,
        pages_per_epoch=4,
        user_loyalty=0.5,
        ads_on_site=2,
        max_topics=2,
        presence=(0.8, 0.5, 0.25),
        interest_proportion=1.0,
        taxonomy_size=8,
        seed=7,
        warmup_epochs=2,
    )


def random_tiny_cfg(rng: np.random.Generator, seed: int) -> SimConfig:
    """Random micro-instance for oracle and property sweeps."""
    num_websites = int(rng.integers(4, 11))
    num_networks = int(rng.integers(1, 4))
    num_weeks = int(rng.integers(2, 9))
    taxonomy = int(rng.integers(3, 12))
    scope = "any-epoch" if rng.random() < 0.7 else "source-epoch"
    hist = "cumulative" if rng.random() < 0.7 else "epoch"
    return SimConfig(
        num_users=int(rng.integers(1, 4)),
        num_websites=num_websites,
        num_ad_networks=num_networks,
        num_weeks=num_weeks,
        pages_per_epoch=int(rng.integers(1, min(5, num_websites) + 1)),
        user_loyalty=float(rng.choice([0.0, 0.2, 0.43, 0.74, 1.0])),
        ads_on_site=int(rng.integers(1, 4)),
        max_topics=int(rng.integers(1, min(3, taxonomy) + 1)),
        presence=tuple(float(p) for p in rng.uniform(0.05, 1.0, size=num_networks)),
        interest_proportion=float(rng.choice([0.2, 0.5, 1.0])),
        taxonomy_size=taxonomy,
        seed=seed,
        top_n_topics=int(rng.integers(1, min(5, taxonomy) + 1)),
        warmup_epochs=int(rng.integers(0, min(3, num_weeks))),
        observation_scope=scope,
        topic_histogram=hist,
    )
