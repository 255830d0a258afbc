"""Simulation configuration: schema, validation, and the flat config file format."""

from __future__ import annotations

import hashlib
from dataclasses import MISSING, dataclass, fields, replace
from pathlib import Path
from types import MappingProxyType

import numpy as np

# How a caller's past observations qualify it to receive a topic:
#   any-epoch    -- the caller has observed the user with the topic in any
#                   earlier epoch (persistent has-seen relation).
#   source-epoch -- the caller observed the user with the topic during the
#                   topic's own source epoch (strict per-epoch attribution).
OBSERVATION_SCOPES = ("any-epoch", "source-epoch")

# Which browsing feeds an epoch's top-topics list:
#   cumulative -- counts accumulated over all browsing up to and including
#                 the epoch (habits over the preceding weeks).
#   epoch      -- counts from the epoch's own visits only.
TOPIC_HISTOGRAM_MODES = ("cumulative", "epoch")

# Engine packs per-epoch topic counts into 20 bits for tie-break sort keys.
MAX_PAGES_PER_EPOCH = (1 << 20) - 1


class ConfigError(ValueError):
    """Validation failure; carries one (field, message) entry per violation."""

    def __init__(self, violations: list[tuple[str, str]]):
        self.violations = list(violations)
        super().__init__("; ".join(f"{f}: {m}" for f, m in self.violations))


@dataclass(frozen=True)
class SimConfig:
    """All knobs of one simulation run.

    ``presence`` is either a single fraction applied to every ad network or a
    tuple with one fraction per network.
    """

    num_users: int
    num_websites: int
    num_ad_networks: int
    num_weeks: int
    pages_per_epoch: int
    user_loyalty: float
    ads_on_site: int
    max_topics: int
    presence: float | tuple[float, ...]
    interest_proportion: float
    taxonomy_size: int = 349
    seed: int = 0
    warmup_epochs: int = 3
    topic_window: int = 3
    top_n_topics: int = 5
    observation_scope: str = "any-epoch"
    topic_histogram: str = "cumulative"
    strict_low_competition: bool = False

    def presence_array(self) -> np.ndarray:
        """Per-network presence fractions as a float64 array."""
        if isinstance(self.presence, tuple):
            return np.asarray(self.presence, dtype=np.float64)
        return np.full(self.num_ad_networks, float(self.presence), dtype=np.float64)

    def interest_set_size(self) -> int:
        return max(1, round(self.interest_proportion * self.taxonomy_size))


@dataclass(frozen=True)
class UserPercentileProfile:
    percentile: int
    pages_per_epoch: int
    loyalty: float


# Weekly unique-site counts and revisit fractions for the five user percentiles.
PERCENTILE_PROFILES: MappingProxyType[int, UserPercentileProfile] = MappingProxyType(
    {
        10: UserPercentileProfile(10, 33, 0.14),
        25: UserPercentileProfile(25, 114, 0.28),
        50: UserPercentileProfile(50, 335, 0.43),
        75: UserPercentileProfile(75, 668, 0.58),
        90: UserPercentileProfile(90, 1083, 0.74),
    }
)


def validate_config(cfg: SimConfig) -> SimConfig:
    """Return ``cfg`` unchanged if every invariant holds, else raise ConfigError."""
    bad: list[tuple[str, str]] = []

    for name in (
        "num_users",
        "num_websites",
        "num_ad_networks",
        "num_weeks",
        "pages_per_epoch",
        "ads_on_site",
        "max_topics",
        "taxonomy_size",
        "topic_window",
        "top_n_topics",
    ):
        v = getattr(cfg, name)
        if not isinstance(v, (int, np.integer)) or isinstance(v, bool) or v < 1:
            bad.append((name, f"must be a positive integer, got {v!r}"))

    if not 0.0 <= cfg.user_loyalty <= 1.0:
        bad.append(("user_loyalty", f"must lie in [0, 1], got {cfg.user_loyalty!r}"))
    if not 0.0 < cfg.interest_proportion <= 1.0:
        bad.append(
            ("interest_proportion", f"must lie in (0, 1], got {cfg.interest_proportion!r}")
        )

    if isinstance(cfg.presence, tuple):
        if len(cfg.presence) != cfg.num_ad_networks:
            bad.append(
                (
                    "presence",
                    f"list length {len(cfg.presence)} != num_ad_networks {cfg.num_ad_networks}",
                )
            )
        for i, p in enumerate(cfg.presence):
            if not 0.0 < p <= 1.0:
                bad.append(("presence", f"entry {i} must lie in (0, 1], got {p!r}"))
                break
    else:
        if not 0.0 < cfg.presence <= 1.0:
            bad.append(("presence", f"must lie in (0, 1], got {cfg.presence!r}"))

    if isinstance(cfg.pages_per_epoch, (int, np.integer)):
        if cfg.pages_per_epoch > cfg.num_websites:
            bad.append(
                (
                    "pages_per_epoch",
                    f"{cfg.pages_per_epoch} exceeds num_websites {cfg.num_websites}",
                )
            )
        if cfg.pages_per_epoch > MAX_PAGES_PER_EPOCH:
            bad.append(
                ("pages_per_epoch", f"engine limit is {MAX_PAGES_PER_EPOCH} pages per epoch")
            )
    if isinstance(cfg.max_topics, (int, np.integer)) and cfg.max_topics > cfg.taxonomy_size:
        bad.append(
            ("max_topics", f"{cfg.max_topics} exceeds taxonomy_size {cfg.taxonomy_size}")
        )
    if isinstance(cfg.top_n_topics, (int, np.integer)) and cfg.top_n_topics > cfg.taxonomy_size:
        bad.append(
            ("top_n_topics", f"{cfg.top_n_topics} exceeds taxonomy_size {cfg.taxonomy_size}")
        )

    if not isinstance(cfg.warmup_epochs, (int, np.integer)) or cfg.warmup_epochs < 0:
        bad.append(("warmup_epochs", f"must be a non-negative integer, got {cfg.warmup_epochs!r}"))
    elif isinstance(cfg.num_weeks, (int, np.integer)) and cfg.warmup_epochs >= cfg.num_weeks:
        bad.append(
            ("warmup_epochs", f"{cfg.warmup_epochs} leaves no counted epoch in {cfg.num_weeks} weeks")
        )

    if not isinstance(cfg.seed, (int, np.integer)) or not 0 <= cfg.seed < 2**64:
        bad.append(("seed", f"must be a 64-bit unsigned integer, got {cfg.seed!r}"))
    if cfg.observation_scope not in OBSERVATION_SCOPES:
        bad.append(
            ("observation_scope", f"must be one of {OBSERVATION_SCOPES}, got {cfg.observation_scope!r}")
        )
    if cfg.topic_histogram not in TOPIC_HISTOGRAM_MODES:
        bad.append(
            ("topic_histogram", f"must be one of {TOPIC_HISTOGRAM_MODES}, got {cfg.topic_histogram!r}")
        )
    if not isinstance(cfg.strict_low_competition, bool):
        bad.append(("strict_low_competition", "must be a boolean"))

    if bad:
        raise ConfigError(bad)
    return cfg


_BOOL_TOKENS = {"true": True, "false": False, "1": True, "0": False}


def _format_value(name: str, value) -> str:
    if name == "presence" and isinstance(value, tuple):
        return ",".join(repr(float(p)) for p in value)
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def serialize_config(cfg: SimConfig) -> str:
    """Render the flat ``key = value`` config file format."""
    lines = [f"{f.name} = {_format_value(f.name, getattr(cfg, f.name))}" for f in fields(cfg)]
    return "\n".join(lines) + "\n"


def _parse_value(name: str, text: str):
    text = text.strip()
    if name == "presence":
        if "," in text:
            return tuple(float(tok) for tok in text.split(","))
        return float(text)
    if name in ("user_loyalty", "interest_proportion"):
        return float(text)
    if name in ("observation_scope", "topic_histogram"):
        return text
    if name == "strict_low_competition":
        tok = text.lower()
        if tok not in _BOOL_TOKENS:
            raise ValueError(f"expected true/false, got {text!r}")
        return _BOOL_TOKENS[tok]
    return int(text)


def parse_config_text(text: str) -> SimConfig:
    """Parse the flat config format. Unknown keys are an error."""
    known = {f.name for f in fields(SimConfig)}
    values: dict = {}
    errors: list[tuple[str, str]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            errors.append((f"line {lineno}", f"expected 'key = value', got {raw!r}"))
            continue
        key, _, val = line.partition("=")
        key = key.strip()
        if key not in known:
            errors.append((key, "unknown key"))
            continue
        try:
            values[key] = _parse_value(key, val)
        except ValueError as exc:
            errors.append((key, str(exc)))
    for f in fields(SimConfig):
        if f.default is MISSING and f.name not in values:
            errors.append((f.name, "missing required key"))
    if errors:
        raise ConfigError(errors)
    return SimConfig(**values)


def load_config(path: str | Path) -> SimConfig:
    return parse_config_text(Path(path).read_text(encoding="utf-8"))


def save_config(cfg: SimConfig, path: str | Path) -> None:
    Path(path).write_text(serialize_config(cfg), encoding="utf-8")


def config_hash(cfg: SimConfig) -> str:
    """Stable short digest of a config, for run provenance."""
    return hashlib.sha256(serialize_config(cfg).encode("utf-8")).hexdigest()[:16]


def with_percentile_profile(cfg: SimConfig, percentile: int) -> SimConfig:
    """Apply a browsing percentile's pages/loyalty to a config."""
    if percentile not in PERCENTILE_PROFILES:
        raise ConfigError(
            [("percentile", f"must be one of {sorted(PERCENTILE_PROFILES)}, got {percentile!r}")]
        )
    prof = PERCENTILE_PROFILES[percentile]
    return replace(cfg, pages_per_epoch=prof.pages_per_epoch, user_loyalty=prof.loyalty)
