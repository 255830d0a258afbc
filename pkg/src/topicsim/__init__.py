"""topicsim: seedable simulator of ad-network access to behavioral ad
spaces under an epoch-based interest-topics disclosure protocol."""

from .config import (
    PERCENTILE_PROFILES,
    ConfigError,
    SimConfig,
    UserPercentileProfile,
    load_config,
    save_config,
    serialize_config,
    validate_config,
    with_percentile_profile,
)
from .hashing import derive_rng_stream
from .metrics import MetricsReport, NetworkRatios, RunCounters, fill_rate, spearman
from .runner import RunResult, run_simulation
from .world import (
    AdNetwork,
    Website,
    World,
    generate_world,
    market_presence_table,
    read_presence_file,
    synth_market_presence,
)

__version__ = "0.1.0"

__all__ = [
    "AdNetwork",
    "ConfigError",
    "MetricsReport",
    "NetworkRatios",
    "PERCENTILE_PROFILES",
    "RunCounters",
    "RunResult",
    "SimConfig",
    "UserPercentileProfile",
    "Website",
    "World",
    "derive_rng_stream",
    "fill_rate",
    "generate_world",
    "load_config",
    "market_presence_table",
    "read_presence_file",
    "run_simulation",
    "save_config",
    "serialize_config",
    "spearman",
    "synth_market_presence",
    "validate_config",
    "with_percentile_profile",
    "__version__",
]
