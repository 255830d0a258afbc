"""Command-line front end.

Subcommands:

* ``run``    -- execute a single config file;
* ``sweep``  -- execute a scenario file (grid sweep with replications);
* ``preset`` -- run a named built-in scenario.

``TOPICS_SIM_SEED`` supplies the seed when ``--seed`` is absent.  Exit codes:
0 success, 2 configuration error, 3 run failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from pathlib import Path

from .config import ConfigError, load_config
from .runner import run_simulation
from .sweep import (
    CampaignError,
    PRESET_NAMES,
    Scenario,
    load_scenario,
    preset_market,
    preset_theory_1,
    preset_theory_2,
    run_campaign,
)
from .world import read_presence_file

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUN = 3

_PERCENTILES = (10, 25, 50, 75, 90)


def _env_seed() -> int | None:
    raw = os.environ.get("TOPICS_SIM_SEED")
    if raw is None or raw == "":
        return None
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError([("TOPICS_SIM_SEED", f"not an integer: {raw!r}")]) from exc


def _resolve_seed(explicit: int | None, fallback: int = 0) -> int:
    if explicit is not None:
        return explicit
    env = _env_seed()
    return env if env is not None else fallback


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="topicsim",
        description="Simulate ad-network access to behavioral ad spaces under "
        "an epoch-based interest-topics disclosure protocol.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a single config file")
    p_run.add_argument("config", type=Path, help="flat key = value config file")
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--out", type=Path, default=Path("out"))
    p_run.add_argument("--parallelism", type=int, default=1)
    p_run.add_argument("--events", action="store_true", help="also write events.log")
    p_run.add_argument(
        "--presence-file",
        type=Path,
        default=None,
        help="per-network presence list (one fraction per line) overriding the config",
    )
    p_run.add_argument(
        "--debug-dump",
        type=Path,
        default=None,
        help="write per-user topic state as JSON lines (epoch, top list, sticky picks)",
    )

    p_sweep = sub.add_parser("sweep", help="run a JSON scenario file")
    p_sweep.add_argument("scenario", type=Path)
    p_sweep.add_argument("--out", type=Path, default=Path("out"))
    p_sweep.add_argument("--parallelism", type=int, default=1)
    p_sweep.add_argument("--events", action="store_true")

    p_preset = sub.add_parser("preset", help="run a built-in scenario")
    p_preset.add_argument("name", choices=PRESET_NAMES)
    p_preset.add_argument(
        "--percentile",
        default=None,
        help="browsing percentile for the market preset: 10, 25, 50, 75, 90 or 'all'",
    )
    p_preset.add_argument("--paper-scale", action="store_true",
                          help="full scale: 10,000 users, 55 weeks")
    p_preset.add_argument("--paper-exact", action="store_true",
                          help="use the reported 334 pages for the median percentile")
    p_preset.add_argument("--users", type=int, default=None,
                          help="override the market preset's user count")
    p_preset.add_argument("--replications", type=int, default=None)
    p_preset.add_argument("--seed", type=int, default=None)
    p_preset.add_argument("--out", type=Path, default=Path("out"))
    p_preset.add_argument("--parallelism", type=int, default=1)
    p_preset.add_argument("--events", action="store_true")
    return parser


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    seed = _resolve_seed(args.seed, fallback=cfg.seed)
    cfg = replace(cfg, seed=seed)
    if args.presence_file is not None:
        try:
            presence = read_presence_file(args.presence_file, cfg.num_ad_networks)
        except ValueError as exc:
            raise ConfigError([("presence", str(exc))]) from exc
        cfg = replace(cfg, presence=tuple(float(p) for p in presence))
    scenario = Scenario(name=args.config.stem, base=cfg, seed_base=seed).validate()
    if args.debug_dump is not None:
        # deterministic, so the dump run and the campaign run below coincide
        run_simulation(cfg, debug_dump_path=args.debug_dump)
    result = run_campaign(scenario, args.out, parallelism=args.parallelism, events=args.events)
    print(f"wrote {result.csv_path} ({result.rows} rows) and {result.summary_path}")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    scenario = load_scenario(args.scenario)
    result = run_campaign(scenario, args.out, parallelism=args.parallelism, events=args.events)
    print(f"wrote {result.csv_path} ({result.rows} rows) and {result.summary_path}")
    return EXIT_OK


def _market_scenarios(args, seed: int) -> list[Scenario]:
    if args.percentile is None:
        raise ConfigError([("percentile", "the market preset requires --percentile")])
    if str(args.percentile).lower() == "all":
        chosen = list(_PERCENTILES)
    else:
        try:
            chosen = [int(args.percentile)]
        except ValueError as exc:
            raise ConfigError(
                [("percentile", f"expected a percentile or 'all', got {args.percentile!r}")]
            ) from exc
    return [
        preset_market(
            pct,
            seed_base=seed,
            replications=args.replications if args.replications is not None else 3,
            paper_scale=args.paper_scale,
            paper_exact=args.paper_exact,
            num_users=args.users,
        )
        for pct in chosen
    ]


def _cmd_preset(args) -> int:
    seed = _resolve_seed(args.seed)
    reps = args.replications
    if args.name == "theory-1":
        scenarios = [preset_theory_1(seed_base=seed, replications=reps or 1)]
    elif args.name == "theory-2":
        scenarios = [preset_theory_2(seed_base=seed, replications=reps or 1)]
    else:
        scenarios = _market_scenarios(args, seed)

    multi = len(scenarios) > 1
    for scenario in scenarios:
        out = args.out / scenario.name if multi else Path(args.out)
        result = run_campaign(scenario, out, parallelism=args.parallelism, events=args.events)
        print(f"{scenario.name}: wrote {result.csv_path} ({result.rows} rows)")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "sweep":
            return _cmd_sweep(args)
        return _cmd_preset(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # CLI boundary: report and signal failure
        print(f"run failure: {exc}", file=sys.stderr)
        return EXIT_RUN


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
