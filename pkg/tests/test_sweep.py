import json
import subprocess
import sys

import pytest

from topicsim import ConfigError, SimConfig
from topicsim.sweep import (
    CSV_HEADER,
    Scenario,
    preset_market,
    preset_theory_1,
    preset_theory_2,
    run_campaign,
    scenario_from_dict,
)


def small_base(**overrides):
    base = dict(
        num_users=3,
        num_websites=40,
        num_ad_networks=3,
        num_weeks=5,
        pages_per_epoch=6,
        user_loyalty=0.4,
        ads_on_site=2,
        max_topics=2,
        presence=0.5,
        interest_proportion=1.0,
        taxonomy_size=10,
        warmup_epochs=1,
    )
    base.update(overrides)
    return SimConfig(**base)


def test_csv_schema_is_stable(tmp_path):
    scenario = Scenario(name="s", base=small_base(), seed_base=1)
    result = run_campaign(scenario, tmp_path)
    lines = result.csv_path.read_text().splitlines()
    assert lines[0] == CSV_HEADER
    assert lines[0] == (
        "scenario,seed,network_id,presence,eligibility_ratio,"
        "low_competition_ratio,sole_competitor_ratio,fill_rate"
    )
    assert len(lines) == 1 + 3  # one row per network
    first = lines[1].split(",")
    assert first[0] == "s" and first[1] == "1" and first[2] == "0"


def test_campaign_rerun_is_byte_identical(tmp_path):
    scenario = scenario_from_dict(
        {
            "name": "grid",
            "base": {
                "num_users": 3, "num_websites": 40, "num_ad_networks": 2,
                "num_weeks": 5, "pages_per_epoch": 6, "user_loyalty": 0.4,
                "ads_on_site": 2, "max_topics": 2, "presence": 0.5,
                "interest_proportion": 1.0, "taxonomy_size": 10, "warmup_epochs": 1,
            },
            "axes": {"presence": [0.3, 0.9]},
            "replications": 3,
            "seed_base": 5,
        }
    )
    a = run_campaign(scenario, tmp_path / "a")
    b = run_campaign(scenario, tmp_path / "b")
    assert a.csv_path.read_bytes() == b.csv_path.read_bytes()
    assert a.rows == 2 * 3 * 2  # points x reps x networks


def test_campaign_parallelism_matches_serial(tmp_path):
    scenario = Scenario(
        name="par",
        base=small_base(),
        axes={"presence": [0.2, 0.8]},
        replications=2,
        seed_base=9,
    )
    serial = run_campaign(scenario, tmp_path / "serial", parallelism=1)
    parallel = run_campaign(scenario, tmp_path / "parallel", parallelism=4)
    assert serial.csv_path.read_bytes() == parallel.csv_path.read_bytes()
    s = json.loads(serial.summary_path.read_text())
    p = json.loads(parallel.summary_path.read_text())
    assert s == p


def test_summary_contains_resolved_config_and_seeds(tmp_path):
    scenario = Scenario(name="s", base=small_base(seed=4), replications=2, seed_base=4)
    result = run_campaign(scenario, tmp_path)
    summary = json.loads(result.summary_path.read_text())
    assert "num_users = 3" in summary["config"]
    assert [run["seed"] for run in summary["runs"]] == [4, 5]
    assert summary["aggregate"]["fill_rate_by_point"]
    assert not (tmp_path / "INCOMPLETE").exists()


def test_failed_campaign_leaves_marker(tmp_path):
    scenario = Scenario(name="s", base=small_base(), seed_base=0)
    scenario.axes = {"num_ad_networks": [3]}
    scenario.base = small_base(presence=(0.5, 0.5, 0.5))

    # sabotage a point so the run itself raises after validation passes
    import topicsim.sweep as sweep_mod

    original = sweep_mod._run_point

    def boom(args):
        raise RuntimeError("injected failure")

    sweep_mod._run_point = boom
    try:
        with pytest.raises(sweep_mod.CampaignError):
            run_campaign(scenario, tmp_path)
    finally:
        sweep_mod._run_point = original
    assert (tmp_path / "INCOMPLETE").exists()


def test_scenario_rejects_unknown_axis():
    with pytest.raises(ConfigError):
        Scenario(name="s", base=small_base(), axes={"bogus_axis": [1]}).validate()


def test_scenario_rejects_invalid_grid_point():
    with pytest.raises(ConfigError):
        Scenario(name="s", base=small_base(), axes={"presence": [0.5, 2.0]}).validate()


def test_preset_theory_axes():
    t1 = preset_theory_1()
    assert t1.axes["num_ad_networks"] == [10, 25, 50, 100, 200]
    assert 0.02 in t1.axes["presence"]
    assert t1.base.warmup_epochs == 3
    t2 = preset_theory_2()
    assert t2.base.num_ad_networks == 50
    assert t2.base.warmup_epochs == 0
    assert 0.1 in t2.axes["interest_proportion"]


def test_preset_market_profiles():
    m50 = preset_market(50)
    assert m50.base.pages_per_epoch == 335
    assert m50.base.user_loyalty == 0.43
    assert m50.base.num_ad_networks == 174
    assert len(m50.base.presence) == 174
    assert m50.base.presence[0] == 0.5924
    assert m50.base.num_users == 500 and m50.base.num_weeks == 20
    assert m50.replications == 3

    exact = preset_market(50, paper_exact=True)
    assert exact.base.pages_per_epoch == 334

    m10 = preset_market(10)
    assert m10.base.pages_per_epoch == 33 and m10.base.user_loyalty == 0.14

    scaled = preset_market(90, paper_scale=True)
    assert scaled.base.num_users == 10_000 and scaled.base.num_weeks == 55

    with pytest.raises(ConfigError):
        preset_market(60)


def _run_cli(args, **kwargs):
    return subprocess.run(
        [sys.executable, "-m", "topicsim.cli", *args],
        capture_output=True,
        text=True,
        **kwargs,
    )


def test_cli_run_and_exit_codes(tmp_path):
    from topicsim.config import save_config

    cfgfile = tmp_path / "run.cfg"
    save_config(small_base(seed=3), cfgfile)
    done = _run_cli(["run", str(cfgfile), "--out", str(tmp_path / "out")])
    assert done.returncode == 0, done.stderr
    assert (tmp_path / "out" / "results.csv").exists()
    assert (tmp_path / "out" / "summary.json").exists()

    bad = tmp_path / "bad.cfg"
    bad.write_text("num_users = -3\n")
    assert _run_cli(["run", str(bad)]).returncode == 2

    missing = _run_cli(["run", str(tmp_path / "nope.cfg")])
    assert missing.returncode == 2


def test_cli_env_seed_fallback(tmp_path):
    from topicsim.config import save_config

    cfgfile = tmp_path / "run.cfg"
    save_config(small_base(seed=0), cfgfile)
    env = {"TOPICS_SIM_SEED": "21"}
    import os

    done = _run_cli(
        ["run", str(cfgfile), "--out", str(tmp_path / "o")],
        env={**os.environ, **env},
    )
    assert done.returncode == 0, done.stderr
    summary = json.loads((tmp_path / "o" / "summary.json").read_text())
    assert summary["runs"][0]["seed"] == 21


def test_cli_presence_file_override(tmp_path):
    from topicsim.config import save_config

    cfgfile = tmp_path / "run.cfg"
    save_config(small_base(seed=3), cfgfile)
    pfile = tmp_path / "presence.txt"
    pfile.write_text("1.0\n0.5\n0.01\n")
    done = _run_cli(
        ["run", str(cfgfile), "--out", str(tmp_path / "o"), "--presence-file", str(pfile)]
    )
    assert done.returncode == 0, done.stderr
    rows = (tmp_path / "o" / "results.csv").read_text().splitlines()[1:]
    assert [r.split(",")[3] for r in rows] == ["1.0", "0.5", "0.01"]

    short = tmp_path / "short.txt"
    short.write_text("0.5\n")
    bad = _run_cli(
        ["run", str(cfgfile), "--out", str(tmp_path / "o2"), "--presence-file", str(short)]
    )
    assert bad.returncode == 2


def test_cli_debug_dump(tmp_path):
    from topicsim.config import save_config

    cfgfile = tmp_path / "run.cfg"
    save_config(small_base(seed=3), cfgfile)
    dump = tmp_path / "debug.jsonl"
    done = _run_cli(
        ["run", str(cfgfile), "--out", str(tmp_path / "o"), "--debug-dump", str(dump)]
    )
    assert done.returncode == 0, done.stderr
    lines = [json.loads(x) for x in dump.read_text().splitlines()]
    assert len(lines) == 3 * 5  # users x weeks
    assert all({"user", "epoch", "top", "sticky"} == set(rec) for rec in lines)


def test_cli_events_log(tmp_path):
    from topicsim.config import save_config

    cfgfile = tmp_path / "run.cfg"
    save_config(small_base(seed=3), cfgfile)
    done = _run_cli(["run", str(cfgfile), "--out", str(tmp_path / "out"), "--events"])
    assert done.returncode == 0, done.stderr
    lines = (tmp_path / "out" / "events.log").read_text().splitlines()
    assert len(lines) == 3 * 5 * 6  # users x weeks x pages
    rec = json.loads(lines[0])
    assert {"scenario", "seed", "user", "epoch", "site", "present", "eligible",
            "winners", "counted"} <= set(rec)
