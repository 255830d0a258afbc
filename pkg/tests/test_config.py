from dataclasses import replace

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from topicsim import ConfigError, PERCENTILE_PROFILES, SimConfig, validate_config
from topicsim.config import parse_config_text, serialize_config, with_percentile_profile


def make_cfg(**overrides):
    base = dict(
        num_users=10,
        num_websites=50_000,
        num_ad_networks=5,
        num_weeks=10,
        pages_per_epoch=334,
        user_loyalty=0.43,
        ads_on_site=10,
        max_topics=3,
        presence=0.8,
        interest_proportion=1.0,
        seed=1,
    )
    base.update(overrides)
    return SimConfig(**base)


def test_reported_scale_config_accepted():
    cfg = make_cfg(pages_per_epoch=334, num_websites=50_000)
    assert validate_config(cfg) is cfg


def test_zero_loyalty_accepted():
    validate_config(make_cfg(user_loyalty=0.0))


def test_max_topics_above_taxonomy_rejected():
    with pytest.raises(ConfigError) as err:
        validate_config(make_cfg(max_topics=4, taxonomy_size=3))
    assert any(field == "max_topics" for field, _ in err.value.violations)


def test_presence_list_length_and_range_are_distinct_errors():
    with pytest.raises(ConfigError) as err:
        validate_config(make_cfg(presence=(0.5, 0.5), num_ad_networks=3))
    msgs = [m for f, m in err.value.violations if f == "presence"]
    assert msgs and "length" in msgs[0]

    with pytest.raises(ConfigError) as err:
        validate_config(make_cfg(presence=(0.5, 1.5, 0.2), num_ad_networks=3))
    msgs = [m for f, m in err.value.violations if f == "presence"]
    assert msgs and "length" not in msgs[0]


def test_pages_cannot_exceed_websites():
    with pytest.raises(ConfigError) as err:
        validate_config(make_cfg(pages_per_epoch=100, num_websites=50))
    assert any(field == "pages_per_epoch" for field, _ in err.value.violations)


def test_warmup_must_leave_counted_epochs():
    with pytest.raises(ConfigError):
        validate_config(make_cfg(warmup_epochs=10, num_weeks=10))
    validate_config(make_cfg(warmup_epochs=9, num_weeks=10))


def test_error_report_names_every_bad_field():
    with pytest.raises(ConfigError) as err:
        validate_config(make_cfg(num_users=0, user_loyalty=1.5, interest_proportion=0.0))
    fields = {f for f, _ in err.value.violations}
    assert {"num_users", "user_loyalty", "interest_proportion"} <= fields


def test_percentile_table_is_exact():
    expected = {
        10: (33, 0.14),
        25: (114, 0.28),
        50: (335, 0.43),
        75: (668, 0.58),
        90: (1083, 0.74),
    }
    assert set(PERCENTILE_PROFILES) == set(expected)
    for pct, (pages, loyalty) in expected.items():
        prof = PERCENTILE_PROFILES[pct]
        assert (prof.pages_per_epoch, prof.loyalty) == (pages, loyalty)
        assert prof.percentile == pct
    with pytest.raises(TypeError):
        PERCENTILE_PROFILES[10] = None


def test_percentile_profile_application():
    cfg = with_percentile_profile(make_cfg(), 50)
    assert cfg.pages_per_epoch == 335 and cfg.user_loyalty == 0.43
    with pytest.raises(ConfigError):
        with_percentile_profile(make_cfg(), 60)


def test_round_trip_scalar_and_list_presence():
    for cfg in (
        make_cfg(),
        make_cfg(presence=(0.5924, 0.1, 0.0001, 1.0, 0.25), num_ad_networks=5),
        make_cfg(observation_scope="source-epoch", topic_histogram="epoch",
                 strict_low_competition=True),
    ):
        validate_config(cfg)
        assert parse_config_text(serialize_config(cfg)) == cfg


def test_unknown_keys_are_errors():
    text = serialize_config(make_cfg()) + "mystery_knob = 3\n"
    with pytest.raises(ConfigError) as err:
        parse_config_text(text)
    assert any(f == "mystery_knob" for f, _ in err.value.violations)


def test_comments_and_blank_lines_ignored():
    text = "# comment\n\n" + serialize_config(make_cfg())
    assert parse_config_text(text) == make_cfg()


@settings(max_examples=60, deadline=None)
@given(
    loyalty=st.floats(0.0, 1.0, allow_nan=False),
    pages=st.integers(1, 400),
    seed=st.integers(0, 2**64 - 1),
    interest=st.floats(0.01, 1.0, allow_nan=False),
)
def test_round_trip_property(loyalty, pages, seed, interest):
    cfg = make_cfg(
        user_loyalty=loyalty, pages_per_epoch=pages, seed=seed, interest_proportion=interest
    )
    validate_config(cfg)
    assert parse_config_text(serialize_config(cfg)) == cfg


def test_interest_set_size_rounding():
    assert make_cfg(interest_proportion=1.0).interest_set_size() == 349
    assert make_cfg(interest_proportion=0.1).interest_set_size() == 35
    assert make_cfg(interest_proportion=0.001).interest_set_size() == 1


def test_observation_scope_validated():
    with pytest.raises(ConfigError):
        validate_config(replace(make_cfg(), observation_scope="sometimes"))
    with pytest.raises(ConfigError):
        validate_config(replace(make_cfg(), topic_histogram="fortnightly"))
