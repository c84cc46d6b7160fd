import pytest

from flowplan import ConfigError, GoalSpec, PlannerConfig, parse_config

from conftest import still_field

FULL = """\
# planner settings
v_ref_mps 0.5
c_drift 0
c_glide 2
c_forward 4
c_rotate 10
dispersal on
strict_paper_displacement off
outcome_semantics optimistic
goal_ix 15
goal_iy 22
goal_layer 0
goal_heading any
initial_heading_deg 0
"""


def test_full_document():
    cfg = parse_config(FULL)
    assert cfg.v_ref_mps == 0.5 and cfg.dt_s is None
    assert cfg.costs.rotate == 10
    assert cfg.dispersal and not cfg.strict_paper_displacement
    assert cfg.goal == GoalSpec(15, 22, 0, heading=None)
    assert cfg.initial_heading == 0


def test_defaults_when_empty():
    cfg = parse_config("")
    assert cfg.dt_s is None and cfg.v_ref_mps is None
    assert cfg.costs.as_table() == (0, 2, 2, 4, 10, 10)
    assert cfg.goal is None


def test_resolved_dt_from_v_ref():
    f = still_field(3, 3, cell=1000.0)
    assert parse_config("v_ref_mps 0.5").resolved_dt(f) == 2000.0
    assert parse_config("dt_s 123.0").resolved_dt(f) == 123.0
    # default reference speed 0.5 m/s when neither is given
    assert parse_config("").resolved_dt(f) == 2000.0


def test_dt_and_vref_mutually_exclusive():
    with pytest.raises(ConfigError, match="not both"):
        parse_config("dt_s 10\nv_ref_mps 0.5")


def test_unknown_key_rejected():
    with pytest.raises(ConfigError, match="unknown"):
        parse_config("warp_speed 9")


def test_duplicate_key_rejected():
    with pytest.raises(ConfigError, match="duplicate"):
        parse_config("c_drift 0\nc_drift 1")


def test_goal_heading_forms():
    assert parse_config("goal_ix 1\ngoal_iy 2\ngoal_heading 90").goal.heading == 2
    assert parse_config("goal_ix 1\ngoal_iy 2\ngoal_heading any").goal.heading is None
    with pytest.raises(ConfigError):
        parse_config("goal_ix 1\ngoal_iy 2\ngoal_heading 30")
    with pytest.raises(ConfigError, match="goal_ix"):
        parse_config("goal_heading 90")


def test_goal_needs_both_coordinates():
    with pytest.raises(ConfigError):
        parse_config("goal_ix 1")


def test_semantics_validated():
    with pytest.raises(ConfigError):
        parse_config("outcome_semantics hopeful")


def test_cost_ordering_enforced():
    with pytest.raises(ValueError):
        parse_config("c_drift 5\nc_glide 2")


def test_initial_heading_must_be_multiple_of_45():
    with pytest.raises(ConfigError):
        PlannerConfig(initial_heading_deg=30.0)
    assert PlannerConfig(initial_heading_deg=90.0).initial_heading == 2
