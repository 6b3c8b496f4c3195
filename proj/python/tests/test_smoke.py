import math
from pathlib import Path

import pytest

import evasion

SCENARIOS = Path(__file__).resolve().parents[2] / "scenarios"


@pytest.fixture(scope="module")
def table():
    return evasion.build_default_ymax_table()


def test_table_ordering(table):
    assert table.lookup(0.0, 5.0) == 0.0
    assert table.lookup(3.0, 7.0) > table.lookup(3.0, 5.0) > table.lookup(3.0, 1.0)
    with pytest.raises(evasion.OutOfTable):
        table.lookup(10.0, 5.0)


def test_two_step_plan_uniform_weights():
    u_x, u_y, cost, status = evasion.plan_two_step()
    assert abs(u_x) <= 0.15
    assert abs(u_y - 0.53) <= 0.15
    assert math.isfinite(cost)
    assert status in {"converged", "budget_exhausted"}


def test_relaxed_episode_is_collision_free(table):
    cfg = evasion.load_scenario(SCENARIOS / "relaxed_v5_tau5.ini")
    trace = evasion.run_episode(cfg.scenario, cfg.vehicle, table=table)
    assert not trace.aborted
    assert len(trace) == round(cfg.scenario.sim_duration / 0.01) + 1
    report = trace.clearance()
    assert not report.collided
    assert report.min_lateral_clearance > 0.0
    assert max(abs(d) for d in trace.column("delta")) <= cfg.vehicle.delta_max


def test_trace_is_deterministic(table, tmp_path):
    s = evasion.Scenario()
    s.nu = 0.3
    a = evasion.run_episode(s, table=table)
    b = evasion.run_episode(s, table=table)
    assert a.to_csv() == b.to_csv()
    out = tmp_path / "trace.csv"
    a.write(out)
    assert out.read_text().startswith("t,x,y,theta")


def test_fallback_only_episode(table):
    s = evasion.Scenario()
    s.nu = 0.6
    s.detection_distance = 10.0
    trace = evasion.run_episode(s, force_plan_failure=True, table=table)
    assert trace.plan_failures >= trace.plan_calls > 0
    assert not trace.clearance().collided


def test_bad_scenario_text_names_the_key():
    with pytest.raises(evasion.ConfigError, match="bogus"):
        evasion.parse_scenario("[scenario]\nbogus = 1\n")


def test_max_steer_displacement_grows():
    y = evasion.max_steer_displacement(5.0, [0.0, 0.5, 1.0, 2.0])
    assert y[0] == 0.0
    assert y[1] < y[2] < y[3]
