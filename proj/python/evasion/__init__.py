"""Evasive maneuver planning for a single-track vehicle model."""

from ._evasion import (
    BarrierMode,
    ClearanceReport,
    ConfigError,
    EpisodeTrace,
    EvasionError,
    LowSpeedDomain,
    Obstacle,
    OutOfTable,
    Scenario,
    ScenarioConfig,
    VehicleParams,
    YMaxTable,
    build_default_ymax_table,
    load_scenario,
    max_steer_displacement,
    parse_scenario,
    plan_two_step,
    run_episode,
)

__all__ = [
    "BarrierMode",
    "ClearanceReport",
    "ConfigError",
    "EpisodeTrace",
    "EvasionError",
    "LowSpeedDomain",
    "Obstacle",
    "OutOfTable",
    "Scenario",
    "ScenarioConfig",
    "VehicleParams",
    "YMaxTable",
    "build_default_ymax_table",
    "load_scenario",
    "max_steer_displacement",
    "parse_scenario",
    "plan_two_step",
    "run_episode",
]
