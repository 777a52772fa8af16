"""Proactive RSU caching for vehicular networks."""

from ._procache import (
    CapacityError,
    ConfigError,
    IoError,
    Library,
    ParameterError,
    RsuConfig,
    Scenario,
    ScenarioConfig,
    UndefinedGainError,
    ValidationError,
    VehicleProfile,
    chain_objective,
    contact_time,
    dump_scenario_config,
    evaluate,
    exhaustive_coop,
    exhaustive_noncoop,
    greedy_coop,
    greedy_noncoop,
    load_scenario_config,
    parse_scenario_config,
    percentage_gain,
    run_sweep,
    validate_scenario,
)

__all__ = [name for name in dir() if not name.startswith("_")]
