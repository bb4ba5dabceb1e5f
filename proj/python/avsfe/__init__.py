"""Python bindings for the avsfe solver."""

from ._avsfe import (
    LINE_HEADER,
    RECORDS_HEADER,
    AvsfeError,
    ConfigError,
    RunConfig,
    SolverError,
    dof_count,
    fit_slope,
    list_scenarios,
    load_config,
    parse_config,
    read_records_csv,
    run_study,
    write_records_csv,
)

__all__ = [
    "LINE_HEADER",
    "RECORDS_HEADER",
    "AvsfeError",
    "ConfigError",
    "RunConfig",
    "SolverError",
    "dof_count",
    "fit_slope",
    "list_scenarios",
    "load_config",
    "parse_config",
    "read_records_csv",
    "run_study",
    "write_records_csv",
]
