"""Python bindings for the sdmp stochastic delay maximum principle toolkit."""

from ._sdmp import (
    ConfigError,
    DomainError,
    __version__,
    apply_override,
    config_hash,
    counter_normal,
    experiment_names,
    lq_control_law,
    normalize_config,
    problem_names,
    riccati,
    run,
    set_workers,
    simulate,
    solve_lq,
)

__all__ = [
    "ConfigError",
    "DomainError",
    "__version__",
    "apply_override",
    "config_hash",
    "counter_normal",
    "experiment_names",
    "lq_control_law",
    "normalize_config",
    "problem_names",
    "riccati",
    "run",
    "set_workers",
    "simulate",
    "solve_lq",
]
