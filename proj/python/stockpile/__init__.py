"""Stationary cartel / fringe / storage market solver."""

from ._core import (
    ConfigError,
    ContractViolation,
    DivergenceError,
    ModelParams,
    __version__,
    asymptotics,
    load_config,
    policy,
    simulate,
    solve,
    solve_constant_fringe,
)

__all__ = [
    "ConfigError",
    "ContractViolation",
    "DivergenceError",
    "ModelParams",
    "__version__",
    "asymptotics",
    "load_config",
    "policy",
    "simulate",
    "solve",
    "solve_constant_fringe",
]
