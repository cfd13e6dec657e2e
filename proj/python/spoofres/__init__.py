"""Resilient distributed estimation under identity spoofing."""

from ._spoofres import (
    Config,
    Error,
    Trace,
    beta,
    diagonalize,
    filtered_update,
    kbar_bound,
    load_config,
    max_strong_robustness,
    parent_threshold,
    parse_config,
    preflight,
    random_config,
    run,
    scenario,
    strongly_robust,
)

__all__ = [
    "Config",
    "Error",
    "Trace",
    "beta",
    "diagonalize",
    "filtered_update",
    "kbar_bound",
    "load_config",
    "max_strong_robustness",
    "parent_threshold",
    "parse_config",
    "preflight",
    "random_config",
    "run",
    "scenario",
    "strongly_robust",
]
