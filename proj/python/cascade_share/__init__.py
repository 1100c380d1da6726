"""Robust two-application sensing cascades with shared features."""

from ._core import (
    BracketError,
    Config,
    ConfigError,
    EnumerationCapError,
    Solution,
    SolverError,
    estimate_pmf,
    evidence_pmf,
    optimize,
    posterior_update,
    robustify,
    roc_pr,
    solve_breakpoints,
    twin_experiment,
)

__all__ = [
    "BracketError",
    "Config",
    "ConfigError",
    "EnumerationCapError",
    "Solution",
    "SolverError",
    "estimate_pmf",
    "evidence_pmf",
    "optimize",
    "posterior_update",
    "robustify",
    "roc_pr",
    "solve_breakpoints",
    "twin_experiment",
]
