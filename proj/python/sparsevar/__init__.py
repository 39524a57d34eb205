from ._core import (
    ConfigError,
    ConvergenceError,
    DataError,
    __version__,
    gen_transition,
    infer,
    lasso,
    lasso_cv,
    prices_to_returns,
    simulate_var,
    soft_threshold,
    spectral_radius,
)

__all__ = [
    "ConfigError",
    "ConvergenceError",
    "DataError",
    "gen_transition",
    "infer",
    "lasso",
    "lasso_cv",
    "prices_to_returns",
    "simulate_var",
    "soft_threshold",
    "spectral_radius",
]
