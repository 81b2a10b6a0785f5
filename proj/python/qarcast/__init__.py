"""Bootstrap prediction intervals for AR(p) and QAR(p) time series."""

from ._core import (
    PredictionInterval,
    QarcastError,
    backtest,
    bootstrap_draws,
    load_series_csv,
    methods,
    prediction_intervals,
    run_experiment,
    simulate,
    solve_qr,
)

__all__ = [
    "PredictionInterval",
    "QarcastError",
    "backtest",
    "bootstrap_draws",
    "load_series_csv",
    "methods",
    "prediction_intervals",
    "run_experiment",
    "simulate",
    "solve_qr",
]
__version__ = "0.1.0"
