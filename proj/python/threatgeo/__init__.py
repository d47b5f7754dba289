"""Spatio-temporal analytics for crowd-sourced threat-intelligence feeds."""

from pathlib import Path

from ._core import (
    Corpus,
    Gazetteer,
    ThreatgeoError,
    __version__,
    arma_series,
    count_by_country,
    cumulative_share,
    estimate_transitions,
    fit_arima,
    forecast_next,
    grid_search,
    lagged_correlation,
    levenshtein,
    pearson,
    run_cli,
    spectral_cluster,
    synth_generate,
)



def default_gazetteer():
    """The bundled gazetteer, from the wheel if installed, else the source tree."""
    bundled = Path(__file__).with_name("data") / "gazetteer.csv"
    if bundled.is_file():
        return Gazetteer.load(str(bundled))
    return Gazetteer.default()


__all__ = [
    "Corpus",
    "Gazetteer",
    "ThreatgeoError",
    "__version__",
    "arma_series",
    "count_by_country",
    "cumulative_share",
    "default_gazetteer",
    "estimate_transitions",
    "fit_arima",
    "forecast_next",
    "grid_search",
    "lagged_correlation",
    "levenshtein",
    "pearson",
    "run_cli",
    "spectral_cluster",
    "synth_generate",
]
