"""Ranked count spectra: statistics, model fits, selection and Poisson resampling."""

from ._core import (
    InputError,
    NumericalError,
    aic,
    bic,
    empirical_pvalue,
    fit_beta,
    fit_log,
    fit_piecewise_log,
    gini,
    normalize,
    reference_fixture,
    parse_counts,
    parse_pairs,
    ranked,
    select,
    stats,
    top_share,
    validate_pinyin,
)

__all__ = [
    "InputError",
    "NumericalError",
    "aic",
    "bic",
    "empirical_pvalue",
    "fit_beta",
    "fit_log",
    "fit_piecewise_log",
    "gini",
    "normalize",
    "reference_fixture",
    "parse_counts",
    "parse_pairs",
    "ranked",
    "select",
    "stats",
    "top_share",
    "validate_pinyin",
]
