"""Shared test helpers: chi-square gates for seeded frequency checks."""

import math


def chi2_crit(df: int, z: float = 3.0902) -> float:
    """Approximate 0.999 quantile of chi-square via Wilson-Hilferty."""
    h = 2.0 / (9.0 * df)
    return df * (1.0 - h + z * math.sqrt(h)) ** 3


def chi2_stat(counts, expected) -> float:
    return sum((c - e) ** 2 / e for c, e in zip(counts, expected))


def freq_band(p: float, trials: int, z: float = 3.0) -> float:
    """Half-width of a z-sigma binomial frequency band."""
    return z * math.sqrt(p * (1.0 - p) / trials)
