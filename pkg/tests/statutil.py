"""Shared statistical helpers for the test suite."""

from __future__ import annotations

import numpy as np
from scipy import stats


def chi_square_pvalue(observed, expected, min_expected: float = 5.0) -> float:
    """Goodness-of-fit p-value with low-expectation bins pooled into one."""
    observed = np.asarray(observed, dtype=float)
    expected = np.asarray(expected, dtype=float)
    keep = expected >= min_expected
    if (~keep).any():
        observed = np.append(observed[keep], observed[~keep].sum())
        expected = np.append(expected[keep], expected[~keep].sum())
    if len(expected) < 2:
        return 1.0
    chi2 = float(((observed - expected) ** 2 / expected).sum())
    return float(stats.chi2.sf(chi2, len(expected) - 1))


def two_sample_chi_square_pvalue(counts_a, counts_b, min_expected: float = 5.0) -> float:
    """Homogeneity test for two histograms over the same bins."""
    a = np.asarray(counts_a, dtype=float)
    b = np.asarray(counts_b, dtype=float)
    pooled = (a + b) / (a.sum() + b.sum())
    keep = np.minimum(a.sum() * pooled, b.sum() * pooled) >= min_expected
    if (~keep).any():
        a = np.append(a[keep], a[~keep].sum())
        b = np.append(b[keep], b[~keep].sum())
        pooled = (a + b) / (a.sum() + b.sum())
    chi2 = 0.0
    for counts in (a, b):
        expected = counts.sum() * pooled
        chi2 += float(((counts - expected) ** 2 / expected).sum())
    return float(stats.chi2.sf(chi2, len(pooled) - 1))


def ks_uniform_phase_pvalue(phases) -> float:
    """Kolmogorov-Smirnov p-value of samples against uniform on (-pi, pi]."""
    return float(stats.kstest(np.asarray(phases), stats.uniform(-np.pi, 2 * np.pi).cdf).pvalue)


def empirical_counts(samples, bins) -> np.ndarray:
    index = {key: i for i, key in enumerate(bins)}
    counts = np.zeros(len(bins))
    for s in samples:
        counts[index[s]] += 1
    return counts
