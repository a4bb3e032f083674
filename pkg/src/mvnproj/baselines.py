"""Comparator normality tests: Mardia's skewness/kurtosis and Henze-Zirkler."""

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import lognorm

from .linalg import residualize
from .special import chi2_cdf, normal_cdf

# keeps the n x n distance arrays of a batch below this many entries
_HZ_BLOCK = 4_000_000


@dataclass
class MardiaReport:
    b1p: float
    b2p: float
    skew_stat: float
    kurt_stat: float
    skew_pvalue: float
    kurt_pvalue: float
    decision: str


@dataclass
class HzReport:
    beta: float
    statistic: float
    pvalue: float
    decision: str


MARDIA_COMBINE = ("either", "bonferroni")
MARDIA_DIVISORS = ("n-1", "n")


def mardia_moments(data, divisor="n-1"):
    """Multivariate skewness ``b1p`` and kurtosis ``b2p``.

    ``g_ij = (x_i - xbar)' S^-1 (x_j - xbar)`` with ``S`` the sample
    covariance using divisor ``n - 1`` (default) or ``n``.
    """
    if divisor not in MARDIA_DIVISORS:
        raise ValueError(f"divisor must be one of {MARDIA_DIVISORS}")
    data = np.asarray(data, dtype=float)
    n = data.shape[-2]
    z = residualize(data)
    g = z @ np.swapaxes(z, -1, -2)
    if divisor == "n-1":
        g = g * ((n - 1.0) / n)
    b1p = np.mean(g**3, axis=(-2, -1))
    b2p = np.mean(np.diagonal(g, axis1=-2, axis2=-1) ** 2, axis=-1)
    return b1p, b2p


def mardia_pvalues(b1p, b2p, n, p):
    skew_stat = n * b1p / 6.0
    kurt_stat = (b2p - p * (p + 2)) / math.sqrt(8.0 * p * (p + 2) / n)
    df = p * (p + 1) * (p + 2) // 6
    skew_p = 1.0 - chi2_cdf(skew_stat, df)
    kurt_p = 2.0 * normal_cdf(-np.abs(kurt_stat))
    return skew_stat, kurt_stat, skew_p, kurt_p


def _level(alpha, combine):
    if combine not in MARDIA_COMBINE:
        raise ValueError(f"combine must be one of {MARDIA_COMBINE}")
    return alpha / 2.0 if combine == "bonferroni" else alpha


def mardia_reject(data, alpha=0.05, combine="either", divisor="n-1"):
    """Batched Mardia decisions over ``(..., n, p)`` data."""
    data = np.asarray(data, dtype=float)
    n, p = data.shape[-2:]
    level = _level(alpha, combine)
    b1p, b2p = mardia_moments(data, divisor)
    _, _, skew_p, kurt_p = mardia_pvalues(b1p, b2p, n, p)
    return (skew_p < level) | (kurt_p < level)


def mardia_test(data, alpha=0.05, combine="either", divisor="n-1"):
    """Mardia's test from the skewness and kurtosis sub-tests.

    Skewness ``n b1p / 6`` is referred to chi-square with
    ``p (p + 1) (p + 2) / 6`` degrees of freedom, kurtosis
    ``(b2p - p (p + 2)) / sqrt(8 p (p + 2) / n)`` to a two-sided standard
    normal. ``combine="either"`` rejects when either p-value is below
    ``alpha``; ``"bonferroni"`` compares each with ``alpha / 2``.
    """
    data = np.asarray(data, dtype=float)
    n, p = data.shape
    level = _level(alpha, combine)
    b1p, b2p = mardia_moments(data, divisor)
    skew, kurt, skew_p, kurt_p = mardia_pvalues(b1p, b2p, n, p)
    reject = skew_p < level or kurt_p < level
    return MardiaReport(float(b1p), float(b2p), float(skew), float(kurt),
                        float(skew_p), float(kurt_p), "reject" if reject else "retain")


def hz_beta(n, p):
    return 2.0**-0.5 * (n * (2.0 * p + 1.0) / 4.0) ** (1.0 / (p + 4.0))


def _hz_block(z, beta):
    n, p = z.shape[-2:]
    b2 = beta * beta
    sq = np.sum(z * z, axis=-1)
    gram = z @ np.swapaxes(z, -1, -2)
    dist = np.maximum(sq[..., :, None] + sq[..., None, :] - 2.0 * gram, 0.0)
    pair_term = np.mean(np.exp(-0.5 * b2 * dist), axis=(-2, -1))
    single_term = np.mean(np.exp(-b2 * sq / (2.0 * (1.0 + b2))), axis=-1)
    return n * (pair_term
                - 2.0 * (1.0 + b2) ** (-p / 2.0) * single_term
                + (1.0 + 2.0 * b2) ** (-p / 2.0))


def hz_statistic(data):
    """Henze-Zirkler statistic for one dataset or a stack of datasets."""
    z = residualize(np.asarray(data, dtype=float))
    n, p = z.shape[-2:]
    beta = hz_beta(n, p)
    if z.ndim == 2:
        return float(_hz_block(z, beta))
    flat = z.reshape((-1, n, p))
    step = max(1, _HZ_BLOCK // (n * n))
    out = np.concatenate([_hz_block(flat[i:i + step], beta)
                          for i in range(0, len(flat), step)])
    return out.reshape(z.shape[:-2])


def hz_lognormal_moments(n, p):
    """Mean and variance of the null statistic, used for the lognormal fit."""
    b = hz_beta(n, p)
    b2, b4, b8 = b**2, b**4, b**8
    a = 1.0 + 2.0 * b2
    w = (1.0 + b2) * (1.0 + 3.0 * b2)
    mu = 1.0 - a ** (-p / 2.0) * (1.0 + p * b2 / a + p * (p + 2) * b4 / (2.0 * a * a))
    var = (2.0 * (1.0 + 4.0 * b2) ** (-p / 2.0)
           + 2.0 * a ** (-p) * (1.0 + 2.0 * p * b4 / a**2 + 3.0 * p * (p + 2) * b8 / (4.0 * a**4))
           - 4.0 * w ** (-p / 2.0) * (1.0 + 3.0 * p * b4 / (2.0 * w) + p * (p + 2) * b8 / (2.0 * w * w)))
    return mu, var


def hz_lognormal_pvalue(statistic, n, p):
    mu, var = hz_lognormal_moments(n, p)
    log_mean = math.log(math.sqrt(mu**4 / (var + mu * mu)))
    log_sd = math.sqrt(math.log((var + mu * mu) / (mu * mu)))
    return lognorm.sf(statistic, log_sd, scale=math.exp(log_mean))


def hz_test(data, alpha=0.05, null_sample=None):
    """Henze-Zirkler test.

    Parameters
    ----------
    data : array_like, shape (n, p)
    alpha : float
    null_sample : array_like, optional
        Simulated null statistics for the same ``(n, p)``. When given, the
        p-value is the Monte Carlo estimate ``(1 + #{null >= T}) / (m + 1)``;
        otherwise the lognormal approximation is used.
    """
    data = np.asarray(data, dtype=float)
    n, p = data.shape
    stat = hz_statistic(data)
    if null_sample is None:
        pval = float(hz_lognormal_pvalue(stat, n, p))
    else:
        null_sample = np.asarray(null_sample, dtype=float)
        pval = (1.0 + np.count_nonzero(null_sample >= stat)) / (null_sample.size + 1.0)
    return HzReport(hz_beta(n, p), stat, pval, "reject" if pval < alpha else "retain")
