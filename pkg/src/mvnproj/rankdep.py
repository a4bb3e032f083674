"""Data-driven rank statistic for independence of two samples."""

import math

import numpy as np
from scipy.stats import rankdata

from .neyman import DEFAULT_RULE, SmoothResult, select_order, statistic_at_order
from .special import legendre_basis


def midranks(values):
    """Ranks 1..n along the last axis, ties receiving their average position."""
    values = np.asarray(values, dtype=float)
    if values.size == 0 or values.shape[-1] == 0:
        raise ValueError("cannot rank an empty sample")
    return rankdata(values, method="average", axis=-1)


def rank_components(x, y, dmax):
    """``M_j = n^(-1/2) sum_i b_j(u_i) b_j(v_i)`` with ``u, v`` the rescaled ranks."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ValueError(f"samples differ in shape: {x.shape} vs {y.shape}")
    n = x.shape[-1]
    u = (midranks(x) - 0.5) / n
    v = (midranks(y) - 0.5) / n
    prod = legendre_basis(u, dmax) * legendre_basis(v, dmax)
    return np.moveaxis(prod.sum(axis=-1), 0, -1) / math.sqrt(n)


def t2_values(x, y, rule=DEFAULT_RULE):
    """Batched rank statistic: returns ``(statistic, order, components)``.

    Order selection uses ``rule.for_ranks()``.
    """
    M = rank_components(x, y, rule.dmax)
    order = np.asarray(select_order(M, np.shape(x)[-1], rule.for_ranks()))
    return statistic_at_order(M, order), order, M


def t2_statistic(x, y, rule=DEFAULT_RULE):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 1 or y.ndim != 1 or x.size != y.size:
        raise ValueError("x and y must be one-dimensional samples of equal length")
    if x.size < 2:
        raise ValueError("need at least two observations")
    stat, order, M = t2_values(x, y, rule)
    return SmoothResult(float(stat), int(order), M)
