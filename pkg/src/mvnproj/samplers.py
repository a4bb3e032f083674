"""Null and alternative data generators.

``A1`` .. ``A7`` are bivariate laws with standard normal marginals that are
not jointly normal; ``T1V`` is the trivariate analogue of ``A7``.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .linalg import sqrt_spd, symmetrize
from .special import normal_quantile

FGM_EPSILON = 0.999
A3_RHO = 0.9
A6_NORMALIZER = 0.993795

DESIGN_NAMES = ("A1", "A2", "A3", "A4", "A5", "A6", "A7", "T1V")


@dataclass(frozen=True)
class Design:
    """Identifies a data-generating law.

    ``tag`` is one of ``NULL_MVN`` or the names in ``DESIGN_NAMES``; only
    ``NULL_MVN`` carries ``mean`` and ``cov``.
    """

    tag: str
    mean: tuple = None
    cov: tuple = None

    @property
    def dim(self):
        if self.tag == "NULL_MVN":
            return len(self.mean)
        return 3 if self.tag == "T1V" else 2

    @property
    def name(self):
        if self.tag != "NULL_MVN":
            return self.tag
        if self.dim == 2 and self.cov[0][0] == self.cov[1][1] == 1.0 and self.mean == (0.0, 0.0):
            return f"N2(rho={self.cov[0][1]:g})"
        return f"N{self.dim}"


def null_mvn(mean, cov):
    mean = tuple(float(m) for m in mean)
    cov = symmetrize(cov)
    if cov.shape != (len(mean), len(mean)):
        raise ValueError("mean and covariance dimensions disagree")
    return Design("NULL_MVN", mean, tuple(tuple(row) for row in cov.tolist()))


def null_bivariate(rho):
    """Standard bivariate normal with correlation ``rho``."""
    return null_mvn((0.0, 0.0), [[1.0, rho], [rho, 1.0]])


def parse_design(name):
    key = name.strip().upper()
    if key not in DESIGN_NAMES:
        raise ValueError(
            f"unknown design {name!r}; valid names: {', '.join(DESIGN_NAMES)}"
        )
    return Design(key)


def mvn_sample(mean, cov, n, stream):
    """``n`` draws from N_p(mean, cov) via the symmetric square root of ``cov``."""
    mean = np.asarray(mean, dtype=float)
    root = sqrt_spd(cov)
    z = stream.standard_normal((n, mean.size))
    return z @ root + mean


@lru_cache(maxsize=64)
def _cached_root(cov):
    return sqrt_spd(np.array(cov))


def _correlated_pair(e1, e2, rho):
    return np.column_stack([e1, rho * e1 + math.sqrt(1.0 - rho * rho) * e2])


def _sample_a1(n, stream):
    # X2 = |xi2| carrying the sign of X1; with a plain +-xi2 the pair would be N2(0, I)
    xi = stream.standard_normal((n, 2))
    x2 = np.where(xi[:, 0] >= 0.0, np.abs(xi[:, 1]), -np.abs(xi[:, 1]))
    return np.column_stack([xi[:, 0], x2])


def fgm_conditional_inverse(u1, v, eps=FGM_EPSILON):
    """Invert the FGM conditional CDF ``u2 (1 + eps (1 - u2)(1 - 2 u1))`` at ``v``."""
    a = eps * (1.0 - 2.0 * u1)
    flat = np.abs(a) < 1e-12
    safe = np.where(flat, 1.0, a)
    disc = np.maximum((1.0 + safe) ** 2 - 4.0 * safe * v, 0.0)
    root = ((1.0 + safe) - np.sqrt(disc)) / (2.0 * safe)
    return np.where(flat, v, root)


def _sample_a2(n, stream):
    u = stream.uniform((n, 2))
    u2 = fgm_conditional_inverse(u[:, 0], u[:, 1])
    # clip keeps the quantile argument inside (0, 1) after rounding
    u2 = np.clip(u2, 2.0**-54, 1.0 - 2.0**-53)
    return np.column_stack([normal_quantile(u[:, 0]), normal_quantile(u2)])


def _rejection(n, stream, propose, rate_guess):
    """Fill ``n`` rows from ``propose(m) -> (rows, accepted_mask)``.

    Returns the first ``n`` accepted rows, the number of proposals drawn
    and the number of them accepted.
    """
    chunks = []
    have = 0
    proposed = 0
    while have < n:
        m = int((n - have) / rate_guess * 1.1) + 16
        rows, keep = propose(m)
        proposed += m
        chunks.append(rows[keep])
        have += int(keep.sum())
    return np.concatenate(chunks)[:n], proposed, have


def _propose_a3(stream):
    def propose(m):
        e = stream.standard_normal((m, 2))
        rows = _correlated_pair(e[:, 0], e[:, 1], A3_RHO)
        return rows, rows[:, 0] * rows[:, 1] >= 0.0

    return propose


def _propose_a6(stream):
    def propose(m):
        rows = stream.standard_normal((m, 2)) * math.sqrt(0.5)
        accept = stream.uniform(m) < np.exp(-(rows[:, 0] * rows[:, 1]) ** 2)
        return rows, accept

    return propose


def _sample_a3(n, stream):
    return _rejection(n, stream, _propose_a3(stream), 0.85)[0]


def _sample_a6(n, stream):
    return _rejection(n, stream, _propose_a6(stream), 0.6)[0]


def _sample_a4(n, stream):
    # component label first, then a Cholesky-style pair
    pick = stream.uniform(n) < 0.5
    rho = np.where(pick, -0.5, 0.5)
    e = stream.standard_normal((n, 2))
    return np.column_stack([e[:, 0], rho * e[:, 0] + np.sqrt(1.0 - rho * rho) * e[:, 1]])


_A5_ROOTS = {
    sign: sqrt_spd([[1.0, sign * 0.5], [sign * 0.5, 1.0]]) for sign in (-1.0, 1.0)
}


def _sample_a5(n, stream):
    # the two exponentials in the density are N2 kernels with correlation -1/2 and +1/2
    e = stream.standard_normal((n, 2))
    pick = stream.uniform(n) < 0.5
    return np.where(pick[:, None], e @ _A5_ROOTS[-1.0], e @ _A5_ROOTS[1.0])


def _sample_a7(n, stream):
    xi = stream.uniform(n)
    eta = stream.standard_normal((n, 3))
    a, b = np.sqrt(xi), np.sqrt(1.0 - xi)
    return np.column_stack([a * eta[:, 0] + b * eta[:, 1], a * eta[:, 2] + b * eta[:, 1]])


def _sample_t1v(n, stream):
    xi = stream.uniform(n)
    eta = stream.standard_normal((n, 5))
    a, b = np.sqrt(xi), np.sqrt(1.0 - xi)
    return np.column_stack([
        a * eta[:, 0] + b * eta[:, 1],
        a * eta[:, 2] + b * eta[:, 1],
        a * eta[:, 3] + b * eta[:, 4],
    ])


_SAMPLERS = {
    "A1": _sample_a1, "A2": _sample_a2, "A3": _sample_a3, "A4": _sample_a4,
    "A5": _sample_a5, "A6": _sample_a6, "A7": _sample_a7, "T1V": _sample_t1v,
}


def sample_design(design, n, stream):
    """Draw an ``(n, p)`` dataset from ``design`` using ``stream``."""
    if int(n) != n or n < 1:
        raise ValueError(f"sample size must be a positive integer, got {n}")
    n = int(n)
    if isinstance(design, str):
        design = parse_design(design)
    if design.tag == "NULL_MVN":
        z = stream.standard_normal((n, design.dim))
        return z @ _cached_root(design.cov) + np.array(design.mean)
    return _SAMPLERS[design.tag](n, stream)
