"""Special functions: chi-square CDF, standard normal helpers, Legendre basis on [0, 1]."""

import math

import numpy as np
from scipy.special import erfc

_SERIES_TOL = 1e-14
_MAX_ITER = 500
_FPMIN = 1e-300

# Acklam's rational approximation to the normal quantile.
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425


def _gamma_series(a, y):
    # P(a, y) by the power series; valid (and fast) for y < a + 1
    term = np.ones_like(y)
    total = np.ones_like(y)
    ap = np.full_like(y, a)
    for _ in range(_MAX_ITER):
        ap += 1.0
        term = term * y / ap
        total += term
        if np.all(np.abs(term) < _SERIES_TOL * np.abs(total)):
            break
    with np.errstate(divide="ignore"):
        log_pref = -y + a * np.log(y) - math.lgamma(a + 1.0)
    return total * np.exp(log_pref)


def _gamma_contfrac(a, y):
    # Q(a, y) by the modified Lentz continued fraction; valid for y >= a + 1
    b = y + 1.0 - a
    c = np.full_like(y, 1.0 / _FPMIN)
    d = 1.0 / b
    h = d.copy()
    for i in range(1, _MAX_ITER + 1):
        an = -i * (i - a)
        b = b + 2.0
        d = an * d + b
        d = np.where(np.abs(d) < _FPMIN, _FPMIN, d)
        c = b + an / c
        c = np.where(np.abs(c) < _FPMIN, _FPMIN, c)
        d = 1.0 / d
        delta = d * c
        h = h * delta
        if np.all(np.abs(delta - 1.0) < _SERIES_TOL):
            break
    return np.exp(-y + a * np.log(y) - math.lgamma(a)) * h


def regularized_gamma_p(a, y):
    """Regularized lower incomplete gamma function P(a, y) for y >= 0."""
    if a <= 0:
        raise ValueError(f"shape parameter must be positive, got {a}")
    y = np.asarray(y, dtype=float)
    out = np.zeros_like(y)
    pos = y > 0
    small = pos & (y < a + 1.0)
    large = pos & ~small
    if small.any():
        out[small] = _gamma_series(a, y[small])
    if large.any():
        out[large] = 1.0 - _gamma_contfrac(a, y[large])
    return np.clip(out, 0.0, 1.0)


def chi2_cdf(x, k):
    """Chi-square distribution function with ``k`` degrees of freedom.

    Negative arguments map to 0. For ``k = 2`` the closed form
    ``1 - exp(-x/2)`` is used; other ``k`` go through ``P(k/2, x/2)``.

    Parameters
    ----------
    x : float or array_like
    k : int
        Degrees of freedom, at least 1.

    Returns
    -------
    float or ndarray
    """
    if int(k) != k or k < 1:
        raise ValueError(f"degrees of freedom must be a positive integer, got {k}")
    scalar = np.ndim(x) == 0
    x = np.maximum(np.asarray(x, dtype=float), 0.0)
    if k == 2:
        out = -np.expm1(-0.5 * x)
    else:
        out = regularized_gamma_p(0.5 * k, 0.5 * x)
    return float(out) if scalar else out


def normal_cdf(x):
    x = np.asarray(x, dtype=float)
    out = 0.5 * erfc(-x / math.sqrt(2.0))
    return float(out) if out.ndim == 0 else out


def normal_pdf(x):
    x = np.asarray(x, dtype=float)
    out = np.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)
    return float(out) if out.ndim == 0 else out


def normal_quantile(u):
    """Inverse of the standard normal CDF on the open interval (0, 1).

    A rational approximation followed by one Newton correction.
    """
    u = np.asarray(u, dtype=float)
    if np.any(~((u > 0.0) & (u < 1.0))):
        raise ValueError("normal_quantile is defined only for 0 < u < 1")
    x = np.empty_like(u)

    lo = u < _P_LOW
    hi = u > 1.0 - _P_LOW
    mid = ~(lo | hi)

    if mid.any():
        q = u[mid] - 0.5
        r = q * q
        num = ((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]
        den = ((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0
        x[mid] = num * q / den
    for mask, sign, tail in ((lo, 1.0, u), (hi, -1.0, 1.0 - u)):
        if mask.any():
            q = np.sqrt(-2.0 * np.log(tail[mask]))
            num = ((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]
            den = (((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0
            x[mask] = sign * num / den

    x = x - (normal_cdf(x) - u) / normal_pdf(x)
    return float(x) if x.ndim == 0 else x


def legendre_basis(x, dmax):
    """Normalized Legendre polynomials b_1..b_dmax evaluated at ``x``.

    ``b_j(x) = sqrt(2j + 1) P_j(2x - 1)`` is orthonormal on [0, 1].

    Returns
    -------
    ndarray
        Shape ``(dmax,) + x.shape``; row ``j - 1`` holds ``b_j(x)``.
    """
    x = np.asarray(x, dtype=float)
    if np.any(~((x >= 0.0) & (x <= 1.0))):
        raise ValueError("Legendre basis is defined on [0, 1] only")
    if dmax < 1:
        raise ValueError(f"dmax must be at least 1, got {dmax}")
    t = 2.0 * x - 1.0
    out = np.empty((dmax,) + x.shape)
    p_prev = np.ones_like(t)
    p_cur = t
    out[0] = math.sqrt(3.0) * t
    for m in range(1, dmax):
        p_prev, p_cur = p_cur, ((2 * m + 1) * t * p_cur - m * p_prev) / (m + 1)
        out[m] = math.sqrt(2.0 * (m + 1) + 1.0) * p_cur
    return out


def legendre_b(j, x):
    """Single normalized Legendre polynomial ``b_j`` on [0, 1]."""
    if int(j) != j or j < 1:
        raise ValueError(f"polynomial order must be a positive integer, got {j}")
    out = legendre_basis(x, int(j))[-1]
    return float(out) if out.ndim == 0 else out
