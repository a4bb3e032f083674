"""Small dense symmetric linear algebra.

Every function accepts a single matrix/dataset or a stack of them along
leading axes, so Monte Carlo code can process many replications at once.
"""

import numpy as np

_JACOBI_SWEEPS = 60


class InsufficientDataError(ValueError):
    """Raised when a sample is too small for the requested computation."""


class SingularMatrixError(np.linalg.LinAlgError):
    """Raised when a covariance matrix is numerically singular."""


def symmetrize(m):
    m = np.asarray(m, dtype=float)
    return 0.5 * (m + np.swapaxes(m, -1, -2))


def sample_mean_cov(data):
    """Row mean and divisor-``n`` covariance of an ``(..., n, p)`` array."""
    data = np.asarray(data, dtype=float)
    if data.ndim < 2:
        raise ValueError("data must be at least two-dimensional (n, p)")
    n = data.shape[-2]
    if n < 2:
        raise InsufficientDataError(f"need at least 2 observations, got {n}")
    mean = data.mean(axis=-2)
    dev = data - mean[..., None, :]
    cov = np.einsum("...ip,...iq->...pq", dev, dev) / n
    return mean, symmetrize(cov)


def _rotate(a, v, i, j):
    # one Jacobi rotation annihilating a[..., i, j] across the whole stack
    aii = a[..., i, i]
    ajj = a[..., j, j]
    aij = a[..., i, j]
    active = aij != 0.0
    safe = np.where(active, aij, 1.0)
    # a subnormal off-diagonal entry overflows theta to inf, giving t = 0 (no rotation)
    with np.errstate(over="ignore"):
        theta = (ajj - aii) / (2.0 * safe)
        t = np.sign(theta) / (np.abs(theta) + np.hypot(theta, 1.0))
    t = np.where(theta == 0.0, 1.0, t)
    c = 1.0 / np.sqrt(t * t + 1.0)
    s = t * c
    c = np.where(active, c, 1.0)[..., None]
    s = np.where(active, s, 0.0)[..., None]

    ci, cj = a[..., :, i].copy(), a[..., :, j].copy()
    a[..., :, i] = c * ci - s * cj
    a[..., :, j] = s * ci + c * cj
    ri, rj = a[..., i, :].copy(), a[..., j, :].copy()
    a[..., i, :] = c * ri - s * rj
    a[..., j, :] = s * ri + c * rj
    a[..., i, j] = 0.0
    a[..., j, i] = 0.0

    vi, vj = v[..., :, i].copy(), v[..., :, j].copy()
    v[..., :, i] = c * vi - s * vj
    v[..., :, j] = s * vi + c * vj


def sym_eig(m):
    """Eigendecomposition of a real symmetric matrix by cyclic Jacobi sweeps.

    Eigenvalues are returned in ascending order. Each eigenvector is signed
    so that its first nonzero component is positive.

    Parameters
    ----------
    m : array_like, shape (..., p, p)

    Returns
    -------
    eigvals : ndarray, shape (..., p)
    eigvecs : ndarray, shape (..., p, p)
        Columns are eigenvectors.
    """
    a = symmetrize(m).copy()
    if a.shape[-1] != a.shape[-2]:
        raise ValueError(f"matrix must be square, got shape {a.shape[-2:]}")
    p = a.shape[-1]
    v = np.broadcast_to(np.eye(p), a.shape).copy()
    scale = np.sqrt(np.sum(a * a, axis=(-2, -1)))
    off_idx = np.triu_indices(p, 1)

    for _ in range(_JACOBI_SWEEPS):
        off = np.sqrt(np.sum(a[..., off_idx[0], off_idx[1]] ** 2, axis=-1))
        if np.all(off <= 1e-15 * scale):
            break
        for i in range(p - 1):
            for j in range(i + 1, p):
                _rotate(a, v, i, j)

    w = np.diagonal(a, axis1=-2, axis2=-1).copy()
    order = np.argsort(w, axis=-1, kind="stable")
    w = np.take_along_axis(w, order, axis=-1)
    v = np.take_along_axis(v, order[..., None, :], axis=-1)

    # first component with |v| above noise decides the sign
    significant = np.abs(v) > 1e-12
    lead = np.argmax(significant, axis=-2)
    lead_val = np.take_along_axis(v, lead[..., None, :], axis=-2)[..., 0, :]
    v = v * np.where(lead_val < 0.0, -1.0, 1.0)[..., None, :]
    return w, v


def _spectral_power(m, power, tol):
    w, v = sym_eig(m)
    top = w[..., -1]
    limit = 1e-12 * np.abs(top) if tol is None else np.broadcast_to(tol, top.shape)
    if np.any(w[..., 0] <= limit) or np.any(top <= 0.0):
        raise SingularMatrixError(
            "matrix is not positive definite beyond tolerance "
            f"(smallest eigenvalue {np.min(w[..., 0]):.3e})"
        )
    out = np.einsum("...ik,...k,...jk->...ij", v, w**power, v)
    return symmetrize(out)


def inv_sqrt_spd(m, tol=None):
    """Symmetric positive-definite inverse square root ``m^(-1/2)``.

    Parameters
    ----------
    m : array_like, shape (..., p, p)
    tol : float, optional
        Smallest admissible eigenvalue. Defaults to ``1e-12`` times the
        largest eigenvalue.

    Raises
    ------
    SingularMatrixError
        If some eigenvalue does not exceed ``tol``.
    """
    return _spectral_power(m, -0.5, tol)


def sqrt_spd(m, tol=None):
    """Symmetric positive-definite square root ``m^(1/2)``."""
    return _spectral_power(m, 0.5, tol)


def residualize(data, tol=None):
    """Standardize rows by the sample mean and inverse root of the sample covariance.

    Row ``i`` of the result is ``S^(-1/2) (x_i - xbar)`` where ``S`` uses the
    divisor ``n``.
    """
    data = np.asarray(data, dtype=float)
    n, p = data.shape[-2:]
    if n < p + 1:
        raise InsufficientDataError(
            f"residuals need n >= p + 1 observations (n={n}, p={p})"
        )
    mean, cov = sample_mean_cov(data)
    h = inv_sqrt_spd(cov, tol)
    return (data - mean[..., None, :]) @ h
