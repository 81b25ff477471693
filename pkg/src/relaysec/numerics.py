"""Dense complex linear algebra kernel.

All routines take numpy arrays. ``det``, ``inverse`` and ``log_det_herm``
also accept stacks of matrices with shape ``(..., n, n)`` so that the
selection code can score many candidate subsets in one call.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError, ShapeError, SingularityError

COND_LIMIT = 1e12
HERMITIAN_TOL = 1e-10
EIG_TOL = 1e-10


def as_matrix(a) -> np.ndarray:
    """Return ``a`` as a complex 2-D (or stacked) array."""
    arr = np.asarray(a, dtype=complex)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr.reshape(1, -1)
    return arr


def _check_square(a: np.ndarray, name: str) -> None:
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise ShapeError(f"{name} requires a square matrix, got shape {a.shape}")


def conj_transpose(a) -> np.ndarray:
    """Hermitian transpose, swapping the last two axes."""
    a = as_matrix(a)
    return np.conj(np.swapaxes(a, -1, -2))


def matmul(a, b) -> np.ndarray:
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape[-1] != b.shape[-2]:
        raise ShapeError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def det(a):
    """Determinant via pivoted LU factorization (LAPACK getrf)."""
    a = as_matrix(a)
    _check_square(a, "det")
    return np.linalg.det(a)


def condition_number(a) -> np.ndarray | float:
    """2-norm condition estimate from singular values."""
    a = as_matrix(a)
    sv = np.linalg.svd(a, compute_uv=False)
    smin = sv[..., -1]
    smax = sv[..., 0]
    with np.errstate(divide="ignore", invalid="ignore"):
        cond = np.where(smin > 0, smax / np.where(smin > 0, smin, 1.0), np.inf)
    if cond.ndim == 0:
        return float(cond)
    return cond


def inverse(a) -> np.ndarray:
    """Matrix inverse guarded by a condition-number cutoff.

    Raises SingularityError (with the offending condition estimate) when
    any matrix in the stack has condition number at or above 1e12.
    """
    a = as_matrix(a)
    _check_square(a, "inverse")
    cond = np.max(condition_number(a))
    if not np.isfinite(cond) or cond >= COND_LIMIT:
        raise SingularityError(f"matrix is ill-conditioned (cond={cond:.3e})", float(cond))
    return np.linalg.inv(a)


def frobenius_norm(a) -> float:
    a = as_matrix(a)
    return float(np.sqrt(np.sum(np.abs(a) ** 2)))


def psd_sqrt(r) -> np.ndarray:
    """Hermitian square root of a positive semi-definite matrix.

    Uses an eigendecomposition and clamps small negative eigenvalues to 0.

    Raises:
        DomainError: if ``r`` is not Hermitian within 1e-10 (Frobenius) or
            has an eigenvalue below -1e-10.
    """
    r = as_matrix(r)
    _check_square(r, "psd_sqrt")
    asym = np.linalg.norm(r - conj_transpose(r))
    if asym >= HERMITIAN_TOL:
        raise DomainError(f"matrix is not Hermitian (asymmetry {asym:.3e})")
    herm = 0.5 * (r + conj_transpose(r))
    w, v = np.linalg.eigh(herm)
    if w.min() < -EIG_TOL:
        raise DomainError(f"matrix is indefinite (min eigenvalue {w.min():.3e})")
    root = np.sqrt(np.clip(w, 0.0, None))
    s = (v * root) @ conj_transpose(v)
    return 0.5 * (s + conj_transpose(s))


def log_det_herm(a):
    """Base-2 log-determinant of a Hermitian positive definite matrix.

    Computed from the Cholesky factor: log2 det A = 2 * sum(log2 diag(L)).
    Works on stacks and returns an array of shape ``a.shape[:-2]`` then.
    """
    a = as_matrix(a)
    _check_square(a, "log_det_herm")
    herm = 0.5 * (a + conj_transpose(a))
    try:
        chol = np.linalg.cholesky(herm)
    except np.linalg.LinAlgError as exc:
        raise DomainError("matrix is not positive definite") from exc
    diag = np.real(np.diagonal(chol, axis1=-2, axis2=-1))
    out = 2.0 * np.sum(np.log2(diag), axis=-1)
    if out.ndim == 0:
        return float(out)
    return out
