"""Dense complex linear algebra and the Schatten norms behind the trace metric.

The normalized trace norm of an ``n x n`` matrix is ``tr|a| / n`` and the
normalized trace distance is ``d(u, v) = tr|u - v| / n``.  All tolerances in
this module are relative to the operator-norm scale of the input.

The factorizations are backed by LAPACK through :mod:`numpy.linalg`
(Householder QR, divide-and-conquer Hermitian eigensolver and SVD).
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "LinAlgError",
    "RankDeficiencyError",
    "NotHermitianError",
    "as_square_matrix",
    "qr_unitary",
    "hermitian_eigen",
    "absolute_value",
    "singular_values",
    "trace_norm_normalized",
    "operator_norm",
    "trace_distance",
    "hilbert_schmidt_distance",
    "numerical_rank",
    "unitarity_defect",
]

RANK_TOL = 1e-12
HERMITIAN_TOL = 1e-10
CLAMP_TOL = 1e-12


class LinAlgError(np.linalg.LinAlgError):
    """Base class for the errors raised here."""


class RankDeficiencyError(LinAlgError):
    """A QR pivot fell below the relative rank threshold."""


class NotHermitianError(LinAlgError):
    """Input to a Hermitian routine is not Hermitian within tolerance."""


def as_square_matrix(a, name: str = "a") -> np.ndarray:
    """Return `a` as a finite, square, 2-d float or complex array.

    Real input stays real; everything else is promoted to ``complex128``.
    """
    arr = np.asarray(a)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise ValueError(f"{name} must be a non-empty square matrix, got shape {arr.shape}")
    if np.iscomplexobj(arr):
        arr = arr.astype(np.complex128, copy=False)
    else:
        arr = arr.astype(np.float64, copy=False)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def _adjoint(a: np.ndarray) -> np.ndarray:
    return a.conj().T


def qr_unitary(a) -> tuple[np.ndarray, np.ndarray]:
    """Householder QR factorization ``a = q @ r`` of a square matrix.

    No sign or phase normalization is applied to the diagonal of `r`.

    Raises
    ------
    RankDeficiencyError
        If some ``|r_jj|`` is below ``1e-12`` times the largest column norm
        of `a`.
    """
    a = as_square_matrix(a)
    q, r = np.linalg.qr(a, mode="complete")
    scale = float(np.max(np.linalg.norm(a, axis=0)))
    pivots = np.abs(np.diag(r))
    if scale == 0.0 or np.any(pivots < RANK_TOL * scale):
        j = int(np.argmin(pivots))
        raise RankDeficiencyError(
            f"rank deficient: |r[{j},{j}]| = {pivots[j]:.3e} against scale {scale:.3e}"
        )
    return q, r


def hermitian_eigen(h) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    The input is symmetrized as ``(h + h*) / 2`` before factorization.

    Returns
    -------
    eigenvalues : ndarray
        Real eigenvalues in ascending order.
    eigenvectors : ndarray
        Unitary matrix whose columns are the matching eigenvectors.

    Raises
    ------
    NotHermitianError
        If the anti-Hermitian part exceeds ``1e-10 * ||h||``.
    """
    h = as_square_matrix(h, "h")
    sym = 0.5 * (h + _adjoint(h))
    w, v = np.linalg.eigh(sym)
    scale = float(np.max(np.abs(w)))
    # Frobenius norm bounds the operator norm of the skew part from above.
    skew = float(np.linalg.norm(h - _adjoint(h))) * 0.5
    if skew > HERMITIAN_TOL * max(scale, np.finfo(float).tiny):
        raise NotHermitianError(f"skew part {skew:.3e} exceeds tolerance at scale {scale:.3e}")
    return w, v


def absolute_value(a) -> np.ndarray:
    """Matrix absolute value ``|a| = (a* a)^(1/2)``.

    Computed from the eigendecomposition of ``a* a``.  Eigenvalues in
    ``[-1e-12 ||a||^2, 0)`` are rounding noise and are clamped to zero.
    """
    a = as_square_matrix(a)
    gram = _adjoint(a) @ a
    w, v = np.linalg.eigh(0.5 * (gram + _adjoint(gram)))
    scale = float(np.max(np.abs(w)))
    if w[0] < -CLAMP_TOL * scale:
        raise ArithmeticError(f"a*a has eigenvalue {w[0]:.3e} below clamping threshold")
    root = np.sqrt(np.clip(w, 0.0, None))
    return (v * root) @ _adjoint(v)


def singular_values(a) -> np.ndarray:
    """Singular values of `a` in descending order."""
    return np.linalg.svd(as_square_matrix(a), compute_uv=False)


def trace_norm_normalized(a) -> float:
    """Normalized trace norm ``tr|a| / n``, the mean singular value of `a`."""
    a = as_square_matrix(a)
    return float(np.sum(singular_values(a))) / a.shape[0]


def operator_norm(a) -> float:
    """Largest singular value of `a`."""
    return float(singular_values(a)[0])


def _difference(u, v) -> np.ndarray:
    u = as_square_matrix(u, "u")
    v = as_square_matrix(v, "v")
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    return u - v


def trace_distance(u, v) -> float:
    """Normalized trace distance ``tr|u - v| / n``."""
    return trace_norm_normalized(_difference(u, v))


def hilbert_schmidt_distance(u, v) -> float:
    """Hilbert-Schmidt distance divided by the dimension, ``||u - v||_2 / n``.

    Never exceeds :func:`trace_distance` since ``||x||_2 <= ||x||_1``.
    """
    x = _difference(u, v)
    return float(np.linalg.norm(x)) / x.shape[0]


def numerical_rank(a, tol: float = 1e-10) -> int:
    """Number of singular values above ``tol`` times the largest one."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    s = singular_values(a)
    if s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > tol * s[0]))


def unitarity_defect(m) -> float:
    """Frobenius norm of ``m* m - I``, an upper bound on its operator norm."""
    m = as_square_matrix(m, "m")
    return float(np.linalg.norm(_adjoint(m) @ m - np.eye(m.shape[0])))
