"""Haar-distributed elements of U(n) and O(n).

Two samplers are provided.

* :func:`sample_haar_unitary` / :func:`sample_haar_orthogonal` return dense
  Haar matrices from the Ginibre ensemble: QR factorization followed by the
  phase correction that makes the diagonal of R positive.
* :func:`sample_cmv_model` returns a five-diagonal CMV matrix whose
  eigenvalues have exactly the law of a Haar element's eigenvalues.  It costs
  O(n) random numbers and O(n^2) work for a spectrum, against O(n^3) for the
  dense route, but it is only valid for conjugation-invariant statistics.

The CMV law: conjugating a Haar matrix into Hessenberg form by Householder
reflections fixing ``e_1`` peels off independent coefficients, where
coefficient ``j`` is the first coordinate of a uniform unit vector of
``F^(n-j)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
import scipy.linalg
import scipy.special

from .linalg import RankDeficiencyError, as_square_matrix, qr_unitary, unitarity_defect
from .rng import SeededRng

__all__ = [
    "Family",
    "GroupSpec",
    "UnitaryElement",
    "CMVSample",
    "sample_ginibre",
    "sample_ginibre_real",
    "sample_haar_unitary",
    "sample_haar_orthogonal",
    "sample_haar",
    "sample_cmv_model",
]

Family = Literal["unitary", "orthogonal"]
FAMILIES = ("unitary", "orthogonal")
UNITARITY_TOL = 1e-10
REALITY_TOL = 1e-12


@dataclass(frozen=True)
class GroupSpec:
    family: Family
    dimension: int

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"family must be one of {FAMILIES}, got {self.family!r}")
        if int(self.dimension) < 1:
            raise ValueError(f"dimension must be >= 1, got {self.dimension}")

    @property
    def symbol(self) -> str:
        return f"{'U' if self.family == 'unitary' else 'O'}({self.dimension})"

    def subgroup(self, dimension: int) -> GroupSpec:
        return GroupSpec(self.family, dimension)


@dataclass(frozen=True, eq=False)
class UnitaryElement:
    """A unitary (or real orthogonal) k x k matrix viewed inside U(ambient).

    The embedding into the ambient group is ``u -> u (+) 1_(ambient - k)``
    with `u` in the top-left block.
    """

    group: GroupSpec
    matrix: np.ndarray
    ambient: int | None = None

    def __post_init__(self):
        m = as_square_matrix(self.matrix, "matrix")
        k = self.group.dimension
        if m.shape[0] != k:
            raise ValueError(f"matrix is {m.shape[0]}x{m.shape[0]} but group is {self.group.symbol}")
        if self.group.family == "orthogonal" and np.iscomplexobj(m):
            if np.max(np.abs(m.imag)) > REALITY_TOL:
                raise ValueError("orthogonal element has non-real entries")
            m = np.ascontiguousarray(m.real)
        defect = unitarity_defect(m)
        if defect > UNITARITY_TOL * k:
            raise ValueError(f"matrix is not unitary: ||m*m - I|| = {defect:.3e}")
        ambient = k if self.ambient is None else int(self.ambient)
        if ambient < k:
            raise ValueError(f"ambient dimension {ambient} is smaller than {k}")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "ambient", ambient)

    @property
    def dimension(self) -> int:
        return self.group.dimension

    def embedded(self, size: int | None = None) -> np.ndarray:
        """The block matrix ``u (+) 1`` of the given size (default: ambient)."""
        size = self.ambient if size is None else size
        k = self.dimension
        if size < k:
            raise ValueError(f"cannot embed a {k}x{k} block into size {size}")
        out = np.eye(size, dtype=self.matrix.dtype)
        out[:k, :k] = self.matrix
        return out

    def with_ambient(self, ambient: int) -> UnitaryElement:
        return UnitaryElement(self.group, self.matrix, ambient)

    @classmethod
    def identity(cls, group: GroupSpec, ambient: int | None = None) -> UnitaryElement:
        dtype = np.float64 if group.family == "orthogonal" else np.complex128
        return cls(group, np.eye(group.dimension, dtype=dtype), ambient)


def sample_ginibre(n: int, rng: SeededRng) -> np.ndarray:
    """n x n matrix of independent standard complex Gaussians (E|z|^2 = 1)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return rng.complex_normal((n, n))


def sample_ginibre_real(n: int, rng: SeededRng) -> np.ndarray:
    """n x n matrix of independent standard real Gaussians."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return rng.normal((n, n))


def _phase_corrected_qr(a: np.ndarray) -> np.ndarray:
    q, r = qr_unitary(a)
    d = np.diag(r)
    # q @ diag(ph) @ (diag(ph)^-1 r) = a with a positive diagonal on the right.
    return q * (d / np.abs(d))


def _sample_dense(group: GroupSpec, rng: SeededRng) -> UnitaryElement:
    n = group.dimension
    draw = sample_ginibre if group.family == "unitary" else sample_ginibre_real
    try:
        q = _phase_corrected_qr(draw(n, rng))
    except RankDeficiencyError:
        q = _phase_corrected_qr(draw(n, rng))
    return UnitaryElement(group, q)


def sample_haar_unitary(n: int, rng: SeededRng) -> UnitaryElement:
    """Haar-random element of U(n)."""
    return _sample_dense(GroupSpec("unitary", n), rng)


def sample_haar_orthogonal(n: int, rng: SeededRng) -> UnitaryElement:
    """Haar-random element of O(n), both connected components."""
    return _sample_dense(GroupSpec("orthogonal", n), rng)


def sample_haar(group: GroupSpec, rng: SeededRng) -> UnitaryElement:
    return _sample_dense(group, rng)


@dataclass(frozen=True, eq=False)
class CMVSample:
    """CMV matrix ``C = L M`` built from Verblunsky coefficients.

    ``L = T_0 (+) T_2 (+) ...`` and ``M = 1 (+) T_1 (+) T_3 (+) ...`` with
    ``T_j = [[conj(a_j), r_j], [r_j, -a_j]]``, ``r_j = sqrt(1 - |a_j|^2)``;
    the last coefficient has modulus one and contributes a 1 x 1 block.
    """

    group: GroupSpec
    coefficients: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.coefficients)
        if a.shape != (self.group.dimension,):
            raise ValueError("need one coefficient per dimension")
        if np.any(np.abs(a[:-1]) >= 1.0) or abs(abs(a[-1]) - 1.0) > 1e-12:
            raise ValueError("coefficients must lie in the open disk, the last on the circle")

    @property
    def dimension(self) -> int:
        return self.group.dimension

    def _factor_diagonals(self, start: int) -> tuple[np.ndarray, np.ndarray]:
        """Main and off diagonals of the block factor whose blocks start at parity `start`."""
        a = self.coefficients
        n = a.shape[0]
        dtype = a.dtype
        main = np.ones(n, dtype=dtype)
        off = np.zeros(max(n - 1, 0), dtype=dtype)
        j = np.arange(start, n, 2)
        main[j] = np.conj(a[j])
        inner = j[j + 1 < n]
        main[inner + 1] = -a[inner]
        off[inner] = np.sqrt(np.clip(1.0 - np.abs(a[inner]) ** 2, 0.0, None))
        return main, off

    def _diagonals(self) -> dict[int, np.ndarray]:
        """Nonzero diagonals of C keyed by offset (column minus row)."""
        ld, lo = self._factor_diagonals(0)
        md, mo = self._factor_diagonals(1)
        n = self.dimension
        # Each factor is symmetric tridiagonal: T = diag(d) + offdiag(o) on both sides.
        diag = {0: ld * md}
        if n > 1:
            diag[1] = ld[:-1] * mo + lo * md[1:]
            diag[-1] = lo * md[:-1] + ld[1:] * mo
        if n > 2:
            diag[2] = lo[:-1] * mo[1:]
            diag[-2] = lo[1:] * mo[:-1]
        return diag

    def matrix(self) -> np.ndarray:
        """Dense form of C."""
        n = self.dimension
        out = np.zeros((n, n), dtype=self.coefficients.dtype)
        for k, d in self._diagonals().items():
            out += np.diag(d, k)
        return out

    def trace(self) -> complex:
        ld, _ = self._factor_diagonals(0)
        md, _ = self._factor_diagonals(1)
        return complex(np.sum(ld * md))

    def hermitian_part_eigenvalues(self, phase: complex = 1.0) -> np.ndarray:
        """Ascending eigenvalues of ``(c C + conj(c) C*) / 2`` for ``c = phase``.

        For ``|phase| = 1`` these are the cosines of the eigenangles of
        ``phase * C``.
        """
        n = self.dimension
        diag = self._diagonals()
        bands = min(2, n - 1)
        ab = np.zeros((bands + 1, n), dtype=np.complex128)
        for k in range(bands + 1):
            upper = phase * diag[k] + np.conj(phase * diag[-k])
            ab[bands - k, k:] = 0.5 * upper
        if self.group.family == "orthogonal" and np.isrealobj(phase):
            ab = ab.real
        if n == 1:
            return np.array([float(np.real(ab[0, 0]))])
        return scipy.linalg.eigvals_banded(ab, lower=False)


def _first_coordinate_moduli(group: GroupSpec, u: np.ndarray) -> np.ndarray:
    """|x_1| for x uniform on the unit sphere of F^m, m = n, n-1, ..., 1."""
    n = group.dimension
    rest = n - 1 - np.arange(n)
    safe = np.maximum(rest, 1)
    if group.family == "unitary":
        # |x_1|^2 ~ Beta(1, m - 1), inverted in closed form.
        sq = 1.0 - np.power(1.0 - u, 1.0 / safe)
    else:
        # x_1^2 ~ Beta(1/2, (m - 1)/2).
        sq = scipy.special.betaincinv(0.5, 0.5 * safe, u)
    sq = np.where(rest > 0, np.minimum(sq, np.nextafter(1.0, 0.0)), 1.0)
    return np.sqrt(sq)


def sample_cmv_model(group: GroupSpec, rng: SeededRng) -> CMVSample:
    """CMV matrix whose spectrum is distributed as that of a Haar element of `group`."""
    n = group.dimension
    u = rng.uniform((2, n))
    modulus = _first_coordinate_moduli(group, u[0])
    if group.family == "unitary":
        coeffs = modulus * np.exp(2j * np.pi * u[1])
    else:
        coeffs = np.where(u[1] < 0.5, -modulus, modulus)
    return CMVSample(group, coeffs)
