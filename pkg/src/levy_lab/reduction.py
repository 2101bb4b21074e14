"""Corner reductions U(k) -> U(k-1) and the quotient diameters they bound.

Given ``u`` in U(k) embedded in U(n), :func:`corner_reduce` builds an element
``V`` of the subgroup U(k-1) (the unitaries fixing ``e_k``) with

    d(V (+) 1, u (+) 1) = tr|u - V| / n <= 4 / n.

Construction: let ``xi = u* e_k`` and let ``w`` be a unitary on
``X = span{e_k, xi}`` with ``w xi = e_k``.  Then ``v = (1 (+) w) u*`` fixes
``e_k`` and ``1 - v u = 0 (+) (1 - w)`` has rank at most 2 and norm at most
2.  The stored approximant is ``V = v*``, so that ``d(V, u) = d(1, u v)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from ._parallel import index_map
from .haar import GroupSpec, UnitaryElement, sample_haar
from .linalg import hermitian_eigen, operator_norm
from .rng import SeededRng

__all__ = [
    "Branch",
    "CornerReduction",
    "ReductionChain",
    "DiameterEstimate",
    "corner_reduce",
    "corner_lower_bound",
    "reduction_chain",
    "refine_infimum",
    "estimate_quotient_diameter",
    "tensor_embed",
    "tower_embed",
]

Branch = Literal["trivial-k<=2", "fixed-vector", "collinear-phase", "generic-rotation"]
BASIS_TOL = 1e-10
MAX_TOWER_DIMENSION = 8192


def _embed(m: np.ndarray, size: int) -> np.ndarray:
    out = np.eye(size, dtype=m.dtype)
    out[: m.shape[0], : m.shape[0]] = m
    return out


def _block_distance(a: np.ndarray, b: np.ndarray, n: int) -> float:
    """Normalized trace distance in U(n) between two embedded top-left blocks."""
    size = max(a.shape[0], b.shape[0])
    x = _embed(a, size) - _embed(b, size)
    return float(np.sum(np.linalg.svd(x, compute_uv=False))) / n


@dataclass(frozen=True, eq=False)
class CornerReduction:
    input: UnitaryElement
    output: UnitaryElement
    distance: float
    branch: Branch
    fixed_vector_residual: float

    @property
    def k(self) -> int:
        return self.input.dimension

    @property
    def ambient(self) -> int:
        return self.input.ambient

    def inverse_witness(self) -> np.ndarray:
        """The k x k matrix ``v = V*`` (embedded in U(k)) with ``d(1, u v) = distance``."""
        k = self.k
        if k == 1:
            return np.eye(1)
        return _embed(self.output.matrix, k).conj().T

    def difference(self) -> np.ndarray:
        """``1 - v u`` as a k x k matrix; it vanishes off ``span{e_k, xi}``."""
        return np.eye(self.k) - self.inverse_witness() @ self.input.matrix


def _gram_schmidt_pair(xi: np.ndarray, k: int):
    """Orthonormal ``f2`` with ``xi = alpha e_k + beta f2``, beta > 0."""
    alpha = xi[k - 1]
    f2 = xi.copy()
    f2[k - 1] = 0.0
    # The e_k component is removed exactly, so a second pass is not needed.
    beta = float(np.linalg.norm(f2))
    return alpha, beta, f2 / beta


def _reflection_reduce(u: np.ndarray, xi: np.ndarray, k: int) -> np.ndarray:
    """``V = u (1 - (1 - lam) eta eta*)`` with ``eta`` along ``e_k - xi``.

    ``u - V`` has rank one and its singular value ``|1 - lam|`` is at most 2.
    """
    e = np.zeros_like(xi)
    e[k - 1] = 1.0
    diff = e - xi
    norm = np.linalg.norm(diff)
    if norm <= BASIS_TOL:
        return u.copy()
    eta = diff / norm
    alpha = xi[k - 1]
    lam = -(1.0 - alpha) / (1.0 - np.conj(alpha))
    lam = lam / abs(lam)
    if np.isrealobj(u):
        lam = lam.real
    reflector = np.eye(k, dtype=u.dtype) - (1.0 - lam) * np.outer(eta, eta.conj())
    return u @ reflector


def corner_reduce(u: UnitaryElement, n: int | None = None) -> CornerReduction:
    """Reduce ``u`` in U(k) to an element of U(k-1) within trace distance 4/n.

    Parameters
    ----------
    u : UnitaryElement
        Element of U(k) or O(k).
    n : int, optional
        Ambient dimension used to normalize the distance (default ``u.ambient``).

    Notes
    -----
    Branches are tried in order:

    ``trivial-k<=2``
        k = 1 maps to the identity; k = 2 uses the rank-one reflection
        ``V = u (1 - (1 - lam) eta eta*)``.  Distance at most 2/n.
    ``fixed-vector``
        ``u* e_k = e_k``: ``u`` already lies in U(k-1).  Distance 0.
    ``collinear-phase``
        ``u* e_k = c e_k`` with ``c != 1``: ``w`` is the phase ``conj(c)``
        on ``span{e_k}``.  Distance ``|1 - c| / n``.
    ``generic-rotation``
        ``w = [[conj(alpha), beta], [-beta, alpha]]`` in the basis
        ``{e_k, f2}`` where ``xi = alpha e_k + beta f2``.  Distance at most 4/n.
    """
    n = u.ambient if n is None else int(n)
    k = u.dimension
    if k > n:
        raise ValueError(f"k = {k} exceeds ambient dimension n = {n}")
    u = u.with_ambient(n)
    m = u.matrix
    sub = u.group.subgroup(max(k - 1, 1))
    xi = m.conj()[k - 1, :].copy()  # u* e_k
    e = np.zeros_like(xi)
    e[k - 1] = 1.0

    if k == 1:
        branch: Branch = "trivial-k<=2"
        big = np.ones((1, 1), dtype=m.dtype)
    elif k == 2:
        branch = "trivial-k<=2"
        big = _reflection_reduce(m, xi, k)
    elif np.linalg.norm(xi - e) <= BASIS_TOL:
        branch = "fixed-vector"
        big = m.copy()
    else:
        off = xi.copy()
        off[k - 1] = 0.0
        if np.linalg.norm(off) <= BASIS_TOL:
            branch = "collinear-phase"
            c = xi[k - 1] / abs(xi[k - 1])
            # V = u (1 (+) w)* with w = conj(c) on span{e_k}.
            big = m.copy()
            big[:, k - 1] *= c
        else:
            branch = "generic-rotation"
            alpha, beta, f2 = _gram_schmidt_pair(xi, k)
            basis = np.zeros((k, 2), dtype=np.result_type(m, f2))
            basis[k - 1, 0] = 1.0
            basis[:, 1] = f2
            w = np.array([[np.conj(alpha), beta], [-beta, alpha]])
            # (1_Xperp (+) w) = I + B (w - I) B*.
            full_w = np.eye(k, dtype=basis.dtype) + basis @ (w - np.eye(2)) @ basis.conj().T
            big = m @ full_w.conj().T

    if k == 1:
        residual = 0.0
        block = big
    else:
        residual = float(np.linalg.norm(big[:, k - 1] - e))
        block = big[: k - 1, : k - 1]
    output = UnitaryElement(sub, block, n)
    distance = _block_distance(output.matrix, m, n)
    return CornerReduction(u, output, float(distance), branch, residual)


def corner_lower_bound(u: UnitaryElement, n: int | None = None) -> float:
    """Lower bound ``||u e_k - e_k|| / n`` on ``inf_V d(u, V)`` over U(k-1).

    Any ``V`` fixing ``e_k`` satisfies ``(u - V) e_k = u e_k - e_k`` and the
    trace norm dominates the operator norm.
    """
    n = u.ambient if n is None else int(n)
    k = u.dimension
    col = u.matrix[:, k - 1].copy()
    col[k - 1] -= 1.0
    return float(np.linalg.norm(col)) / n


@dataclass(frozen=True, eq=False)
class ReductionChain:
    ambient: int
    steps: tuple[CornerReduction, ...]

    @property
    def step_distances(self) -> tuple[float, ...]:
        return tuple(s.distance for s in self.steps)

    @property
    def total_distance_bound(self) -> float:
        return float(sum(self.step_distances))


def reduction_chain(u: UnitaryElement) -> ReductionChain:
    """Corner-reduce ``u`` in U(n) step by step down to the identity of U(1).

    Step ``j`` reduces U(n - j) to U(n - j - 1); the last step sends the
    remaining phase in U(1) to 1.  By the triangle inequality
    ``d(u, 1) <= total_distance_bound``.
    """
    n = u.ambient
    steps = []
    current = u
    for _ in range(u.dimension):
        step = corner_reduce(current, n)
        steps.append(step)
        current = step.output
    return ReductionChain(n, tuple(steps))


def _random_direction(m: int, real: bool, rng: SeededRng) -> np.ndarray:
    """Hermitian H of unit operator norm; purely imaginary when `real`."""
    if real:
        g = rng.normal((m, m))
        h = 1j * (g - g.T)
    else:
        g = rng.complex_normal((m, m))
        h = g + g.conj().T
    scale = operator_norm(h)
    return h / scale if scale > 0 else h


def _exp_i(h: np.ndarray, step: float) -> np.ndarray:
    lam, vec = hermitian_eigen(h)
    return (vec * np.exp(1j * step * lam)) @ vec.conj().T


def refine_infimum(
    u: UnitaryElement,
    v0: UnitaryElement,
    budget: int,
    rng: SeededRng,
    step_range: tuple[float, float] = (0.5, 1e-3),
) -> tuple[UnitaryElement, float]:
    """Stochastic local search for ``inf_{V in U(k-1)} d(u, V)``.

    Proposes ``V' = V exp(i s H)`` with random unit-norm Hermitian ``H`` and
    a step ``s`` decaying geometrically over the budget.  Proposals are kept
    only when they lower the distance, so the result never exceeds the start.
    """
    n = u.ambient
    m = v0.dimension if u.dimension > 1 else 0
    best = v0.matrix
    best_d = _block_distance(best, u.matrix, n)
    if m == 0 or budget <= 0 or best_d == 0.0:
        return v0, best_d
    real = u.group.family == "orthogonal"
    hi, lo = step_range
    steps = hi * (lo / hi) ** (np.arange(budget) / max(budget - 1, 1))
    for s in steps:
        h = _random_direction(m, real, rng)
        cand = best @ _exp_i(h, s)
        if real:
            cand = cand.real
        d = _block_distance(cand, u.matrix, n)
        if d < best_d:
            best, best_d = cand, d
    return UnitaryElement(v0.group, best, n), best_d


@dataclass(frozen=True)
class DiameterEstimate:
    k: int
    n: int
    num_samples: int
    constructive_sup: float
    refined_sup: float
    lower_bound: float
    paper_bound: float
    branches: dict = field(default_factory=dict)

    @property
    def within_bound(self) -> bool:
        return self.refined_sup <= self.constructive_sup <= self.paper_bound + 1e-9


def estimate_quotient_diameter(
    k: int,
    n: int,
    num_samples: int,
    refine_budget: int,
    rng: SeededRng,
    family: str = "unitary",
) -> DiameterEstimate:
    """Monte-Carlo estimate of ``sup_u inf_v d(1, u v)`` over U(k)/U(k-1) in U(n).

    ``constructive_sup`` is the largest corner-reduction distance over Haar
    samples, ``refined_sup`` the largest after local refinement, and
    ``lower_bound`` the largest certified lower bound from
    :func:`corner_lower_bound`, which also bounds the diameter from below.
    """
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    if num_samples < 1:
        raise ValueError("num_samples must be >= 1")
    group = GroupSpec(family, k)

    def trial(i: int):
        sub = rng.substream(i)
        u = sample_haar(group, sub.substream(0)).with_ambient(n)
        red = corner_reduce(u, n)
        _, refined = refine_infimum(u, red.output, refine_budget, sub.substream(1))
        return red.distance, refined, corner_lower_bound(u, n), red.branch

    results = index_map(trial, num_samples)
    branches: dict[str, int] = {}
    for *_, b in results:
        branches[b] = branches.get(b, 0) + 1
    return DiameterEstimate(
        k=k,
        n=n,
        num_samples=num_samples,
        constructive_sup=max(r[0] for r in results),
        refined_sup=max(r[1] for r in results),
        lower_bound=max(r[2] for r in results),
        paper_bound=4.0 / n,
        branches=dict(sorted(branches.items())),
    )


def tensor_embed(u: UnitaryElement, m: int) -> UnitaryElement:
    """``u (x) 1_m`` in U(n m); preserves the normalized trace distance."""
    if m < 1:
        raise ValueError("m must be positive")
    size = u.dimension * m
    if size > MAX_TOWER_DIMENSION:
        raise OverflowError(f"embedding dimension {size} exceeds {MAX_TOWER_DIMENSION}")
    out = np.kron(u.matrix, np.eye(m, dtype=u.matrix.dtype))
    return UnitaryElement(u.group.subgroup(size), out, size)


def tower_embed(u: UnitaryElement, levels: int) -> UnitaryElement:
    """Push ``u`` up the tower U(d) -> U(2d) -> ... by ``levels`` factors of ``1_2``."""
    for _ in range(levels):
        u = tensor_embed(u, 2)
    return u
