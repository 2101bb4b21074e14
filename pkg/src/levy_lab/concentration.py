"""Concentration of 1-Lipschitz observables on U(n) and O(n).

For a 1-Lipschitz ``f`` with median ``m``, the set ``A = {f <= m}`` has
measure at least 1/2 and its closed eps-neighbourhood lies in
``{f <= m + eps}``, so ``P(f > m + eps) <= alpha(eps)``.  The concentration
function of U(n) with the normalized trace metric obeys the martingale bound

    alpha(eps) <= 2 exp(-eps^2 / (8 sum_k a_k^2)),   a_k <= 4/n,

which collapses to ``2 exp(-n eps^2 / 128)``.  This module measures the
empirical tails and compares them with that bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Literal, Sequence

import numpy as np

from ._parallel import index_map
from .haar import CMVSample, GroupSpec, UnitaryElement, sample_cmv_model, sample_haar
from .linalg import hilbert_schmidt_distance, operator_norm, trace_distance
from .rng import SeededRng

__all__ = [
    "LipschitzObservable",
    "LipschitzViolation",
    "ConcentrationEstimate",
    "LevyReport",
    "linear_functional",
    "distance_to_point",
    "named_observable",
    "evaluate_observable",
    "lipschitz_check",
    "martingale_bound",
    "levy_bound",
    "empirical_median",
    "binomial_stderr",
    "tail_allowance",
    "estimate_concentration",
    "levy_family_report",
]

Kind = Literal["linear-functional", "distance-to-point"]
Metric = Literal["trace", "hilbert-schmidt"]
Sampler = Literal["auto", "dense", "spectral"]
INFORMATIVE_BOUND = 0.45
LIPSCHITZ_SLACK = 1e-9


@dataclass(frozen=True, eq=False)
class LipschitzObservable:
    """A 1-Lipschitz function on U(n) for the normalized trace metric.

    ``parameter`` is either an n x n matrix or a Python scalar ``c`` standing
    for ``c * I``.  Scalar parameters give conjugation-invariant observables
    that can be evaluated from a spectrum alone.

    * ``linear-functional``: ``f(u) = Re tr(a u) / n`` with ``||a|| <= 1``.
    * ``distance-to-point``: ``f(u) = d(u, p)`` for a unitary ``p``.
    """

    kind: Kind
    dimension: int
    parameter: np.ndarray | complex
    metric: Metric = "trace"
    lipschitz_constant: float = 1.0

    def __post_init__(self):
        if self.kind not in ("linear-functional", "distance-to-point"):
            raise ValueError(f"unknown observable kind {self.kind!r}")
        if self.metric not in ("trace", "hilbert-schmidt"):
            raise ValueError(f"unknown metric {self.metric!r}")
        p = self.parameter
        if np.isscalar(p):
            size = abs(complex(p))
            if self.kind == "linear-functional" and size > 1 + 1e-12:
                raise ValueError(f"coefficient |{p}| exceeds 1")
            if self.kind == "distance-to-point" and abs(size - 1) > 1e-12:
                raise ValueError("reference point c * I needs |c| = 1")
            return
        p = np.asarray(p)
        if p.shape != (self.dimension, self.dimension):
            raise ValueError(f"parameter shape {p.shape} does not match dimension {self.dimension}")
        if self.kind == "linear-functional" and operator_norm(p) > 1 + 1e-12:
            raise ValueError("coefficient matrix has operator norm above 1")
        if self.kind == "distance-to-point":
            UnitaryElement(GroupSpec("unitary", self.dimension), p)

    @property
    def is_class_function(self) -> bool:
        return np.isscalar(self.parameter)

    def descriptor(self) -> dict:
        p = self.parameter
        if np.isscalar(p):
            c = complex(p)
            if c == 1:
                param = "identity"
            elif c.imag == 0:
                param = f"{c.real!r}*identity"
            else:
                param = f"({c.real!r}{c.imag:+}j)*identity"
        else:
            param = "matrix"
        out = {"kind": self.kind, "parameter": param}
        if self.kind == "distance-to-point":
            out["metric"] = self.metric
        return out


def linear_functional(a, dimension: int | None = None) -> LipschitzObservable:
    """``u -> Re tr(a u) / n``; pass a scalar `a` with `dimension` for ``a * I``."""
    if np.isscalar(a):
        if dimension is None:
            raise ValueError("scalar coefficient needs an explicit dimension")
        return LipschitzObservable("linear-functional", dimension, complex(a) if np.iscomplexobj(a) else float(a))
    a = np.asarray(a)
    return LipschitzObservable("linear-functional", a.shape[0], a)


def distance_to_point(p, dimension: int | None = None, metric: Metric = "trace") -> LipschitzObservable:
    """``u -> d(u, p)``; pass a scalar `p` with `dimension` for ``p * I``."""
    if np.isscalar(p):
        if dimension is None:
            raise ValueError("scalar reference point needs an explicit dimension")
        return LipschitzObservable("distance-to-point", dimension, complex(p) if np.iscomplexobj(p) else float(p), metric)
    p = np.asarray(p)
    return LipschitzObservable("distance-to-point", p.shape[0], p, metric)


def named_observable(name: str, n: int, metric: Metric = "trace") -> LipschitzObservable:
    """The two observables exposed on the command line."""
    if name == "distance-to-identity":
        return distance_to_point(1.0, n, metric)
    if name in ("trace", "linear-functional"):
        return linear_functional(1.0, n)
    raise ValueError(f"unknown observable {name!r}; use 'distance-to-identity' or 'trace'")


def _evaluate_dense(obs: LipschitzObservable, m: np.ndarray) -> float:
    n = m.shape[0]
    p = obs.parameter
    if obs.kind == "linear-functional":
        if np.isscalar(p):
            return float(np.real(p * np.trace(m))) / n
        return float(np.real(np.einsum("ij,ji->", p, m))) / n
    point = p * np.eye(n) if np.isscalar(p) else p
    if obs.metric == "hilbert-schmidt":
        return hilbert_schmidt_distance(m, point)
    return trace_distance(m, point)


def _evaluate_spectral(obs: LipschitzObservable, c: CMVSample) -> float:
    if not obs.is_class_function:
        raise TypeError("a CMV sample only determines conjugation-invariant observables")
    n = c.dimension
    p = complex(obs.parameter)
    if obs.kind == "linear-functional":
        return float(np.real(p * c.trace())) / n
    if obs.metric == "hilbert-schmidt":
        # ||u - p||_2^2 = 2n - 2 Re tr(conj(p) u) for unitary u and |p| = 1.
        sq = 2.0 * n - 2.0 * float(np.real(np.conj(p) * c.trace()))
        return math.sqrt(max(sq, 0.0)) / n
    phase = np.conj(p) if p.imag else p.real
    cosines = c.hermitian_part_eigenvalues(phase)
    # |1 - e^{i t}| = sqrt(2 - 2 cos t).
    return float(np.sum(np.sqrt(np.clip(2.0 - 2.0 * cosines, 0.0, None)))) / n


def evaluate_observable(obs: LipschitzObservable, u: UnitaryElement | CMVSample | np.ndarray) -> float:
    """Value of the observable at a group element (dense or CMV)."""
    if isinstance(u, CMVSample):
        if u.dimension != obs.dimension:
            raise ValueError(f"dimension mismatch: {u.dimension} vs {obs.dimension}")
        return _evaluate_spectral(obs, u)
    m = u.matrix if isinstance(u, UnitaryElement) else np.asarray(u)
    if m.shape != (obs.dimension, obs.dimension):
        raise ValueError(f"dimension mismatch: {m.shape} vs {obs.dimension}")
    return _evaluate_dense(obs, m)


class LipschitzViolation(AssertionError):
    def __init__(self, index: int, delta: float, distance: float):
        self.index, self.delta, self.distance = index, delta, distance
        super().__init__(f"pair {index}: |f(u) - f(v)| = {delta:.6g} > d(u, v) = {distance:.6g}")


def lipschitz_check(obs: LipschitzObservable, pairs) -> float:
    """Check ``|f(u) - f(v)| <= d(u, v) + 1e-9`` on every pair.

    Returns the largest ratio ``|f(u) - f(v)| / d(u, v)`` seen (pairs at
    distance zero are skipped in the ratio).  Raises
    :class:`LipschitzViolation` naming the first offending pair.
    """
    worst = 0.0
    for i, (u, v) in enumerate(pairs):
        mu = u.matrix if isinstance(u, UnitaryElement) else np.asarray(u)
        mv = v.matrix if isinstance(v, UnitaryElement) else np.asarray(v)
        delta = abs(evaluate_observable(obs, mu) - evaluate_observable(obs, mv))
        d = trace_distance(mu, mv)
        if delta > obs.lipschitz_constant * d + LIPSCHITZ_SLACK:
            raise LipschitzViolation(i, delta, d)
        if d > 0:
            worst = max(worst, delta / d)
    return worst


def martingale_bound(diameters: Sequence[float], epsilon: float) -> float:
    """``min(1/2, 2 exp(-eps^2 / (8 sum a_k^2)))`` with ``alpha(0) = 1/2``."""
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    if epsilon == 0:
        return 0.5
    a = np.asarray(diameters, dtype=float)
    if np.any(a < 0):
        raise ValueError("diameters must be nonnegative")
    total = float(np.sum(a * a))
    if total == 0.0:
        return 0.0
    return min(0.5, 2.0 * math.exp(-epsilon * epsilon / (8.0 * total)))


def levy_bound(n: int, epsilon: float) -> float:
    """Closed form ``min(1/2, 2 exp(-n eps^2 / 128))`` of the martingale bound."""
    if n < 1:
        raise ValueError("n must be positive")
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    if epsilon == 0:
        return 0.5
    return min(0.5, 2.0 * math.exp(-n * epsilon * epsilon / 128.0))


def empirical_median(values: Sequence[float]) -> float:
    """Lower median: element ``floor((len - 1) / 2)`` of the sorted values."""
    v = np.sort(np.asarray(values, dtype=float))
    if v.size == 0:
        raise ValueError("median of an empty sequence")
    return float(v[(v.size - 1) // 2])


def binomial_stderr(p: float, num_samples: int) -> float:
    return math.sqrt(max(p * (1.0 - p), 0.0) / num_samples)


def tail_allowance(bound: float, num_samples: int) -> float:
    """Largest empirical tail consistent with `bound`: 3 standard errors plus one quantum."""
    return bound + 3.0 * binomial_stderr(bound, num_samples) + 1.0 / num_samples


@dataclass(frozen=True, eq=False)
class ConcentrationEstimate:
    group: GroupSpec
    observable: dict
    epsilons: tuple[float, ...]
    num_samples: int
    seed: int
    sampler: str
    empirical_median: float
    upper_tail: tuple[float, ...]
    lower_tail: tuple[float, ...]
    two_sided_tail: tuple[float, ...]
    theoretical_bound: tuple[float, ...]
    values: np.ndarray = field(repr=False)

    @property
    def bound_trivial(self) -> bool:
        return all(b >= INFORMATIVE_BOUND for b in self.theoretical_bound)

    def rows(self) -> list[dict]:
        """One record per epsilon, checked against the bound."""
        out = []
        for i, eps in enumerate(self.epsilons):
            bound = self.theoretical_bound[i]
            informative = bound < INFORMATIVE_BOUND
            allowed = tail_allowance(bound, self.num_samples)
            out.append(
                {
                    "n": self.group.dimension,
                    "epsilon": eps,
                    "median": self.empirical_median,
                    "upper_tail": self.upper_tail[i],
                    "lower_tail": self.lower_tail[i],
                    "two_sided_tail": self.two_sided_tail[i],
                    "bound": bound,
                    "informative": informative,
                    "allowed": allowed,
                    "pass": (not informative) or self.upper_tail[i] <= allowed,
                }
            )
        return out

    def to_dict(self) -> dict:
        return {
            "group": {"family": self.group.family, "dimension": self.group.dimension},
            "observable": self.observable,
            "num_samples": self.num_samples,
            "seed": self.seed,
            "sampler": self.sampler,
            "empirical_median": self.empirical_median,
            "sample_std": float(np.std(self.values)),
            "bound_trivial": self.bound_trivial,
            "rows": self.rows(),
        }


def _resolve_sampler(sampler: Sampler, obs: LipschitzObservable) -> str:
    if sampler == "auto":
        return "spectral" if obs.is_class_function else "dense"
    if sampler == "spectral" and not obs.is_class_function:
        raise ValueError("the spectral sampler needs a conjugation-invariant observable")
    if sampler not in ("dense", "spectral"):
        raise ValueError(f"unknown sampler {sampler!r}")
    return sampler


def sample_observable(
    group: GroupSpec,
    obs: LipschitzObservable,
    num_samples: int,
    rng: SeededRng,
    sampler: Sampler = "auto",
) -> tuple[np.ndarray, str]:
    """Observable values at `num_samples` Haar elements; trial i uses ``rng.substream(i)``."""
    if obs.dimension != group.dimension:
        raise ValueError(f"observable is on dimension {obs.dimension}, group is {group.symbol}")
    resolved = _resolve_sampler(sampler, obs)
    draw = sample_cmv_model if resolved == "spectral" else sample_haar

    def trial(i: int) -> float:
        return evaluate_observable(obs, draw(group, rng.substream(i)))

    return np.array(index_map(trial, num_samples)), resolved


def estimate_concentration(
    group: GroupSpec,
    obs: LipschitzObservable,
    epsilons: Sequence[float],
    num_samples: int,
    rng: SeededRng,
    sampler: Sampler = "auto",
) -> ConcentrationEstimate:
    """Empirical median and tails of `obs` under Haar measure on `group`.

    With ``sampler="auto"`` conjugation-invariant observables are evaluated
    on the CMV model (same law, O(n^2) cost) and all others on dense Haar
    matrices.
    """
    eps = tuple(float(e) for e in epsilons)
    if not eps or any(e <= 0 for e in eps) or list(eps) != sorted(eps):
        raise ValueError("epsilons must be a nonempty ascending grid of positive numbers")
    if num_samples < 1000:
        raise ValueError("num_samples must be at least 1000")
    values, resolved = sample_observable(group, obs, num_samples, rng, sampler)
    med = empirical_median(values)
    dev = values - med
    upper = tuple(float(np.mean(dev > e)) for e in eps)
    lower = tuple(float(np.mean(dev < -e)) for e in eps)
    both = tuple(float(np.mean(np.abs(dev) > e)) for e in eps)
    return ConcentrationEstimate(
        group=group,
        observable=obs.descriptor(),
        epsilons=eps,
        num_samples=num_samples,
        seed=rng.seed,
        sampler=resolved,
        empirical_median=med,
        upper_tail=upper,
        lower_tail=lower,
        two_sided_tail=both,
        theoretical_bound=tuple(levy_bound(group.dimension, e) for e in eps),
        values=values,
    )


@dataclass(frozen=True, eq=False)
class LevyReport:
    family: str
    dimensions: tuple[int, ...]
    estimates: tuple[ConcentrationEstimate, ...]
    decay: tuple[dict, ...]
    flags: tuple[str, ...]

    def rows(self) -> list[dict]:
        return [row for est in self.estimates for row in est.rows()]

    @property
    def bound_pass(self) -> bool:
        return all(r["pass"] for r in self.rows())

    @property
    def decay_pass(self) -> bool:
        return all(d["pass"] for d in self.decay)

    @property
    def verdict(self) -> str:
        # Exceedances on O(n) are flagged rather than failed.
        bound_ok = self.bound_pass or self.family == "orthogonal"
        return "PASS" if bound_ok and self.decay_pass else "FAIL"

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "dimensions": list(self.dimensions),
            "estimates": [e.to_dict() for e in self.estimates],
            "decay": list(self.decay),
            "flags": list(self.flags),
            "verdict": self.verdict,
        }


def _decay_checks(estimates: Sequence[ConcentrationEstimate]) -> list[dict]:
    out = []
    for i, eps in enumerate(estimates[0].epsilons if estimates else ()):
        for a, b in zip(estimates, estimates[1:]):
            pa, pb = a.upper_tail[i], b.upper_tail[i]
            pooled = (pa * a.num_samples + pb * b.num_samples) / (a.num_samples + b.num_samples)
            se = math.sqrt(pooled * (1 - pooled) * (1 / a.num_samples + 1 / b.num_samples))
            out.append(
                {
                    "epsilon": eps,
                    "n_from": a.group.dimension,
                    "n_to": b.group.dimension,
                    "tail_from": pa,
                    "tail_to": pb,
                    "slack": 2 * se,
                    "pass": pb <= pa + 2 * se,
                }
            )
    return out


def levy_family_report(
    ns: Sequence[int],
    observable: str | Callable[[int], LipschitzObservable],
    epsilons: Sequence[float],
    num_samples: int,
    seed: int,
    family: str = "unitary",
    sampler: Sampler = "auto",
    metric: Metric = "trace",
) -> LevyReport:
    """Concentration estimates across dimensions, checked against the bound and for decay.

    The estimate at dimension n draws from ``SeededRng(seed).substream(n)``.
    """
    ns = tuple(int(n) for n in ns)
    if list(ns) != sorted(set(ns)):
        raise ValueError("ns must be strictly ascending")
    make = observable if callable(observable) else (lambda n: named_observable(observable, n, metric))
    root = SeededRng(seed)
    estimates = tuple(
        estimate_concentration(GroupSpec(family, n), make(n), epsilons, num_samples, root.substream(n), sampler)
        for n in ns
    )
    flags = []
    for est in estimates:
        if est.bound_trivial:
            flags.append(f"n={est.group.dimension}: bound trivial at this scale")
        if family == "orthogonal" and not all(r["pass"] for r in est.rows()):
            flags.append(f"n={est.group.dimension}: orthogonal tail exceeds the unitary-form bound")
    return LevyReport(family, ns, estimates, tuple(_decay_checks(estimates)), tuple(flags))
