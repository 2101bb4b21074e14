"""Statistical self-tests of the Haar samplers.

Every check returns a plain dict with a ``pass`` entry so that results can be
serialized directly into an experiment report.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import stats

from .haar import GroupSpec, sample_cmv_model, sample_haar, sample_haar_unitary
from .rng import SeededRng

__all__ = [
    "trace_moment_check",
    "u1_uniformity_check",
    "left_invariance_check",
    "column_phase_check",
    "cmv_agreement_check",
    "run_selftest",
]

SIGNIFICANCE = 0.01


def _samples(group: GroupSpec, count: int, rng: SeededRng):
    return [sample_haar(group, rng.substream(i)) for i in range(count)]


def trace_moment_check(n: int, num_samples: int, seed: int) -> dict:
    """Mean of ``|tr u|^2`` against its exact value 1 (3 standard errors)."""
    rng = SeededRng(seed)
    x = np.array([abs(np.trace(u.matrix)) ** 2 for u in _samples(GroupSpec("unitary", n), num_samples, rng)])
    mean = float(np.mean(x))
    stderr = float(np.std(x, ddof=1)) / math.sqrt(num_samples)
    # At n = 1 the statistic is identically 1 and only rounding remains.
    allowed = max(3.0 * stderr, 1e-12)
    return {
        "check": "trace-moment",
        "n": n,
        "num_samples": num_samples,
        "seed": seed,
        "mean": mean,
        "stderr": stderr,
        "pass": abs(mean - 1.0) <= allowed,
    }


def u1_uniformity_check(num_samples: int, seed: int) -> dict:
    """KS test of the U(1) eigenangle against the uniform law on [-pi, pi)."""
    rng = SeededRng(seed)
    theta = np.array([np.angle(sample_haar_unitary(1, rng.substream(i)).matrix[0, 0]) for i in range(num_samples)])
    res = stats.kstest(theta, stats.uniform(loc=-np.pi, scale=2 * np.pi).cdf)
    return {
        "check": "u1-uniformity",
        "num_samples": num_samples,
        "seed": seed,
        "statistic": float(res.statistic),
        "pvalue": float(res.pvalue),
        "pass": res.pvalue >= SIGNIFICANCE,
    }


def _fixed_unitary(n: int) -> np.ndarray:
    """Deterministic non-trivial unitary used as a left translate."""
    return sample_haar_unitary(n, SeededRng(0x5EED, (n,))).matrix


def left_invariance_check(n: int, num_samples: int, seed: int) -> dict:
    """Two-sample KS of ``Re tr(u)/n`` against ``Re tr(w u')/n`` for independent runs."""
    rng = SeededRng(seed)
    w = _fixed_unitary(n)
    group = GroupSpec("unitary", n)
    a = np.array([np.trace(u.matrix).real / n for u in _samples(group, num_samples, rng.substream(0))])
    b = np.array([np.trace(w @ u.matrix).real / n for u in _samples(group, num_samples, rng.substream(1))])
    res = stats.ks_2samp(a, b)
    return {
        "check": "left-invariance",
        "n": n,
        "num_samples": num_samples,
        "seed": seed,
        "statistic": float(res.statistic),
        "pvalue": float(res.pvalue),
        "pass": res.pvalue >= SIGNIFICANCE,
    }


def column_phase_check(n: int, num_samples: int, seed: int) -> dict:
    """Two-sample KS of ``arg u_11`` between two independently seeded Haar runs."""
    rng = SeededRng(seed)
    group = GroupSpec("unitary", n)
    a = np.array([np.angle(u.matrix[0, 0]) for u in _samples(group, num_samples, rng.substream(0))])
    b = np.array([np.angle(u.matrix[0, 0]) for u in _samples(group, num_samples, rng.substream(1))])
    res = stats.ks_2samp(a, b)
    uni = stats.kstest(a, stats.uniform(loc=-np.pi, scale=2 * np.pi).cdf)
    return {
        "check": "column-phase",
        "n": n,
        "num_samples": num_samples,
        "seed": seed,
        "pvalue": float(res.pvalue),
        "uniform_pvalue": float(uni.pvalue),
        "pass": res.pvalue >= SIGNIFICANCE,
    }


def _dense_distance_to_identity(m: np.ndarray) -> float:
    return float(np.sum(np.abs(1.0 - np.linalg.eigvals(m)))) / m.shape[0]


def cmv_agreement_check(family: str, n: int, num_samples: int, seed: int) -> dict:
    """Two-sample KS of class statistics between the CMV model and dense Haar samples."""
    rng = SeededRng(seed)
    group = GroupSpec(family, n)
    dense = [sample_haar(group, rng.substream(0, i)).matrix for i in range(num_samples)]
    cmv = [sample_cmv_model(group, rng.substream(1, i)).matrix() for i in range(num_samples)]
    out = {"check": "cmv-agreement", "family": family, "n": n, "num_samples": num_samples, "seed": seed}
    ok = True
    for name, stat in (
        ("re-trace", lambda m: np.trace(m).real / n),
        ("distance-to-identity", _dense_distance_to_identity),
    ):
        res = stats.ks_2samp([stat(m) for m in dense], [stat(m) for m in cmv])
        out[f"{name}_pvalue"] = float(res.pvalue)
        ok = ok and res.pvalue >= SIGNIFICANCE
    out["pass"] = ok
    return out


def run_selftest(num_samples: int = 10_000, seeds=(1, 2, 3, 4, 5)) -> list[dict]:
    """The full battery; repeated KS checks pass when at most one seed rejects."""
    records = [trace_moment_check(n, num_samples, seeds[0]) for n in (1, 2, 8, 32)]
    for name, fn in (
        ("u1-uniformity", lambda s: u1_uniformity_check(num_samples, s)),
        ("left-invariance", lambda s: left_invariance_check(4, num_samples, s)),
        ("column-phase", lambda s: column_phase_check(2, num_samples, s)),
    ):
        runs = [fn(s) for s in seeds]
        passes = sum(r["pass"] for r in runs)
        records.append(
            {
                "check": name,
                "seeds": list(seeds),
                "passes": passes,
                "pvalues": [r["pvalue"] for r in runs],
                "pass": passes >= len(seeds) - 1,
            }
        )
    return records
