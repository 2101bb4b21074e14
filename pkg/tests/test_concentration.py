import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, optimize

from levy_lab.concentration import (
    LipschitzObservable,
    LipschitzViolation,
    binomial_stderr,
    distance_to_point,
    empirical_median,
    estimate_concentration,
    evaluate_observable,
    levy_bound,
    levy_family_report,
    linear_functional,
    lipschitz_check,
    martingale_bound,
    named_observable,
    tail_allowance,
)
from levy_lab.haar import GroupSpec, sample_cmv_model, sample_haar_unitary
from levy_lab.rng import SeededRng


def haar(n, seed):
    return sample_haar_unitary(n, SeededRng(seed))


def haar_pairs(n, count, seed):
    root = SeededRng(seed)
    return [(sample_haar_unitary(n, root.substream(i, 0)), sample_haar_unitary(n, root.substream(i, 1)))
            for i in range(count)]


def u1_distance_median() -> float:
    """Median of |1 - e^{i t}| for uniform t, by quadrature and root finding."""
    def cdf(x):
        # The indicator jumps where |1 - e^{i t}| = x; give quad those points.
        jump = 2 * np.arcsin(x / 2)
        val, _ = integrate.quad(lambda t: float(abs(1 - np.exp(1j * t)) <= x), -np.pi, np.pi,
                                points=[-jump, jump], limit=200)
        return val / (2 * np.pi)
    return optimize.brentq(lambda x: cdf(x) - 0.5, 1e-6, 2 - 1e-6, xtol=1e-10)


class TestObservables:
    def test_linear_identity(self):
        obs = linear_functional(np.eye(3))
        assert evaluate_observable(obs, np.eye(3)) == pytest.approx(1.0)
        assert evaluate_observable(obs, -np.eye(3)) == pytest.approx(-1.0)

    def test_distance_to_self(self):
        u = haar(4, 1)
        assert evaluate_observable(distance_to_point(u.matrix), u) == 0.0

    def test_scalar_matches_matrix(self):
        u = haar(5, 2)
        assert evaluate_observable(linear_functional(1.0, 5), u) == pytest.approx(
            evaluate_observable(linear_functional(np.eye(5)), u), abs=1e-15)
        assert evaluate_observable(distance_to_point(1.0, 5), u) == pytest.approx(
            evaluate_observable(distance_to_point(np.eye(5)), u), abs=1e-14)

    @pytest.mark.parametrize("family", ["unitary", "orthogonal"])
    @pytest.mark.parametrize("metric", ["trace", "hilbert-schmidt"])
    @pytest.mark.parametrize("point", [1.0, -1.0, 1j])
    def test_spectral_route_matches_dense(self, family, metric, point):
        if family == "orthogonal" and isinstance(point, complex):
            pytest.skip("complex reference point is not on O(n)")
        c = sample_cmv_model(GroupSpec(family, 12), SeededRng(5))
        m = c.matrix()
        obs = distance_to_point(point, 12, metric)
        assert evaluate_observable(obs, c) == pytest.approx(evaluate_observable(obs, m), abs=1e-12)
        lin = linear_functional(point if abs(point) <= 1 else 1.0, 12)
        assert evaluate_observable(lin, c) == pytest.approx(evaluate_observable(lin, m), abs=1e-12)

    def test_spectral_needs_class_function(self):
        c = sample_cmv_model(GroupSpec("unitary", 3), SeededRng(1))
        with pytest.raises(TypeError):
            evaluate_observable(linear_functional(np.eye(3)), c)

    def test_validation(self):
        with pytest.raises(ValueError):
            linear_functional(2 * np.eye(2))
        with pytest.raises(ValueError):
            distance_to_point(2 * np.eye(2))
        with pytest.raises(ValueError):
            evaluate_observable(linear_functional(np.eye(2)), np.eye(3))
        with pytest.raises(ValueError):
            named_observable("entropy", 3)
        with pytest.raises(ValueError):
            LipschitzObservable("polynomial", 2, 1.0)

    def test_named(self):
        assert named_observable("distance-to-identity", 4).descriptor() == {
            "kind": "distance-to-point", "parameter": "identity", "metric": "trace"}
        assert named_observable("trace", 4).kind == "linear-functional"


class TestLipschitz:
    def test_distance_to_point(self):
        obs = distance_to_point(haar(6, 3).matrix)
        assert lipschitz_check(obs, haar_pairs(6, 200, 4)) <= 1 + 1e-9

    def test_extremal_linear(self):
        obs = linear_functional(np.eye(4))
        assert lipschitz_check(obs, [(np.eye(4), -np.eye(4))] * 100) == pytest.approx(1.0)

    def test_random_coefficient_u8(self):
        g = SeededRng(7).complex_normal((8, 8))
        a = g / np.linalg.norm(g, 2)
        assert lipschitz_check(linear_functional(a), haar_pairs(8, 1000, 8)) <= 1 + 1e-9

    @pytest.mark.parametrize("name", ["distance-to-identity", "trace"])
    def test_shipped_observables(self, name):
        assert lipschitz_check(named_observable(name, 8), haar_pairs(8, 1000, 9)) <= 1 + 1e-9

    def test_violation_reports_pair(self):
        obs = LipschitzObservable("linear-functional", 2, np.eye(2), lipschitz_constant=0.5)
        with pytest.raises(LipschitzViolation) as info:
            lipschitz_check(obs, [(np.eye(2), np.eye(2)), (np.eye(2), -np.eye(2))])
        assert info.value.index == 1


class TestBounds:
    def test_constant_diameters(self):
        for n in (8, 128, 2048):
            for eps in (0.1, 0.5, 1.0):
                closed = min(0.5, 2 * math.exp(-n * eps**2 / 128))
                assert martingale_bound([4 / n] * n, eps) == pytest.approx(closed, rel=1e-12)

    def test_zero_epsilon(self):
        assert martingale_bound([0.1, 0.2], 0) == 0.5
        assert levy_bound(10, 0) == 0.5

    def test_clamped(self):
        # Exponent is exactly 1, so 2/e > 1/2 is clamped.
        assert 2 * math.exp(-1) == pytest.approx(0.7358, abs=1e-4)
        assert martingale_bound([4 / 128] * 128, 1.0) == 0.5

    def test_degenerate(self):
        assert martingale_bound([0.0, 0.0], 0.3) == 0.0

    def test_levy_examples(self):
        assert levy_bound(2048, 0.5) == pytest.approx(2 * math.exp(-4), rel=1e-15)
        assert levy_bound(2048, 0.5) == pytest.approx(0.0366, abs=1e-4)
        assert levy_bound(128, 4) == pytest.approx(2 * math.exp(-16), rel=1e-15)
        assert levy_bound(128, 4) == pytest.approx(2.25e-7, rel=0.01)

    def test_errors(self):
        with pytest.raises(ValueError):
            martingale_bound([-1.0], 0.1)
        with pytest.raises(ValueError):
            levy_bound(0, 0.1)

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.floats(0, 1), min_size=1, max_size=20).filter(lambda a: sum(a) > 0),
           st.floats(1e-3, 5), st.floats(1e-3, 5), st.integers(0, 19), st.floats(0, 1))
    def test_monotonicity(self, a, e1, e2, idx, bump):
        lo, hi = sorted((e1, e2))
        b_lo, b_hi = martingale_bound(a, lo), martingale_bound(a, hi)
        assert 0 <= b_hi <= b_lo <= 0.5
        bigger = list(a)
        bigger[idx % len(a)] += bump
        assert martingale_bound(bigger, lo) >= b_lo

    def test_allowance(self):
        assert binomial_stderr(0.5, 100) == pytest.approx(0.05)
        assert tail_allowance(0.0366, 2000) == pytest.approx(
            0.0366 + 3 * math.sqrt(0.0366 * 0.9634 / 2000) + 1 / 2000)


class TestMedian:
    def test_odd(self):
        assert empirical_median([3, 1, 2]) == 2

    def test_even_lower(self):
        assert empirical_median([1, 2, 3, 4]) == 2

    def test_uniform(self):
        assert abs(empirical_median(SeededRng(1).uniform(100_000)) - 0.5) <= 0.01

    def test_empty(self):
        with pytest.raises(ValueError):
            empirical_median([])


class TestEstimate:
    def test_u1_median_oracle(self):
        oracle = u1_distance_median()
        assert oracle == pytest.approx(math.sqrt(2), abs=1e-8)
        est = estimate_concentration(GroupSpec("unitary", 1), distance_to_point(1.0, 1), [0.1, 0.5],
                                     10_000, SeededRng(2), sampler="dense")
        assert 0.9 <= est.empirical_median <= 1.9
        # f has density at least 1/pi on [0, 2], so 3 binomial errors in probability
        # become at most 3 pi / (2 sqrt(N)) in location.
        assert abs(est.empirical_median - oracle) <= 3 * math.pi / (2 * math.sqrt(10_000))

    @pytest.mark.parametrize("sampler", ["dense", "spectral"])
    def test_tail_invariants(self, sampler):
        est = estimate_concentration(GroupSpec("unitary", 6), distance_to_point(1.0, 6),
                                     [0.01, 0.05, 0.1, 0.3, 3.0], 2000, SeededRng(3), sampler)
        for tails in (est.upper_tail, est.two_sided_tail):
            assert all(0 <= t <= 1 for t in tails)
            assert list(tails) == sorted(tails, reverse=True)
        for up, lo, both in zip(est.upper_tail, est.lower_tail, est.two_sided_tail):
            assert both <= 2 * max(up, lo) + 1 / 2000
        assert est.upper_tail[-1] == 0.0 and est.two_sided_tail[-1] == 0.0
        assert est.sampler == sampler

    def test_range_bound_linear(self):
        est = estimate_concentration(GroupSpec("unitary", 3), linear_functional(1.0, 3), [3.0],
                                     1000, SeededRng(4))
        assert est.two_sided_tail == (0.0,)

    def test_std_shrinks(self):
        obs = lambda n: linear_functional(1.0, n)
        std = {n: float(np.std(estimate_concentration(GroupSpec("unitary", n), obs(n), [0.5], 4000,
                                                      SeededRng(5).substream(n)).values))
               for n in (256, 1024)}
        assert std[1024] < std[256]

    def test_sampler_agreement_trace(self):
        # Re tr(u) has the same law on both routes; means are 0 with variance 1/2.
        group = GroupSpec("unitary", 16)
        obs = linear_functional(1.0, 16)
        for sampler in ("dense", "spectral"):
            v = estimate_concentration(group, obs, [0.5], 2000, SeededRng(6), sampler).values * 16
            assert abs(v.mean()) <= 3 * math.sqrt(0.5 / 2000)
            assert abs(v.var() - 0.5) <= 0.1

    def test_validation(self):
        group = GroupSpec("unitary", 3)
        obs = linear_functional(1.0, 3)
        with pytest.raises(ValueError):
            estimate_concentration(group, obs, [0.5], 999, SeededRng(1))
        with pytest.raises(ValueError):
            estimate_concentration(group, obs, [0.5, 0.2], 1000, SeededRng(1))
        with pytest.raises(ValueError):
            estimate_concentration(group, linear_functional(np.eye(3)), [0.5], 1000, SeededRng(1), "spectral")
        with pytest.raises(ValueError):
            estimate_concentration(GroupSpec("unitary", 4), obs, [0.5], 1000, SeededRng(1))


class TestLevyReport:
    def test_small_n_flagged(self):
        rep = levy_family_report([16], "distance-to-identity", [0.3, 0.5, 0.8], 1000, 1)
        assert rep.estimates[0].bound_trivial
        assert rep.verdict == "PASS"
        assert any("bound trivial at this scale" in f for f in rep.flags)

    def test_deterministic(self):
        a = levy_family_report([32, 64], "trace", [0.2], 1000, 9).to_dict()
        b = levy_family_report([32, 64], "trace", [0.2], 1000, 9).to_dict()
        assert a == b

    def test_decay_rows(self):
        rep = levy_family_report([4, 8, 16], "distance-to-identity", [0.05, 0.1], 1000, 2)
        assert len(rep.decay) == 4
        assert {(d["n_from"], d["n_to"]) for d in rep.decay} == {(4, 8), (8, 16)}

    def test_rejects_unsorted(self):
        with pytest.raises(ValueError):
            levy_family_report([64, 32], "trace", [0.2], 1000, 1)
