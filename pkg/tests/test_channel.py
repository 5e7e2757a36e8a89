"""Channel law, variance computation, simulation, and noise distributions."""

import math

import numpy as np
import pytest

from heatchan.channel import (
    ChannelParams,
    NoiseDistribution,
    geometric_fast_variance,
    noise_variance,
    simulate_block,
    simulate_with_feedback,
    variance_profile,
)
from heatchan.coeffs import CoefficientSpec
from heatchan.errors import SpecValidationError

GEOM = CoefficientSpec.geometric(0.5)
ZERO = CoefficientSpec.custom([])
ALL_SPECS = [GEOM, CoefficientSpec.truncated(4, 1.0),
             CoefficientSpec.superexponential(0.5), CoefficientSpec.even_one(),
             CoefficientSpec.odd_one(), CoefficientSpec.custom([0.4, 0.2, 0.7])]


class TestNoiseVariance:
    def test_empty_sum(self):
        for spec in ALL_SPECS:
            assert noise_variance(spec, 1.0, [], 1) == 1.0

    def test_geometric_hand_values(self):
        assert noise_variance(GEOM, 1.0, [2.0], 2) == pytest.approx(3.0, abs=1e-15)
        assert noise_variance(GEOM, 1.0, [1.0, 1.0], 3) == pytest.approx(1.75, abs=1e-15)

    def test_floor_and_monotonicity(self):
        rng = np.random.default_rng(0)
        for spec in ALL_SPECS:
            x = rng.normal(size=12)
            for k in range(1, 14):
                v = noise_variance(spec, 0.7, x, k)
                assert v >= 0.7
            bigger = noise_variance(spec, 0.7, np.abs(x) * 2, 13)
            assert bigger >= noise_variance(spec, 0.7, x, 13)

    def test_causality(self):
        rng = np.random.default_rng(1)
        x = rng.normal(size=10)
        for spec in ALL_SPECS:
            for k in range(1, 8):
                assert noise_variance(spec, 1.0, x[:k - 1], k) == \
                    noise_variance(spec, 1.0, x, k)

    def test_bad_k_rejected(self):
        with pytest.raises(SpecValidationError):
            noise_variance(GEOM, 1.0, [1.0], 3)

    def test_profile_matches_pointwise(self):
        rng = np.random.default_rng(2)
        x = rng.normal(size=20)
        for spec in ALL_SPECS:
            prof = variance_profile(spec, 1.3, x)
            direct = [noise_variance(spec, 1.3, x, k) for k in range(1, 21)]
            np.testing.assert_allclose(prof, direct, rtol=1e-12)

    def test_profile_truncation_window(self):
        rng = np.random.default_rng(3)
        x = rng.normal(size=50)
        spec = CoefficientSpec.superexponential(0.5)
        exact = variance_profile(spec, 1.0, x)
        approx = variance_profile(spec, 1.0, x, truncate_tol=1e-12)
        np.testing.assert_allclose(approx, exact, atol=1e-11)


class TestGeometricFastPath:
    def test_hand_example(self):
        np.testing.assert_allclose(geometric_fast_variance(0.5, 1.0, [2.0]), [1.0, 3.0])

    def test_all_zero_inputs(self):
        out = geometric_fast_variance(0.5, 2.0, np.zeros(16))
        np.testing.assert_allclose(out, 2.0)

    def test_against_direct_summation(self):
        # oracle: explicit O(n^2) evaluation of the channel law
        rng = np.random.default_rng(7)
        x = rng.normal(scale=3.0, size=1000)
        rho, s2 = 0.85, 0.5
        fast = geometric_fast_variance(rho, s2, x)
        xsq = x ** 2
        weights = rho ** np.arange(1, 1002, dtype=float)
        direct = np.empty(1001)
        for k in range(1, 1002):
            direct[k - 1] = s2 + np.dot(weights[:k - 1][::-1], xsq[:k - 1])
        rel = np.abs(fast - direct) / direct
        assert rel.max() < 1e-10

    def test_bad_rho(self):
        with pytest.raises(SpecValidationError):
            geometric_fast_variance(1.0, 1.0, [1.0])


class TestSimulateBlock:
    def test_deterministic_in_seed(self):
        params = ChannelParams(sigma2=1.0)
        x = np.linspace(-1, 1, 32)
        y1 = simulate_block(GEOM, params, x, 123)
        y2 = simulate_block(GEOM, params, x, 123)
        np.testing.assert_array_equal(y1, y2)
        y3 = simulate_block(GEOM, params, x, 124)
        assert not np.array_equal(y1, y3)

    def test_memoryless_residual_variance(self):
        # all-zero coefficients reduce to plain additive unit noise
        params = ChannelParams(sigma2=1.0)
        trials, n = 20_000, 6
        resid = np.empty((trials, n))
        from heatchan.rng import as_seedseq, child
        root = as_seedseq(11)
        x = np.full(n, 1.5)
        for t in range(trials):
            resid[t] = simulate_block(ZERO, params, x, child(root, t)) - x
        var = resid.var(axis=0)
        np.testing.assert_allclose(var, 1.0, rtol=0.03)

    def test_heated_slot_variance(self):
        # x = (2, 0): Var(y_2 - x_2) = 1 + 0.5 * 4 = 3
        params = ChannelParams(sigma2=1.0)
        trials = 30_000
        from heatchan.rng import as_seedseq, child
        root = as_seedseq(5)
        x = np.array([2.0, 0.0])
        r2 = np.empty(trials)
        for t in range(trials):
            r2[t] = simulate_block(GEOM, params, x, child(root, t))[1]
        assert r2.var() == pytest.approx(3.0, rel=0.03)

    def test_residuals_match_law_within_mc_error(self):
        params = ChannelParams(sigma2=1.0)
        trials, n = 20_000, 8
        rng = np.random.default_rng(9)
        x = rng.normal(scale=2.0, size=n)
        from heatchan.rng import as_seedseq, child
        root = as_seedseq(21)
        resid = np.empty((trials, n))
        for t in range(trials):
            resid[t] = simulate_block(GEOM, params, x, child(root, t)) - x
        target = variance_profile(GEOM, 1.0, x)
        se = target * math.sqrt(2.0 / (trials - 1))
        assert np.all(np.abs(resid.var(axis=0) - target) < 3.0 * se)

    def test_non_finite_inputs_rejected(self):
        params = ChannelParams(sigma2=1.0)
        with pytest.raises(SpecValidationError):
            simulate_block(GEOM, params, [1.0, np.inf], 0)


class TestFeedback:
    def test_reduces_to_block_on_same_seed(self):
        params = ChannelParams(sigma2=2.0)
        x = np.linspace(-2, 2, 17)
        for spec in (GEOM, CoefficientSpec.truncated(3, 0.5)):
            y_block = simulate_block(spec, params, x, 77)
            xs, ys = simulate_with_feedback(
                spec, params, lambda m, hist: x[len(hist)], None, len(x), 77)
            np.testing.assert_array_equal(xs, x)
            np.testing.assert_array_equal(ys, y_block)

    def test_sign_encoder_interface(self):
        params = ChannelParams(sigma2=1.0)

        def enc(m, hist):
            if len(hist) == 0:
                return 1.0
            return 1.0 if hist[-1] >= 0 else -1.0

        xs, ys = simulate_with_feedback(ZERO, params, enc, 0, 40, 13)
        assert set(np.unique(xs)) <= {-1.0, 1.0}

    def test_empty_block(self):
        params = ChannelParams(sigma2=1.0)
        xs, ys = simulate_with_feedback(GEOM, params, lambda m, h: 1.0, 0, 0, 1)
        assert xs.size == 0 and ys.size == 0


class TestTruncatedGap:
    def test_memory_cleared_across_active_slots(self):
        # with cutoff 4 and period 4 the noise at the active slots is IID
        # with the ambient variance: residual cross-correlation vanishes
        spec = CoefficientSpec.truncated(4, 1.0)
        params = ChannelParams(sigma2=1.0)
        trials, n, L = 4000, 32, 4
        idx = np.arange(n // L) * L
        from heatchan.rng import as_seedseq, child
        root = as_seedseq(15)
        za = np.empty((trials, idx.size))
        for t in range(trials):
            rng = np.random.default_rng(child(root, 0, t))
            x = np.zeros(n)
            x[idx] = rng.normal(0, 10.0, idx.size)
            y = simulate_block(spec, params, x, child(root, 1, t))
            za[t] = (y - x)[idx]
        var = za.var(axis=0)
        np.testing.assert_allclose(var, 1.0, atol=3 * math.sqrt(2.0 / trials))
        corr = np.corrcoef(za, rowvar=False)
        off_diag = corr[~np.eye(idx.size, dtype=bool)]
        assert np.abs(off_diag).max() < 3.0 / math.sqrt(trials)


class TestNoiseDistributions:
    @pytest.mark.parametrize("noise", [NoiseDistribution.gaussian(),
                                       NoiseDistribution.uniform()])
    def test_moments(self, noise):
        n = 1_000_000
        u = noise.sample(np.random.default_rng(4), n)
        assert abs(u.mean()) < 4.0 / math.sqrt(n)
        assert u.var() == pytest.approx(1.0, rel=0.03)
        assert np.mean(u ** 4) == pytest.approx(noise.fourth_moment(), rel=0.05)

    def test_uniform_support(self):
        u = NoiseDistribution.uniform().sample(np.random.default_rng(6), 100_000)
        assert np.abs(u).max() <= math.sqrt(3.0)

    def test_entropies(self):
        assert NoiseDistribution.gaussian().entropy() == pytest.approx(
            0.5 * math.log(2 * math.pi * math.e), abs=1e-15)
        assert NoiseDistribution.uniform().entropy() == pytest.approx(
            math.log(2 * math.sqrt(3.0)), abs=1e-15)

    def test_pdf_normalization(self):
        from scipy.integrate import quad
        for noise in (NoiseDistribution.gaussian(), NoiseDistribution.uniform()):
            lo, hi = noise.support()
            total, _ = quad(noise.pdf, lo, hi, limit=200)
            assert total == pytest.approx(1.0, abs=1e-6)

    def test_parse(self):
        assert NoiseDistribution.parse("gaussian").kind == "gaussian"
        with pytest.raises(SpecValidationError):
            NoiseDistribution.parse("cauchy")


class TestChannelParams:
    def test_snr(self):
        assert ChannelParams(sigma2=2.0, power=10.0).snr == 5.0

    def test_validation(self):
        with pytest.raises(SpecValidationError):
            ChannelParams(sigma2=0.0)
        with pytest.raises(SpecValidationError):
            ChannelParams(sigma2=1.0, power=-1.0)
