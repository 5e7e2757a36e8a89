"""Codebook construction, nearest-neighbor decoding, error estimation."""

import math

import numpy as np
import pytest
from scipy.stats import chi2

from heatchan.channel import ChannelParams, simulate_block
from heatchan.codec import (
    Codebook,
    SchemeParams,
    generate_codebook,
    nn_decode,
    power_violation_fraction,
    scheme_error_probability,
    wilson_interval,
)
from heatchan.coeffs import CoefficientSpec
from heatchan.errors import ResourceLimitError, SpecValidationError
from heatchan.rng import as_seedseq, child

TRUNC = CoefficientSpec.truncated(4, 1.0)
ZERO = CoefficientSpec.custom([])


class TestCodebookStructure:
    def test_single_active_slot_when_L_equals_n(self):
        sp = SchemeParams(L=8, P=1.0, message_count=16, n=8)
        cb = generate_codebook(sp, 1.0, 0)
        full = cb.full()
        assert np.all(full[:, 1:] == 0.0)
        assert np.all(full[:, 0] != 0.0)

    def test_active_indices_pattern(self):
        sp = SchemeParams(L=2, P=1.0, message_count=4, n=6)
        cb = generate_codebook(sp, 1.0, 0)
        np.testing.assert_array_equal(cb.active_indices, [0, 2, 4])  # slots 1,3,5

    def test_empirical_entry_power(self):
        sp = SchemeParams(L=2, P=1.0, message_count=10_000, n=8)
        variance = 2.5
        cb = generate_codebook(sp, variance, 3)
        assert np.mean(cb.active ** 2) == pytest.approx(variance, rel=0.03)
        assert abs(np.mean(cb.active)) < 4 * math.sqrt(variance / cb.active.size)

    def test_deterministic_in_seed(self):
        sp = SchemeParams(L=3, P=1.0, message_count=32, n=12)
        a = generate_codebook(sp, 1.0, 9).active
        b = generate_codebook(sp, 1.0, 9).active
        np.testing.assert_array_equal(a, b)
        c = generate_codebook(sp, 1.0, 10).active
        assert not np.array_equal(a, c)

    def test_memory_budget(self):
        sp = SchemeParams(L=1, P=1.0, message_count=1000, n=100)
        with pytest.raises(ResourceLimitError):
            generate_codebook(sp, 1.0, 0, max_bytes=1000)

    def test_scheme_params_validation(self):
        with pytest.raises(SpecValidationError):
            SchemeParams(L=0, P=1.0, message_count=2, n=4)
        with pytest.raises(SpecValidationError):
            SchemeParams(L=8, P=1.0, message_count=2, n=4)  # n < L
        with pytest.raises(SpecValidationError):
            SchemeParams(L=2, P=1.0, message_count=0, n=4)

    def test_active_variance_modes(self):
        sp = SchemeParams(L=4, P=3.0, message_count=2, n=8)
        assert sp.active_variance("lp") == 12.0
        assert sp.active_variance("p") == 3.0
        with pytest.raises(SpecValidationError):
            sp.active_variance("x")


class TestPowerViolation:
    def test_all_zero_codebook(self):
        cb = Codebook(active=np.zeros((5, 3)), n=9, L=3, variance=0.0)
        assert power_violation_fraction(cb, 1.0) == 0.0

    def test_single_slot_chi_square_oracle(self):
        # (1/n) x^2 > P with x ~ N(0, L*P), n = L: exactly P(chi2_1 > 1)
        sp = SchemeParams(L=4, P=2.0, message_count=400_000, n=4)
        cb = generate_codebook(sp, sp.active_variance("lp"), 1)
        oracle = chi2.sf(1.0, df=1)  # 0.31731...
        frac = power_violation_fraction(cb, sp.P)
        se = math.sqrt(oracle * (1 - oracle) / sp.message_count)
        assert abs(frac - oracle) < 4 * se

    def test_boundary_variance_fraction_near_half(self):
        # variance exactly L*P: violation prob = P(chi2_m > m) -> 1/2
        m = 100
        sp = SchemeParams(L=2, P=1.0, message_count=100_000, n=2 * m)
        cb = generate_codebook(sp, sp.active_variance("lp"), 2)
        oracle = chi2.sf(m, df=m)  # 0.48119...
        frac = power_violation_fraction(cb, sp.P)
        assert abs(frac - oracle) < 4 * math.sqrt(oracle * (1 - oracle) / sp.message_count)
        assert abs(oracle - 0.5) < 0.02

    def test_backed_off_variance_oracle(self):
        # variance 0.9*L*P: violation prob = P(chi2_m > m/0.9); drops below
        # 0.1 once m is a few hundred (0.2115 at m=100, 0.0477 at m=400)
        for m, expect in [(100, chi2.sf(100 / 0.9, df=100)),
                          (400, chi2.sf(400 / 0.9, df=400))]:
            sp = SchemeParams(L=2, P=1.0, message_count=40_000, n=2 * m)
            cb = generate_codebook(sp, 0.9 * sp.active_variance("lp"), 4)
            frac = power_violation_fraction(cb, sp.P)
            assert abs(frac - expect) < 4 * math.sqrt(expect * (1 - expect) / 40_000 + 1e-9)
        assert chi2.sf(400 / 0.9, df=400) < 0.1


class TestNNDecode:
    def _book(self, seed=0, M=16, L=2, n=8):
        sp = SchemeParams(L=L, P=1.0, message_count=M, n=n)
        return generate_codebook(sp, 2.0, seed)

    def test_own_codeword_decodes(self):
        cb = self._book()
        for m in (0, 5, 15):
            y = np.zeros(cb.n)
            y[cb.active_indices] = cb.active[m]
            assert nn_decode(cb, y, 0) == m

    def test_padding_at_inactive_slots_ignored(self):
        cb = self._book()
        rng = np.random.default_rng(8)
        y = rng.normal(size=cb.n)
        base = nn_decode(cb, y, 3)
        y2 = y.copy()
        inactive = np.setdiff1d(np.arange(cb.n), cb.active_indices)
        y2[inactive] = 1e6 * rng.normal(size=inactive.size)
        assert nn_decode(cb, y2, 3) == base

    def test_fair_coin_on_exact_tie(self):
        # two identical codewords, equidistant received vector
        active = np.array([[1.0, 1.0], [1.0, 1.0]])
        cb = Codebook(active=active, n=4, L=2, variance=1.0)
        y = np.zeros(4)
        picks = [nn_decode(cb, y, s) for s in range(10_000)]
        frac = np.mean(np.asarray(picks) == 0)
        assert abs(frac - 0.5) < 0.05

    def test_permutation_equivariance(self):
        cb = self._book(seed=4)
        rng = np.random.default_rng(5)
        y = rng.normal(size=cb.n)
        base = nn_decode(cb, y, 1)
        perm = rng.permutation(cb.message_count)
        cb2 = Codebook(active=cb.active[perm], n=cb.n, L=cb.L, variance=cb.variance)
        assert perm[nn_decode(cb2, y, 1)] == base

    def test_length_mismatch_rejected(self):
        cb = self._book()
        with pytest.raises(SpecValidationError):
            nn_decode(cb, np.zeros(cb.n + 1), 0)


class TestWilson:
    def test_against_known_values(self):
        lo, hi = wilson_interval(0, 100)
        assert lo == 0.0 and 0.0 < hi < 0.05
        lo, hi = wilson_interval(50, 100)
        assert lo == pytest.approx(0.4038, abs=2e-3)
        assert hi == pytest.approx(0.5962, abs=2e-3)
        lo, hi = wilson_interval(100, 100)
        assert hi == 1.0 and lo > 0.95


class TestSchemeError:
    PARAMS = ChannelParams(sigma2=1.0, power=100.0)

    def test_single_message_never_errs(self):
        scheme = SchemeParams(L=4, P=100.0, message_count=1, n=16)
        est = scheme_error_probability(TRUNC, self.PARAMS, scheme, 400.0, 50, 0)
        assert est.errors == 0 and est.err_prob == 0.0

    def test_zero_power_all_ties(self):
        # all-zero codewords tie; fair coin errs with prob 1 - 1/|M|
        params = ChannelParams(sigma2=1.0, power=0.0)
        scheme = SchemeParams(L=2, P=0.0, message_count=4, n=8)
        est = scheme_error_probability(TRUNC, params, scheme, 0.0, 4000, 11)
        expect = 1 - 1 / 4
        assert abs(est.err_prob - expect) < 4 * math.sqrt(expect * (1 - expect) / 4000)

    def test_below_capacity_small_error(self):
        # rate per active slot 1 nat vs capacity ~3 nats
        scheme = SchemeParams(L=4, P=100.0, message_count=round(math.exp(10.0)), n=40)
        est = scheme_error_probability(TRUNC, self.PARAMS, scheme, 400.0, 100, 21)
        assert est.err_prob < 0.1

    def test_reproducible_across_runs_and_workers(self):
        scheme = SchemeParams(L=4, P=100.0, message_count=512, n=24)
        runs = [scheme_error_probability(TRUNC, self.PARAMS, scheme, 400.0, 30, 5,
                                         workers=w) for w in (1, 2, 3)]
        assert runs[0] == runs[1] == runs[2]

    def test_streaming_matches_materialized_path(self):
        # white box: per-trial streamed decisions equal the composition of
        # generate_codebook + simulate_block + nn_decode on the same streams
        spec = CoefficientSpec.geometric(0.5)
        params = ChannelParams(sigma2=1.0, power=2.0)
        scheme = SchemeParams(L=2, P=2.0, message_count=64, n=12)
        variance = scheme.active_variance("lp")
        trials, seed = 40, 31
        est = scheme_error_probability(spec, params, scheme, variance, trials, seed)
        root = as_seedseq(seed)
        errors = 0
        for t in range(trials):
            cb = generate_codebook(scheme, variance, child(root, 0, t))
            msg = int(np.random.default_rng(child(root, 1, t)).integers(64))
            x = np.zeros(scheme.n)
            x[scheme.active_indices] = cb.active[msg]
            y = simulate_block(spec, params, x, child(root, 2, t))
            errors += int(nn_decode(cb, y, child(root, 3, t)) != msg)
        assert est.errors == errors

    def test_float32_mode_runs(self):
        scheme = SchemeParams(L=4, P=100.0, message_count=403, n=24)
        est32 = scheme_error_probability(TRUNC, self.PARAMS, scheme, 400.0, 40, 17,
                                         dtype=np.float32)
        est64 = scheme_error_probability(TRUNC, self.PARAMS, scheme, 400.0, 40, 17)
        # deep below capacity both dtypes see (almost surely) zero errors
        assert est32.errors == est64.errors == 0

    def test_fixed_codebook_mode(self):
        scheme = SchemeParams(L=2, P=1.0, message_count=8, n=8)
        params = ChannelParams(sigma2=1.0, power=1.0)
        est = scheme_error_probability(ZERO, params, scheme, 2.0, 25, 3,
                                       redraw_codebook=False)
        est2 = scheme_error_probability(ZERO, params, scheme, 2.0, 25, 3,
                                        redraw_codebook=False)
        assert est == est2

    def test_memory_budget_propagates(self):
        scheme = SchemeParams(L=1, P=1.0, message_count=10_000, n=64)
        with pytest.raises(ResourceLimitError):
            scheme_error_probability(TRUNC, self.PARAMS, scheme, 1.0, 2, 0,
                                     max_bytes=10_000)

    def test_error_non_increasing_in_snr(self):
        # fixed rate and block: higher SNR cannot hurt (within CI overlap)
        scheme = SchemeParams(L=4, P=1.0, message_count=16, n=8)
        ests = []
        for snr in (2.0, 8.0, 32.0):
            params = ChannelParams(sigma2=1.0, power=snr)
            sch = SchemeParams(L=4, P=snr, message_count=16, n=8)
            ests.append(scheme_error_probability(TRUNC, params, sch,
                                                 sch.active_variance("lp"),
                                                 300, 23))
        for a, b in zip(ests, ests[1:]):
            overlap = not (b.ci_lo > a.ci_hi or a.ci_lo > b.ci_hi)
            assert b.err_prob <= a.err_prob or overlap

    def test_awgn_oracle_agreement(self):
        # For truncated coefficients with L >= cutoff the subsampled channel
        # is exactly memoryless AWGN; compare against an independent
        # from-scratch AWGN nearest-neighbor simulation at a rate where
        # errors are plentiful.
        m, M, A, s2 = 6, 256, 2.0, 1.0
        scheme = SchemeParams(L=4, P=A / 4, message_count=M, n=4 * m)
        params = ChannelParams(sigma2=s2, power=A / 4)
        est = scheme_error_probability(TRUNC, params, scheme, A, 400, 13)

        rng = np.random.default_rng(99)
        errs = 0
        oracle_trials = 4000
        for _ in range(oracle_trials):
            book = rng.normal(0.0, math.sqrt(A), size=(M, m))
            ya = book[0] + rng.normal(0.0, math.sqrt(s2), size=m)
            d = ((book - ya) ** 2).sum(axis=1)
            errs += int(d.argmin() != 0)
        oracle = errs / oracle_trials
        se = math.sqrt(oracle * (1 - oracle) / oracle_trials
                       + est.err_prob * (1 - est.err_prob) / est.trials)
        assert oracle > 0.05  # the comparison point is informative
        assert abs(est.err_prob - oracle) < 4 * se
