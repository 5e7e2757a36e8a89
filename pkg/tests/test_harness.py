"""Experiment engines: fidelity, concentration, sweeps, dichotomy demo."""

import math

import numpy as np
import pytest

from heatchan.channel import ChannelParams
from heatchan.coeffs import CoefficientSpec, alpha_L
from heatchan.errors import DivergentSumError, HeatchanError
from heatchan.harness import (
    SweepConfig,
    demo_rate,
    dichotomy_demo,
    error_sweep,
    fidelity_check,
    lemma2_check,
)

GEOM = CoefficientSpec.geometric(0.5)
TRUNC = CoefficientSpec.truncated(4, 1.0)
ZERO = CoefficientSpec.custom([])


class TestFidelity:
    def test_matches_law_and_worker_invariant(self):
        params = ChannelParams(sigma2=1.0)
        x = np.array([2.0, -2.0, 2.0, -2.0, 2.0, -2.0])
        model, emp = fidelity_check(GEOM, params, x, trials=20_000, seed=3)
        np.testing.assert_allclose(emp, model, rtol=0.05)
        model2, emp2 = fidelity_check(GEOM, params, x, trials=20_000, seed=3, workers=2)
        np.testing.assert_array_equal(emp, emp2)

    def test_memoryless_flat_profile(self):
        params = ChannelParams(sigma2=2.0)
        model, emp = fidelity_check(ZERO, params, np.ones(4), trials=10_000, seed=1)
        np.testing.assert_allclose(model, 2.0)
        np.testing.assert_allclose(emp, 2.0, rtol=0.06)


class TestLemma2:
    def test_targets_from_lattice_sum(self):
        rep = lemma2_check(GEOM, 1.0, 10.0, 2, [400], eps=0.5, trials=4, seed=0)
        assert rep.target_y == pytest.approx(1 + 10 + 10 / 3, abs=1e-9)
        assert rep.target_z == pytest.approx(1 + 10 / 3, abs=1e-9)
        assert rep.alphaL == pytest.approx(alpha_L(GEOM, 2), abs=1e-12)

    def test_memoryless_targets_exact(self):
        rep = lemma2_check(ZERO, 1.0, 10.0, 2, [200], eps=0.5, trials=4, seed=0)
        assert rep.target_y == 11.0
        assert rep.target_z == 1.0

    def test_means_concentrate(self):
        rep = lemma2_check(GEOM, 1.0, 10.0, 2, [10_000], eps=0.5, trials=100, seed=4)
        assert rep.mean_y[0] == pytest.approx(rep.target_y, rel=0.05)
        assert rep.mean_z[0] == pytest.approx(rep.target_z, rel=0.05)

    def test_variance_shrinks_as_n_grows(self):
        rep = lemma2_check(GEOM, 1.0, 10.0, 2, [1000, 4000], eps=0.5,
                           trials=300, seed=6)
        assert rep.var_y[0] / rep.var_y[1] >= 2.0
        assert rep.var_z[0] / rep.var_z[1] >= 2.0
        assert rep.hit_frac[1] >= rep.hit_frac[0]

    def test_worker_invariance(self):
        a = lemma2_check(GEOM, 1.0, 10.0, 2, [500], eps=0.5, trials=60, seed=9)
        b = lemma2_check(GEOM, 1.0, 10.0, 2, [500], eps=0.5, trials=60, seed=9,
                         workers=3)
        assert a == b

    def test_divergent_lattice_rejected(self):
        with pytest.raises(DivergentSumError):
            lemma2_check(CoefficientSpec.even_one(), 1.0, 1.0, 2, [100], 0.5, 4, 0)

    def test_rows_schema(self):
        rep = lemma2_check(GEOM, 1.0, 10.0, 2, [200, 400], eps=0.5, trials=4, seed=0)
        rows = rep.rows()
        assert [r["n"] for r in rows] == [200, 400]
        assert set(rows[0]) == {"n", "m", "mean_y", "mean_z", "target_y",
                                "target_z", "var_y", "var_z", "hit_frac", "eps"}


class TestErrorSweep:
    def _cfg(self, **kw):
        base = dict(spec=TRUNC, sigma2=1.0, snr_grid=(100.0,), L_grid=(4,),
                    n_grid=(24,), rate_grid=(0.25,), trials=20, seed=5)
        base.update(kw)
        return SweepConfig(**base)

    def test_rows_and_context_rate(self):
        rows = error_sweep(self._cfg())
        assert len(rows) == 1
        row = rows[0]
        assert row["messages"] == round(math.exp(0.25 * 24))
        assert row["errors"] is not None
        assert row["ach_rate_pre_limit"] is not None
        assert row["rate_nats"] == pytest.approx(math.log(row["messages"]) / 24)

    def test_cap_skips_point_but_keeps_row(self, capsys):
        rows = error_sweep(self._cfg(message_cap=10))
        assert len(rows) == 1
        assert rows[0]["errors"] is None and rows[0]["err_prob"] is None
        assert "cap" in capsys.readouterr().err

    def test_invalid_point_recorded_and_sweep_continues(self, capsys):
        rows = error_sweep(self._cfg(n_grid=(2, 24)))  # n=2 < L=4 invalid
        assert rows[0]["errors"] is None
        assert rows[1]["errors"] is not None

    def test_worker_invariance(self):
        r1 = error_sweep(self._cfg(workers=1))
        r2 = error_sweep(self._cfg(workers=2))
        assert r1 == r2

    def test_incremental_emission(self):
        seen = []
        error_sweep(self._cfg(n_grid=(24, 28)), on_row=seen.append)
        assert [r["n"] for r in seen] == [24, 28]

    def test_empty_grid_rejected(self):
        with pytest.raises(HeatchanError):
            self._cfg(snr_grid=())


class TestDichotomy:
    def test_flags_and_ratios(self):
        rows, flags = dichotomy_demo([GEOM, TRUNC], [1e2, 1e6], range(1, 9))
        assert flags["geometric:0.5"] == "plateau"
        assert flags["truncated:4:1"] == "growth"
        by = {(r["spec"], r["snr"]): r["rate_nats"] for r in rows}
        assert by[("geometric:0.5", 1e6)] / by[("geometric:0.5", 1e2)] < 2
        assert by[("truncated:4:1", 1e6)] / by[("truncated:4:1", 1e2)] > 2

    def test_odd_one_even_slot_formula(self):
        # period 2 sees no memory: rate is exactly (1/4) log(1 + 2 snr)
        for snr in (1e2, 1e4, 1e6):
            got = demo_rate(CoefficientSpec.odd_one(), 2, snr)
            assert abs(got - 0.25 * math.log(1 + 2 * snr)) < 1e-12
        rows, _ = dichotomy_demo([CoefficientSpec.odd_one()], [1e2, 1e6], range(1, 9))
        assert all(r["best_L"] == 2 for r in rows)

    def test_divergent_lattice_rates_zero(self):
        assert demo_rate(CoefficientSpec.even_one(), 3, 100.0) == 0.0

    def test_truncated_uses_full_budget_formula(self):
        got = demo_rate(TRUNC, 4, 100.0)
        assert abs(got - math.log(401.0) / 8) < 1e-12
