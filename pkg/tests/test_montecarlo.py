import os

import numpy as np
import pytest

from walkerdense.channel import ActivityPolicy, FadingModel
from walkerdense.geometry import UserPosition, WalkerParams, phase_grid_geometry
from walkerdense.montecarlo import (
    CSV_COLUMNS,
    SweepConfig,
    run_point,
    run_sweep,
    read_sweep_csv,
    wilson_interval,
    write_sweep_csv,
)

from conftest import EARTH_KM, INCLINATION, ORBIT_KM


def small_config(**kwargs) -> SweepConfig:
    defaults = dict(
        constellation_list=((6, 7), (10, 10)),
        policies=(ActivityPolicy.full_reuse(), ActivityPolicy.fixed_thinning(0.1)),
        base_drops=300,
        max_drops=300,
        master_seed=42,
    )
    defaults.update(kwargs)
    return SweepConfig(**defaults)


class TestWilson:
    def test_zero_successes_floor(self):
        lo, hi = wilson_interval(0, 50)
        assert lo == 0.0 and hi > 0.0

    def test_all_successes_ceiling(self):
        lo, hi = wilson_interval(50, 50)
        assert hi == 1.0 and lo < 1.0

    def test_half_value(self):
        # closed-form evaluation with z = 1.959964
        lo, hi = wilson_interval(50, 100)
        assert lo == pytest.approx(0.4038, abs=1e-3)
        assert hi == pytest.approx(0.5962, abs=1e-3)
        assert lo == pytest.approx(0.40383152963549296, rel=1e-12)
        assert hi == pytest.approx(0.596168470364507, rel=1e-12)

    def test_zero_trials_rejected(self):
        with pytest.raises(ValueError):
            wilson_interval(0, 0)

    def test_ci_coverage_on_synthetic_bernoulli(self):
        # known p, n = 6000: the 95% interval should cover p in >= 93% of reps
        rng = np.random.default_rng(12)
        p_true = 0.1
        n = 6000
        hits = 0
        reps = 1000
        draws = rng.binomial(n, p_true, size=reps)
        for successes in draws:
            lo, hi = wilson_interval(int(successes), n)
            hits += lo <= p_true <= hi
        assert hits / reps >= 0.93


class TestRunPoint:
    def test_reproducible(self):
        cfg = small_config()
        a = run_point(cfg, 6, 7, ActivityPolicy.full_reuse())
        b = run_point(cfg, 6, 7, ActivityPolicy.full_reuse())
        assert a == b

    def test_q1_equals_full_reuse(self):
        cfg = small_config()
        a = run_point(cfg, 10, 10, ActivityPolicy.full_reuse())
        b = run_point(cfg, 10, 10, ActivityPolicy.fixed_thinning(1.0))
        b = type(b)(**{**b.__dict__, "policy_id": a.policy_id})
        assert a == b

    def test_estimator_sanity(self):
        res = run_point(small_config(), 10, 10, ActivityPolicy.fixed_thinning(0.1))
        assert 0.0 <= res.p_cov <= 1.0
        assert res.p_cov_ci[0] <= res.p_cov <= res.p_cov_ci[1]
        assert res.c_erg_bits >= 0.0
        assert res.mean_interference_over_p >= 0.0
        assert res.drops_used == 300

    def test_refinement_extends_low_coverage_points(self):
        cfg = small_config(
            constellation_list=((10, 10),),
            base_drops=200,
            max_drops=500,
            refine_threshold=0.05,
            tau_db=30.0,  # absurd threshold: coverage ~ 0 forces refinement
        )
        res = run_point(cfg, 10, 10, ActivityPolicy.full_reuse())
        assert res.drops_used == 500

    def test_brute_force_phase_grid_oracle(self):
        # single satellite, deterministic fading: coverage is exactly the
        # phase-cell fraction where the satellite is visible with SNR > tau
        cfg = SweepConfig(
            constellation_list=((1, 1),),
            policies=(ActivityPolicy.full_reuse(),),
            fading=FadingModel.unit(),
            base_drops=6000,
            max_drops=6000,
            master_seed=5,
        )
        res = run_point(cfg, 1, 1, ActivityPolicy.full_reuse())

        params = cfg.walker(1, 1)
        user = cfg.user()
        grid = (np.arange(512) + 0.5) * (2 * np.pi / 512)
        d, vis = phase_grid_geometry(params, user, grid, grid)
        chan = cfg.channel
        g = np.where(d <= chan.gain_cutoff_km, chan.gain_tx_boost * chan.gain_rx, chan.gain_rx)
        snr = chan.tx_power * g * d ** (-chan.pathloss_exp) / chan.noise_power
        oracle = float((vis & (snr > cfg.tau_linear)).mean())

        se = np.sqrt(oracle * (1 - oracle) / 6000)
        assert abs(res.p_cov - oracle) < 4 * se

    def test_policy_ordering(self):
        # lighter activity never hurts coverage (3-sigma one-sided margin)
        cfg = small_config(constellation_list=((20, 20),), base_drops=6000, max_drops=6000)
        light = run_point(cfg, 20, 20, ActivityPolicy.fixed_thinning(0.1))
        heavy = run_point(cfg, 20, 20, ActivityPolicy.fixed_thinning(0.5))
        se = np.sqrt(
            light.p_cov * (1 - light.p_cov) / 6000 + heavy.p_cov * (1 - heavy.p_cov) / 6000
        )
        assert light.p_cov >= heavy.p_cov - 3 * se


class TestRunSweep:
    def test_cardinality(self):
        results = run_sweep(small_config())
        assert len(results) == 4

    def test_guide_inverse_qn(self):
        results = run_sweep(small_config())
        for policy in ("full", "q0.1"):
            rows = [r for r in results if r.policy_id == policy]
            products = [r.guide * r.effective_q * r.n_total for r in rows]
            np.testing.assert_allclose(products, products[0], rtol=1e-12)

    def test_guide_halves_when_qn_doubles(self):
        cfg = small_config(constellation_list=((10, 10), (10, 20)))
        results = [r for r in run_sweep(cfg) if r.policy_id == "full"]
        assert results[1].guide == pytest.approx(results[0].guide / 2.0, rel=1e-12)

    def test_worker_count_does_not_change_results(self, tmp_path):
        cfg1 = small_config(workers=1)
        cfg3 = small_config(workers=3)
        p1 = tmp_path / "sweep1.csv"
        p3 = tmp_path / "sweep3.csv"
        write_sweep_csv(run_sweep(cfg1), str(p1))
        write_sweep_csv(run_sweep(cfg3), str(p3))
        assert p1.read_bytes() == p3.read_bytes()


class TestCsvRoundTrip:
    def test_schema_and_values(self, tmp_path):
        results = run_sweep(small_config())
        path = tmp_path / "sweep.csv"
        write_sweep_csv(results, str(path))
        rows = read_sweep_csv(str(path))
        assert list(rows[0].keys()) == CSV_COLUMNS
        assert len(rows) == len(results)
        assert rows[0]["n_total"] == results[0].n_total
        assert rows[0]["p_cov"] == pytest.approx(results[0].p_cov, rel=1e-8)

    def test_missing_column_rejected(self, tmp_path):
        path = tmp_path / "broken.csv"
        path.write_text("n_o,n_s\n1,2\n")
        with pytest.raises(ValueError, match="missing columns"):
            read_sweep_csv(str(path))
