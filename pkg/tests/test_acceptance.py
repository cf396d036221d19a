"""Acceptance suite: every criterion runs at desk scale with its tolerance
pinned, printing one PASS/FAIL line.

One criterion (interference growth exponent) is expected-infeasible for this
model and fails honestly: the exact phase-averaged exponent of the
serving-excluded interference over this constellation ladder is 1.1514,
just above the required band. The companion mechanism test shows the
underlying growth law is exactly linear once the serving satellite is
included, and at-least-linear as measured.
"""

import json
import math
import os
import time

import numpy as np
import pytest

from walkerdense.bounds import (
    bound_pcov,
    bound_pcov_thinned,
    block_m,
    estimate_block_constants,
    k_sinr,
    k_thin,
    lattice_arc_counts,
    verify_block,
)
from walkerdense.channel import ActivityPolicy, FadingModel
from walkerdense.cli import EXIT_CHECK, main as cli_main
from walkerdense.geometry import (
    UserPosition,
    distance,
    is_visible,
    phase_grid_geometry,
    snapshot_phases,
    walker_position,
)
from walkerdense.montecarlo import (
    SweepConfig,
    run_point,
    run_sweep,
    write_manifest,
    write_sweep_csv,
)

from conftest import EARTH_KM, INCLINATION, ORBIT_KM, baseline_walker, equator_user

MASTER_SEED = 1000
TWO_PI = 2.0 * np.pi


def _report(name: str, ok: bool, detail: str) -> None:
    print(f"\nACCEPTANCE {name}: {'PASS' if ok else 'FAIL'} ({detail})")


def _loglog_slope(n, y):
    n = np.asarray(n, dtype=float)
    y = np.asarray(y, dtype=float)
    keep = y > 0
    if keep.sum() < 2:
        return None
    return float(np.polyfit(np.log(n[keep]), np.log(y[keep]), 1)[0])


@pytest.fixture(scope="module")
def ref_cert_timed():
    t0 = time.perf_counter()
    cert = estimate_block_constants(baseline_walker(), equator_user(), grid_resolution=1024)
    return cert, time.perf_counter() - t0


@pytest.fixture(scope="module")
def ref_cert(ref_cert_timed):
    return ref_cert_timed[0]


@pytest.fixture(scope="module")
def criterion_sweep():
    """The interference-growth criterion's own protocol: full reuse only,
    exactly 6000 drops per ladder point."""
    config = SweepConfig(
        policies=(ActivityPolicy.full_reuse(),),
        base_drops=6000,
        max_drops=6000,
        master_seed=MASTER_SEED,
    )
    t0 = time.perf_counter()
    results = run_sweep(config)
    return results, time.perf_counter() - t0


@pytest.fixture(scope="module")
def ladder_sweep():
    """The baseline densification experiment: 8-point ladder x 4 policies,
    6000 base drops with adaptive refinement in the low-coverage tail."""
    config = SweepConfig(master_seed=MASTER_SEED)
    t0 = time.perf_counter()
    results = run_sweep(config)
    elapsed = time.perf_counter() - t0
    return config, results, elapsed


@pytest.fixture(scope="module")
def sweep_artifacts(ladder_sweep, ref_cert, tmp_path_factory):
    """Sweep CSV + manifest + certificate on disk, as the CLI would emit."""
    config, results, elapsed = ladder_sweep
    out = str(tmp_path_factory.mktemp("artifacts"))
    write_sweep_csv(results, os.path.join(out, "sweep.csv"))
    write_manifest(config, os.path.join(out, "manifest.json"), elapsed)
    ref_cert.save(os.path.join(out, "certificate.json"))
    return out


def _policy_rows(results, policy_id):
    return sorted((r for r in results if r.policy_id == policy_id), key=lambda r: r.n_total)


class TestGeometryEquivalence:
    def test_visibility_distance_equivalence_100k(self):
        params = baseline_walker()
        d_max = 2703.812123650606
        rng = np.random.default_rng(MASTER_SEED)
        n = 100_000
        thetas = rng.uniform(0, TWO_PI, n)
        omegas = rng.uniform(0, TWO_PI, n)
        lats = rng.uniform(-np.pi / 2, np.pi / 2, n)
        t0 = time.perf_counter()
        bad_equiv = 0
        bad_floor = 0
        for k in range(n):
            user = UserPosition(lats[k], EARTH_KM)
            sat = walker_position(params, thetas[k], omegas[k])
            d = distance(sat, user)
            vis = is_visible(sat, user, params)
            if d < 550.0 - 1e-6:
                bad_floor += 1
            if vis != (d <= d_max) and abs(d - d_max) > 1e-6:
                bad_equiv += 1
        elapsed = time.perf_counter() - t0
        ok = bad_equiv == 0 and bad_floor == 0 and elapsed < 5.0
        _report(
            "geometry-equivalence",
            ok,
            f"{n} triples, {bad_equiv} equivalence / {bad_floor} floor violations, {elapsed:.2f}s",
        )
        assert bad_equiv == 0 and bad_floor == 0
        assert elapsed < 5.0


class TestLatticeArcCounting:
    def test_exhaustive_floor_inequality(self):
        rng = np.random.default_rng(MASTER_SEED)
        t0 = time.perf_counter()
        violations = 0
        cases = 0
        for n in range(3, 201):
            shifts = np.repeat(rng.uniform(0, TWO_PI, 200), 20)
            starts = rng.uniform(0, TWO_PI, 4000)
            lengths = np.tile(rng.uniform(0, TWO_PI, 20), 200)
            counts = lattice_arc_counts(n, shifts, starts, lengths)
            floors = np.floor(n * lengths / TWO_PI).astype(int)
            violations += int((counts < floors).sum())
            cases += len(counts)
        elapsed = time.perf_counter() - t0
        ok = violations == 0 and elapsed < 10.0
        _report("lattice-arc-counting", ok, f"{cases} cases, {violations} violations, {elapsed:.2f}s")
        assert violations == 0
        assert elapsed < 10.0


class TestBlockCertificate:
    def test_estimate_and_verify(self, ref_cert_timed):
        ref_cert, estimate_seconds = ref_cert_timed
        t0 = time.perf_counter()
        verifications = {
            (n, n): verify_block(ref_cert, ref_cert.walker(n, n), equator_user(), phase_grid=33)
            for n in (57, 80, 100)
        }
        elapsed = time.perf_counter() - t0 + estimate_seconds
        all_ok = ref_cert.beta > 0 and all(
            v.status == "ok" and v.slack > 0 for v in verifications.values()
        )
        detail = (
            f"beta={ref_cert.beta:.4g}, n0={ref_cert.n0}, slacks="
            + ",".join(str(v.slack) for v in verifications.values())
            + f", {elapsed:.1f}s"
        )
        _report("block-certificate", all_ok and elapsed < 120.0, detail)
        assert ref_cert.beta > 0
        for v in verifications.values():
            assert v.status == "ok"
            assert v.slack > 0  # strictly positive slack in every phase state
        assert elapsed < 120.0


class TestInterferenceGrowth:
    def test_loglog_slope_in_band(self, criterion_sweep):
        results, elapsed = criterion_sweep
        rows = _policy_rows(results, "full")
        slope = _loglog_slope(
            [r.n_total for r in rows], [r.mean_interference_over_p for r in rows]
        )
        ok = 0.85 <= slope <= 1.15 and elapsed < 900.0
        _report("interference-linear-growth", ok, f"slope={slope:.4f}, {elapsed:.0f}s")
        assert elapsed < 900.0
        assert 0.85 <= slope <= 1.15, (
            f"measured exponent {slope:.4f} exceeds the 1.15 band edge. The exact "
            f"phase-averaged exponent of the serving-excluded interference over this "
            f"ladder is 1.1514 (quadrature-converged), so the band is infeasible in "
            f"expectation: the serving satellite carries ~49% of the total visible "
            f"interference at N=100 but only ~6% at N=10^4, and excluding it inflates "
            f"the finite-N growth exponent. The mechanism test below confirms the "
            f"all-visible interference grows exactly linearly."
        )

    def test_growth_mechanism_supplement(self, criterion_sweep):
        # (a) measured serving-excluded interference grows at least linearly;
        # (b) the exact all-visible phase average is linear to within grid error
        results, _ = criterion_sweep
        rows = _policy_rows(results, "full")
        measured = _loglog_slope(
            [r.n_total for r in rows], [r.mean_interference_over_p for r in rows]
        )
        assert measured >= 0.85

        user = equator_user()
        grid = 48
        totals = []
        sizes = [(r.n_o, r.n_s) for r in rows]
        for n_o, n_s in sizes:
            params = baseline_walker(n_o, n_s)
            w_t, w_o = params.cell_widths
            acc = 0.0
            for a in (np.arange(grid) + 0.5) * w_t / grid:
                for b in (np.arange(grid) + 0.5) * w_o / grid:
                    th, om = snapshot_phases(params, a, b)
                    d, vis = phase_grid_geometry(params, user, th, om)
                    d = d.ravel()
                    w = np.where(vis.ravel(), np.where(d <= 1000.0, 10.0, 1.0) * d ** -2.5, 0.0)
                    acc += w.sum()
            totals.append(acc / grid**2)
        exact_slope = _loglog_slope([a * b for a, b in sizes], totals)
        _report(
            "interference-growth-mechanism",
            0.95 <= exact_slope <= 1.05,
            f"all-visible exact slope={exact_slope:.4f}, measured excl-serving slope={measured:.4f}",
        )
        assert 0.95 <= exact_slope <= 1.05


class TestCoverageCollapse:
    def test_full_reuse_collapse(self, ladder_sweep):
        _, results, _ = ladder_sweep
        rows = _policy_rows(results, "full")
        largest = rows[-1]
        assert largest.n_total == 10_000
        peak = max(r.p_cov for r in rows)
        factor_ok = largest.p_cov * 5.0 <= peak
        wilson_ok = largest.p_cov_ci[1] < 0.2
        _report(
            "coverage-collapse",
            factor_ok and wilson_ok,
            f"peak={peak:.4f}, p_cov(1e4)={largest.p_cov:.5f}, wilson_hi={largest.p_cov_ci[1]:.5f}",
        )
        assert factor_ok
        assert wilson_ok


class TestBoundDominance:
    def test_ladder_dominance(self, ladder_sweep, ref_cert):
        config, results, _ = ladder_sweep
        chan = config.channel
        fading = config.fading
        tau = config.tau_linear
        qualifying = 0
        violations = []
        for r in results:
            if min(r.n_o, r.n_s) < ref_cert.n0 or block_m(ref_cert, r.n_o, r.n_s) < 1:
                continue
            qualifying += 1
            if r.policy_id == "full":
                bound = bound_pcov(ref_cert, chan, fading, tau, r.n_o, r.n_s)
            elif r.policy_id in ("q0.1", "q0.03"):
                bound = bound_pcov_thinned(
                    ref_cert, chan, fading, tau, r.n_o, r.n_s, r.effective_q
                )
            else:
                continue
            if r.p_cov_ci[1] > bound:
                violations.append((r.policy_id, r.n_total))
        _report(
            "bound-dominance",
            not violations,
            f"{qualifying} ladder points satisfy the bound preconditions "
            f"(m >= 1 needs N >= {math.ceil(2.0 / ref_cert.beta)}), {len(violations)} violations",
        )
        assert not violations

    def test_dominance_at_qualifying_size(self, ref_cert):
        # smallest square size with m >= 1 under this certificate
        n_side = 160
        assert block_m(ref_cert, n_side, n_side) >= 1
        config = SweepConfig(
            constellation_list=((n_side, n_side),),
            base_drops=1000,
            max_drops=1000,
            master_seed=MASTER_SEED,
        )
        chan, fading, tau = config.channel, config.fading, config.tau_linear
        for policy, bound in (
            (ActivityPolicy.full_reuse(),
             bound_pcov(ref_cert, chan, fading, tau, n_side, n_side)),
            (ActivityPolicy.fixed_thinning(0.1),
             bound_pcov_thinned(ref_cert, chan, fading, tau, n_side, n_side, 0.1)),
            (ActivityPolicy.fixed_thinning(0.03),
             bound_pcov_thinned(ref_cert, chan, fading, tau, n_side, n_side, 0.03)),
        ):
            res = run_point(config, n_side, n_side, policy)
            assert res.p_cov_ci[1] <= bound


class TestQnLaw:
    def test_ratios_and_tail_slope(self, ladder_sweep, ref_cert):
        config, results, _ = ladder_sweep
        kt = k_thin(ref_cert, config.channel, config.fading, config.tau_linear)
        ratios = [r.effective_q * r.n_total * r.p_cov / kt for r in results]
        max_ratio = max(ratios)

        rows = _policy_rows(results, "full")[-4:]
        slope = _loglog_slope([r.n_total for r in rows], [r.p_cov for r in rows])
        slope_ok = slope is None or slope <= -0.7
        _report(
            "qn-law",
            max_ratio <= 1.0 and slope_ok,
            f"max qN*p_cov/K_thin={max_ratio:.3g}, full-reuse tail slope="
            f"{'collapsed-to-zero' if slope is None else f'{slope:.2f}'}",
        )
        assert max_ratio <= 1.0
        assert slope_ok


class TestScalingLawStabilization:
    def test_interference_flattens_and_coverage_holds(self, ladder_sweep):
        _, results, _ = ladder_sweep
        rows = _policy_rows(results, "scaling600")
        anchor = next(r for r in rows if r.n_total >= 600)
        largest = rows[-1]
        ratio = largest.mean_interference_over_p / anchor.mean_interference_over_p
        peak = max(r.p_cov for r in rows)
        cov_ok = largest.p_cov >= 0.5 * peak
        _report(
            "scaling-law-stabilization",
            0.5 <= ratio <= 2.0 and cov_ok,
            f"E[I] ratio N={largest.n_total} vs N={anchor.n_total}: {ratio:.3f}, "
            f"p_cov(1e4)={largest.p_cov:.3f} vs peak {peak:.3f}",
        )
        assert 0.5 <= ratio <= 2.0
        assert cov_ok


class TestMeanSinrDecay:
    def test_decay_slope_and_k_sinr_cap(self, ladder_sweep, ref_cert):
        config, results, _ = ladder_sweep
        rows = _policy_rows(results, "full")
        tail = rows[-4:]
        slope = _loglog_slope([r.n_total for r in tail], [r.mean_sinr for r in tail])
        ks = k_sinr(ref_cert, config.channel, config.fading)
        # assert the K_SINR cap wherever the certificate applies (a superset
        # of the decay theorem's validity range, which starts above the ladder)
        capped = [r for r in rows if min(r.n_o, r.n_s) >= ref_cert.n0]
        cap_ok = all(r.mean_sinr <= ks / r.n_total for r in capped)
        _report(
            "mean-sinr-decay",
            -1.25 <= slope <= -0.75 and cap_ok,
            f"tail slope={slope:.3f}, K_SINR={ks:.3g}, cap checked at {len(capped)} points",
        )
        assert -1.25 <= slope <= -0.75
        assert cap_ok


class TestOptimizerExistence:
    def test_two_seeds_argmax_cis_overlap(self, ref_cert, tmp_path):
        cert_path = str(tmp_path / "certificate.json")
        ref_cert.save(cert_path)
        cap = int(1.5 * ref_cert.n0**2)
        manifests = []
        for seed in (1000, 2000):
            out = str(tmp_path / f"opt{seed}")
            code = cli_main([
                "optimize", "--certificate", cert_path, "--out-dir", out,
                "--seed", str(seed), "--drops", "400", "--n-max-cap", str(cap),
            ])
            assert code == 0
            manifests.append(json.load(open(os.path.join(out, "optimize_manifest.json"))))
        (a, b) = manifests
        lo_a, hi_a = a["j_star_ci"]
        lo_b, hi_b = b["j_star_ci"]
        overlap = lo_a <= hi_b and lo_b <= hi_a
        _report(
            "optimizer-existence",
            bool(a["argmax"]) and overlap,
            f"argmax {a['argmax']} vs {b['argmax']}, "
            f"J* CIs [{lo_a:.3g},{hi_a:.3g}] / [{lo_b:.3g},{hi_b:.3g}]",
        )
        assert a["argmax"] and b["argmax"]
        assert overlap


class TestReproducibility:
    def test_thread_count_invariance(self, tmp_path, monkeypatch):
        base = dict(
            constellation_list=((10, 10), (14, 14)),
            policies=(ActivityPolicy.full_reuse(), ActivityPolicy.scaling_law(600.0)),
            base_drops=400,
            max_drops=400,
            master_seed=MASTER_SEED,
        )
        monkeypatch.setenv("WALKER_THREADS", "1")
        single = run_sweep(SweepConfig(**base))
        monkeypatch.setenv("WALKER_THREADS", "8")
        eight = run_sweep(SweepConfig(**base))
        p1 = tmp_path / "one.csv"
        p8 = tmp_path / "eight.csv"
        write_sweep_csv(single, str(p1))
        write_sweep_csv(eight, str(p8))
        identical = p1.read_bytes() == p8.read_bytes()
        _report("reproducibility", identical, "1-thread vs 8-thread sweep CSVs byte-identical")
        assert identical


class TestCheckPipeline:
    def test_check_on_real_artifacts(self, sweep_artifacts):
        # every dominance ratio passes; the only flagged item is the known
        # interference-exponent transient (same analysis as above)
        code = cli_main(["check", "--out-dir", sweep_artifacts])
        report = json.load(open(os.path.join(sweep_artifacts, "check_report.json")))
        assert report["max_ratio_qn_pcov"] <= 1.0
        assert report["max_ratio_qn_cerg"] <= 1.0
        assert report["slope_pcov_full_tail"] <= -0.7
        assert 0.5 <= report["scaling_interference_ratio"] <= 2.0
        assert all("interference slope" in f for f in report["failures"])
        assert code == (EXIT_CHECK if report["failures"] else 0)
