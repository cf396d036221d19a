"""Densification sweep engine: i.i.d. drops across constellation sizes and
activity policies, coverage/rate estimators with confidence intervals,
adaptive refinement in the low-coverage tail, and structured result records.

All randomness derives from (master_seed, n_o, n_s, policy, drop_index), so
results are independent of execution order and worker count.
"""

from __future__ import annotations

import concurrent.futures
import csv
import json
import os
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .channel import ActivityPolicy, ChannelParams, FadingModel, calibrate_noise, db_to_linear
from .geometry import UserPosition, WalkerParams, assert_latitude_nondegenerate, geometry_hash
from .links import evaluate_drop
from .phases import drop_rng

Z_95 = 1.959964  # two-sided 95% normal quantile

DEFAULT_LADDER = [(10, 10), (14, 14), (20, 20), (28, 28), (40, 40), (57, 57), (80, 80), (100, 100)]

CSV_COLUMNS = [
    "n_o", "n_s", "n_total", "policy", "q",
    "p_cov", "p_cov_lo", "p_cov_hi",
    "c_erg", "c_erg_lo", "c_erg_hi",
    "mean_I_over_p", "mean_D0_km", "drops", "outage_frac", "guide",
]


def default_policies() -> list[ActivityPolicy]:
    return [
        ActivityPolicy.full_reuse(),
        ActivityPolicy.fixed_thinning(0.1),
        ActivityPolicy.fixed_thinning(0.03),
        ActivityPolicy.scaling_law(600.0),
    ]


def table_one_channel(
    tx_power: float = 1.0,
    pathloss_exp: float = 2.5,
    gain_rx: float = 1.0,
    gain_tx_boost: float = 10.0,
    gain_cutoff_km: float = 1000.0,
    altitude_km: float = 550.0,
    snr_at_dmin_db: float = 12.0,
    noise_includes_boost: bool = True,
) -> ChannelParams:
    """Baseline channel with noise set so a unit-fading link at the minimum
    distance (= altitude) achieves snr_at_dmin_db."""
    sigma2 = calibrate_noise(
        tx_power, gain_rx, gain_tx_boost, pathloss_exp,
        d_min_km=altitude_km, snr_db=snr_at_dmin_db, include_boost=noise_includes_boost,
    )
    return ChannelParams(
        tx_power=tx_power,
        pathloss_exp=pathloss_exp,
        gain_rx=gain_rx,
        gain_tx_boost=gain_tx_boost,
        gain_cutoff_km=gain_cutoff_km,
        noise_power=sigma2,
    )


@dataclass(frozen=True)
class SweepConfig:
    constellation_list: tuple = tuple(DEFAULT_LADDER)
    policies: tuple = None
    tau_db: float = 0.0
    base_drops: int = 6000
    max_drops: int = 30000
    refine_threshold: float = 0.05
    master_seed: int = 1000
    fading: FadingModel = field(default_factory=FadingModel.rayleigh)
    user_latitude_deg: float = 0.0
    altitude_km: float = 550.0
    inclination_deg: float = 53.0
    earth_radius_km: float = 6371.0
    channel: ChannelParams = None
    workers: int | None = None

    def __post_init__(self):
        if self.policies is None:
            object.__setattr__(self, "policies", tuple(default_policies()))
        else:
            object.__setattr__(self, "policies", tuple(self.policies))
        object.__setattr__(self, "constellation_list", tuple(tuple(p) for p in self.constellation_list))
        if self.channel is None:
            object.__setattr__(self, "channel", table_one_channel(altitude_km=self.altitude_km))
        if not self.constellation_list:
            raise ValueError("constellation_list must be nonempty")
        if self.base_drops > self.max_drops:
            raise ValueError("base_drops must not exceed max_drops")

    @property
    def tau_linear(self) -> float:
        return db_to_linear(self.tau_db)

    def walker(self, n_o: int, n_s: int) -> WalkerParams:
        return WalkerParams(
            n_orbits=n_o,
            n_sats_per_orbit=n_s,
            orbit_radius_km=self.earth_radius_km + self.altitude_km,
            earth_radius_km=self.earth_radius_km,
            inclination_rad=np.radians(self.inclination_deg),
        )

    def user(self) -> UserPosition:
        return UserPosition(np.radians(self.user_latitude_deg), self.earth_radius_km)

    def geometry_hash(self) -> str:
        return geometry_hash(
            self.earth_radius_km + self.altitude_km,
            self.earth_radius_km,
            float(np.radians(self.inclination_deg)),
            float(np.radians(self.user_latitude_deg)),
        )


@dataclass
class SweepPointResult:
    n_o: int
    n_s: int
    n_total: int
    policy_id: str
    effective_q: float
    p_cov: float
    p_cov_ci: tuple[float, float]
    c_erg_bits: float
    c_erg_ci: tuple[float, float]
    mean_interference_over_p: float
    mean_serving_distance_km: float
    drops_used: int
    outage_no_visible_fraction: float
    mean_sinr: float
    mean_sinr_ci: tuple[float, float]
    guide: float = float("nan")


def wilson_interval(successes: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if not 0 <= successes <= trials:
        raise ValueError("successes must lie in [0, trials]")
    if confidence != 0.95:
        raise ValueError("only the 95% level is supported")
    z = Z_95
    n = float(trials)
    p_hat = successes / n
    denom = 1.0 + z * z / n
    center = (p_hat + z * z / (2.0 * n)) / denom
    half = (z / denom) * np.sqrt(p_hat * (1.0 - p_hat) / n + z * z / (4.0 * n * n))
    # the interval endpoints are algebraically exact at the boundaries
    lo = 0.0 if successes == 0 else max(0.0, float(center - half))
    hi = 1.0 if successes == trials else min(1.0, float(center + half))
    return lo, hi


def _normal_ci(values: np.ndarray) -> tuple[float, float]:
    n = len(values)
    m = float(values.mean())
    if n < 2:
        return m, m
    half = Z_95 * float(values.std(ddof=1)) / np.sqrt(n)
    return m - half, m + half


def _run_drops(config: SweepConfig, n_o: int, n_s: int, policy: ActivityPolicy, start: int, stop: int):
    """Evaluate drops [start, stop) for one sweep point; returns metric arrays."""
    params = config.walker(n_o, n_s)
    user = config.user()
    kind_code, param_code = policy.stream_key()
    count = stop - start
    sinr = np.empty(count)
    interference = np.empty(count)
    d0 = np.empty(count)
    for k in range(count):
        rng = drop_rng(config.master_seed, n_o, n_s, kind_code, param_code, start + k)
        drop = evaluate_drop(params, user, config.channel, config.fading, policy, rng)
        sinr[k] = drop.sinr
        interference[k] = drop.interference
        d0[k] = drop.serving_distance_km
    return sinr, interference, d0


def run_point(config: SweepConfig, n_o: int, n_s: int, policy: ActivityPolicy) -> SweepPointResult:
    """One sweep point: base_drops i.i.d. drops, refined up to max_drops when
    the coverage estimate falls below refine_threshold."""
    assert_latitude_nondegenerate(config.walker(n_o, n_s), config.user())
    tau = config.tau_linear

    sinr, interference, d0 = _run_drops(config, n_o, n_s, policy, 0, config.base_drops)
    p_hat = float((sinr > tau).mean())
    if p_hat < config.refine_threshold and config.max_drops > config.base_drops:
        extra = _run_drops(config, n_o, n_s, policy, config.base_drops, config.max_drops)
        sinr = np.concatenate([sinr, extra[0]])
        interference = np.concatenate([interference, extra[1]])
        d0 = np.concatenate([d0, extra[2]])

    drops = len(sinr)
    covered = int((sinr > tau).sum())
    rate = np.log2(1.0 + sinr)
    n_total = n_o * n_s
    with np.errstate(invalid="ignore"):
        mean_d0 = float(np.nanmean(d0)) if np.isfinite(d0).any() else float("nan")
    return SweepPointResult(
        n_o=n_o,
        n_s=n_s,
        n_total=n_total,
        policy_id=policy.label,
        effective_q=policy.effective_q(n_total),
        p_cov=covered / drops,
        p_cov_ci=wilson_interval(covered, drops),
        c_erg_bits=float(rate.mean()),
        c_erg_ci=_normal_ci(rate),
        mean_interference_over_p=float(interference.mean()) / config.channel.tx_power,
        mean_serving_distance_km=mean_d0,
        drops_used=drops,
        outage_no_visible_fraction=float(np.isnan(d0).mean()),
        mean_sinr=float(sinr.mean()),
        mean_sinr_ci=_normal_ci(sinr),
    )


def _point_task(args):
    config, n_o, n_s, policy = args
    return run_point(config, n_o, n_s, policy)


def resolve_workers(requested: int | None = None) -> int:
    """Worker count: explicit argument, else WALKER_THREADS, else 1."""
    if requested is not None:
        return max(1, int(requested))
    env = os.environ.get("WALKER_THREADS")
    if env:
        return max(1, int(env))
    return 1


def run_sweep(config: SweepConfig) -> list[SweepPointResult]:
    """Cross product of constellations x policies, with per-policy 1/(qN)
    guide values anchored to the first point of each policy's coverage curve."""
    tasks = [
        (config, n_o, n_s, policy)
        for (n_o, n_s) in config.constellation_list
        for policy in config.policies
    ]
    workers = resolve_workers(config.workers)
    if workers == 1:
        results = [_point_task(t) for t in tasks]
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_point_task, tasks))

    anchors: dict[str, float] = {}
    for res in results:
        qn = res.effective_q * res.n_total
        if res.policy_id not in anchors:
            anchors[res.policy_id] = res.p_cov * qn
        res.guide = anchors[res.policy_id] / qn
    return results


def format_sig9(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.9g}"


def write_sweep_csv(results: list[SweepPointResult], path: str) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(CSV_COLUMNS)
        for r in results:
            writer.writerow([
                r.n_o, r.n_s, r.n_total, r.policy_id, format_sig9(r.effective_q),
                format_sig9(r.p_cov), format_sig9(r.p_cov_ci[0]), format_sig9(r.p_cov_ci[1]),
                format_sig9(r.c_erg_bits), format_sig9(r.c_erg_ci[0]), format_sig9(r.c_erg_ci[1]),
                format_sig9(r.mean_interference_over_p), format_sig9(r.mean_serving_distance_km),
                r.drops_used, format_sig9(r.outage_no_visible_fraction), format_sig9(r.guide),
            ])


def read_sweep_csv(path: str) -> list[dict]:
    """Rows as dicts with numeric fields parsed; policy stays a string."""
    rows = []
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        missing = [c for c in CSV_COLUMNS if c not in (reader.fieldnames or [])]
        if missing:
            raise ValueError(f"sweep CSV missing columns: {missing}")
        for raw in reader:
            row = dict(raw)
            for key in CSV_COLUMNS:
                if key in ("policy",):
                    continue
                row[key] = int(raw[key]) if key in ("n_o", "n_s", "n_total", "drops") else float(raw[key])
            rows.append(row)
    return rows


def write_manifest(config: SweepConfig, path: str, wall_clock_s: float, extra: dict | None = None) -> None:
    """Run manifest: config echo, seed, version, wall clock.  The manifest is
    the only output that carries a timestamp."""
    payload = {
        "version": f"walkerdense-{__version__}",
        "master_seed": config.master_seed,
        "geometry_hash": config.geometry_hash(),
        "timestamp_utc": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        "wall_clock_s": wall_clock_s,
        "config": {
            "constellation_list": [list(p) for p in config.constellation_list],
            "policies": [p.label for p in config.policies],
            "tau_db": config.tau_db,
            "base_drops": config.base_drops,
            "max_drops": config.max_drops,
            "refine_threshold": config.refine_threshold,
            "fading": config.fading.kind,
            "user_latitude_deg": config.user_latitude_deg,
            "altitude_km": config.altitude_km,
            "inclination_deg": config.inclination_deg,
            "earth_radius_km": config.earth_radius_km,
            "channel": {
                "tx_power": config.channel.tx_power,
                "pathloss_exp": config.channel.pathloss_exp,
                "gain_rx": config.channel.gain_rx,
                "gain_tx_boost": config.channel.gain_tx_boost,
                "gain_cutoff_km": config.channel.gain_cutoff_km,
                "noise_power": config.channel.noise_power,
            },
        },
    }
    if extra:
        payload.update(extra)
    with open(path, "w") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")
