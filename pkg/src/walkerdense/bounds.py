"""Constructive annulus-block certificate and exact evaluation of the
closed-form densification converse bounds.

The certificate pins constants (d1, d2, beta, n0) such that, for every phase
state and all constellations with min(N_o, N_s) >= n0, at least
floor(beta * N_o * N_s) satellites are visible with distance inside
[d1, d2], a band strictly inside the horizon.  Every bound evaluator
consumes these constants.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .channel import ActivityPolicy, ChannelParams, FadingModel
from .geometry import (
    TWO_PI,
    DegenerateLatitudeError,
    UserPosition,
    WalkerParams,
    geometry_hash,
    horizon_distance,
    phase_grid_geometry,
    snapshot_link_geometry,
)
from .links import evaluate_drop
from .phases import drop_rng


class CertificateError(RuntimeError):
    """Certificate construction or verification failed."""


class BoundPreconditionError(ValueError):
    """A bound was requested outside its validity range."""


# ---------------------------------------------------------------------------
# Lattice counting (the only counting step in the block argument)
# ---------------------------------------------------------------------------

def lattice_arc_count(n_points: int, shift: float, arc_start: float, arc_length: float) -> int:
    """Points of the shifted n-point lattice inside the arc [start, start+len)."""
    i = np.arange(n_points)
    pos = np.mod(shift + TWO_PI * i / n_points - arc_start, TWO_PI)
    return int((pos < arc_length).sum())


def lattice_arc_counts(n_points: int, shifts, arc_starts, arc_lengths) -> np.ndarray:
    """Vectorized lattice_arc_count over parallel arrays of cases."""
    shifts = np.asarray(shifts, dtype=float)[:, None]
    arc_starts = np.asarray(arc_starts, dtype=float)[:, None]
    arc_lengths = np.asarray(arc_lengths, dtype=float)[:, None]
    i = np.arange(n_points)[None, :]
    pos = np.mod(shifts + TWO_PI * i / n_points - arc_starts, TWO_PI)
    return (pos < arc_lengths).sum(axis=1)


def lattice_arc_floor(n_points: int, arc_length: float) -> int:
    """Guaranteed minimum count: floor(N * len / 2pi)."""
    return int(math.floor(n_points * arc_length / TWO_PI))


# ---------------------------------------------------------------------------
# Certificate
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BlockConstants:
    """Annulus-block certificate: distances d1 < d2 strictly inside the
    horizon, guaranteed density beta, validity threshold n0, and the phase
    rectangle (theta_lo, theta_hi, omega_lo, omega_hi) that produces it."""

    d1_km: float
    d2_km: float
    beta: float
    n0: int
    rect_b: tuple[float, float, float, float]
    epsilon0_km: float
    d0_km: float
    orbit_radius_km: float
    earth_radius_km: float
    inclination_rad: float
    user_latitude_rad: float
    grid_resolution: int

    def __post_init__(self):
        d_max = math.sqrt(self.orbit_radius_km**2 - self.earth_radius_km**2)
        if not (0.0 < self.d1_km < self.d2_km < d_max):
            raise ValueError("need 0 < d1 < d2 < horizon distance")
        if self.d2_km > d_max - self.epsilon0_km + 1e-9:
            raise ValueError("need d2 <= d_max - epsilon0")
        if not (0.0 < self.beta < 1.0):
            raise ValueError("beta must lie in (0, 1)")
        if self.n0 < 1:
            raise ValueError("n0 must be >= 1")
        t_lo, t_hi, o_lo, o_hi = self.rect_b
        if not (0.0 <= t_lo < t_hi <= TWO_PI and 0.0 <= o_lo < o_hi <= TWO_PI):
            raise ValueError("rect_b must be a nonempty rectangle inside the fundamental domain")
        beta_from_rect = 0.25 * ((t_hi - t_lo) / TWO_PI) * ((o_hi - o_lo) / TWO_PI)
        if abs(self.beta - beta_from_rect) > 1e-9 * beta_from_rect:
            raise ValueError("beta must equal (1/4)(dtheta/2pi)(domega/2pi) for rect_b")

    @property
    def d_max_km(self) -> float:
        return math.sqrt(self.orbit_radius_km**2 - self.earth_radius_km**2)

    @property
    def d_min_km(self) -> float:
        return self.orbit_radius_km - self.earth_radius_km

    @property
    def side_lengths(self) -> tuple[float, float]:
        t_lo, t_hi, o_lo, o_hi = self.rect_b
        return t_hi - t_lo, o_hi - o_lo

    def geometry_hash(self) -> str:
        return geometry_hash(
            self.orbit_radius_km, self.earth_radius_km, self.inclination_rad, self.user_latitude_rad
        )

    def walker(self, n_o: int, n_s: int) -> WalkerParams:
        return WalkerParams(n_o, n_s, self.orbit_radius_km, self.earth_radius_km, self.inclination_rad)

    def user(self) -> UserPosition:
        return UserPosition(self.user_latitude_rad, self.earth_radius_km)

    def to_json_dict(self) -> dict:
        return {
            "d1_km": self.d1_km,
            "d2_km": self.d2_km,
            "beta": self.beta,
            "n0": self.n0,
            "rect_b": list(self.rect_b),
            "epsilon0_km": self.epsilon0_km,
            "d0_km": self.d0_km,
            "orbit_radius_km": self.orbit_radius_km,
            "earth_radius_km": self.earth_radius_km,
            "inclination_rad": self.inclination_rad,
            "user_latitude_rad": self.user_latitude_rad,
            "grid_resolution": self.grid_resolution,
            "geometry_hash": self.geometry_hash(),
        }

    def save(self, path: str) -> None:
        with open(path, "w") as f:
            json.dump(self.to_json_dict(), f, indent=2, sort_keys=True)
            f.write("\n")

    @classmethod
    def from_json_dict(cls, payload: dict) -> "BlockConstants":
        return cls(
            d1_km=payload["d1_km"],
            d2_km=payload["d2_km"],
            beta=payload["beta"],
            n0=int(payload["n0"]),
            rect_b=tuple(payload["rect_b"]),
            epsilon0_km=payload["epsilon0_km"],
            d0_km=payload["d0_km"],
            orbit_radius_km=payload["orbit_radius_km"],
            earth_radius_km=payload["earth_radius_km"],
            inclination_rad=payload["inclination_rad"],
            user_latitude_rad=payload["user_latitude_rad"],
            grid_resolution=int(payload["grid_resolution"]),
        )

    @classmethod
    def load(cls, path: str) -> "BlockConstants":
        with open(path) as f:
            return cls.from_json_dict(json.load(f))


def _floor_halving_threshold(delta: float) -> int:
    """Smallest n with floor(n*delta/2pi) >= (n*delta/2pi)/2.

    Equivalent to n*delta/2pi >= 1, and once true it stays true as n grows.
    """
    n = max(1, math.ceil(TWO_PI / delta - 1e-12))
    while math.floor(n * delta / TWO_PI + 1e-12) < 0.5 * n * delta / TWO_PI - 1e-12:
        n += 1
    return n


def _square_positions(ok_int: np.ndarray, window_sum: np.ndarray, s: int):
    """Top-left corners of all s x s all-valid squares, via the integral image."""
    n_i, n_j = ok_int.shape[0] - 1, ok_int.shape[1] - 1
    if s > n_i or s > n_j:
        return np.empty((0, 2), dtype=int)
    total = (
        window_sum[s:, s:] - window_sum[:-s, s:] - window_sum[s:, :-s] + window_sum[:-s, :-s]
    )
    ii, jj = np.nonzero(total == s * s)
    return np.stack([ii, jj], axis=1)


def _best_rectangle(ok: np.ndarray):
    """Largest axis-aligned all-valid cell rectangle, maximizing the shorter
    side first (it controls the certificate threshold n0), then the area
    (it controls the density beta).  No torus wrap.  Returns inclusive
    bounds (ilo, ihi, jlo, jhi) or None."""
    ok_int = ok.astype(np.int32)
    window_sum = np.zeros((ok.shape[0] + 1, ok.shape[1] + 1), dtype=np.int64)
    window_sum[1:, 1:] = ok_int.cumsum(axis=0).cumsum(axis=1)

    # binary search the largest all-valid square side
    lo, hi = 0, min(ok.shape)
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if _square_positions(ok_int, window_sum, mid).shape[0] > 0:
            lo = mid
        else:
            hi = mid - 1
    s = lo
    if s < 1:
        return None

    # prefix sums for contiguous row/column validity checks
    col_pref = np.zeros((ok.shape[0] + 1, ok.shape[1]), dtype=np.int64)
    col_pref[1:] = ok_int.cumsum(axis=0)
    row_pref = np.zeros((ok.shape[0], ok.shape[1] + 1), dtype=np.int64)
    row_pref[:, 1:] = ok_int.cumsum(axis=1)

    def extend_cols(ilo, ihi, jlo, jhi):
        height = ihi - ilo + 1
        valid = (col_pref[ihi + 1] - col_pref[ilo]) == height
        j = jlo - 1
        while j >= 0 and valid[j]:
            j -= 1
        jlo = j + 1
        j = jhi + 1
        while j < ok.shape[1] and valid[j]:
            j += 1
        return ilo, ihi, jlo, j - 1

    def extend_rows(ilo, ihi, jlo, jhi):
        width = jhi - jlo + 1
        valid = (row_pref[:, jhi + 1] - row_pref[:, jlo]) == width
        i = ilo - 1
        while i >= 0 and valid[i]:
            i -= 1
        ilo = i + 1
        i = ihi + 1
        while i < ok.shape[0] and valid[i]:
            i += 1
        return ilo, i - 1, jlo, jhi

    positions = _square_positions(ok_int, window_sum, s)
    stride = max(1, positions.shape[0] // 64)
    best = None
    best_area = -1
    for i0, j0 in positions[::stride]:
        square = (int(i0), int(i0) + s - 1, int(j0), int(j0) + s - 1)
        for rect in (extend_cols(*square), extend_rows(*square)):
            ilo, ihi, jlo, jhi = rect
            area = (ihi - ilo + 1) * (jhi - jlo + 1)
            if area > best_area:
                best_area = area
                best = rect
    return best


def estimate_block_constants(
    params: WalkerParams,
    user: UserPosition,
    grid_resolution: int = 1024,
) -> BlockConstants:
    """Estimate admissible certificate constants by sampling the phase map
    on a fine grid.

    Steps: evaluate distance and visibility at all grid-cell centers; take
    the visible point with the largest headroom min(d/2, (d_max-d)/2); set
    epsilon0 to half that headroom and the annulus to d0 +- epsilon0; find
    the largest axis-aligned rectangle of cells whose centers all map into
    the open annulus and stay visible (shorter side maximized first, since
    it controls n0), then shrink it inward by one cell per side as a
    safety margin; set beta = (1/4)(dtheta/2pi)(domega/2pi) and n0 from
    the floor-halving condition per axis.

    The emitted certificate is self-checked with verify_block on a 9x9
    lattice at (2 n0, 2 n0) before being returned.
    """
    if grid_resolution < 64:
        raise ValueError("grid_resolution must be >= 64")
    g = grid_resolution
    h = TWO_PI / g
    centers = (np.arange(g) + 0.5) * h
    d, vis = phase_grid_geometry(params, user, centers, centers)
    d_max = horizon_distance(params)

    headroom = np.where(vis, np.minimum(d / 2.0, (d_max - d) / 2.0), -np.inf)
    best = float(headroom.max())
    if not best > 0.0:
        raise DegenerateLatitudeError(
            "no visible phase-grid point: latitude is degenerate for this geometry"
        )
    flat_best = int(np.argmax(headroom))
    d0 = float(d.ravel()[flat_best])
    eps0 = 0.5 * best
    d1 = d0 - eps0
    d2 = d0 + eps0

    ok = vis & (d > d1) & (d < d2)
    grown = _best_rectangle(ok)
    if grown is None:
        raise CertificateError("annulus preimage contains no grid cell")
    # one-cell safety shrink per side
    ilo, ihi, jlo, jhi = grown[0] + 1, grown[1] - 1, grown[2] + 1, grown[3] - 1
    if ihi < ilo or jhi < jlo:
        raise CertificateError(
            "annulus-preimage rectangle degenerates to a single cell at this resolution"
        )

    rect = (ilo * h, (ihi + 1) * h, jlo * h, (jhi + 1) * h)
    delta_theta = rect[1] - rect[0]
    delta_omega = rect[3] - rect[2]
    beta = 0.25 * (delta_theta / TWO_PI) * (delta_omega / TWO_PI)
    n0 = max(_floor_halving_threshold(delta_theta), _floor_halving_threshold(delta_omega))

    constants = BlockConstants(
        d1_km=d1,
        d2_km=d2,
        beta=beta,
        n0=n0,
        rect_b=rect,
        epsilon0_km=eps0,
        d0_km=d0,
        orbit_radius_km=params.orbit_radius_km,
        earth_radius_km=params.earth_radius_km,
        inclination_rad=params.inclination_rad,
        user_latitude_rad=user.latitude_rad,
        grid_resolution=g,
    )

    check = verify_block(constants, constants.walker(2 * n0, 2 * n0), user, phase_grid=9)
    if check.status != "ok":
        raise CertificateError(
            f"self-check failed at (2n0, 2n0) = ({2 * n0}, {2 * n0}): {check}"
        )
    return constants


@dataclass(frozen=True)
class BlockVerification:
    status: str  # "ok" | "failed" | "precondition_unmet"
    n_o: int
    n_s: int
    required: int
    min_count: int | None = None
    slack: int | None = None
    n_states: int = 0
    failing_state: tuple[float, float] | None = None

    @property
    def passed(self) -> bool:
        return self.status == "ok"


def verify_block(
    constants: BlockConstants,
    params: WalkerParams,
    user: UserPosition,
    phase_grid: int = 33,
) -> BlockVerification:
    """Count annulus satellites over a lattice of phase states (plus cell
    corners and center) and check every state meets floor(beta*N).

    Returns a precondition_unmet status when min(N_o, N_s) < n0, and a
    falsification record (worst phase state and its count) on failure.
    """
    n_o, n_s = params.n_orbits, params.n_sats_per_orbit
    required = math.floor(constants.beta * n_o * n_s)
    if min(n_o, n_s) < constants.n0:
        return BlockVerification(status="precondition_unmet", n_o=n_o, n_s=n_s, required=required)

    w_theta, w_omega = params.cell_widths

    def offsets(width: float) -> np.ndarray:
        lattice = np.arange(phase_grid) * (width / phase_grid)
        extras = np.array([width / 2.0, width * (1.0 - 1e-9)])
        return np.unique(np.concatenate([lattice, extras]))

    thetas = offsets(w_theta)
    omegas = offsets(w_omega)
    min_count = None
    worst = None
    for tb in thetas:
        for ob in omegas:
            d, vis = snapshot_link_geometry(params, user, float(tb), float(ob))
            count = int((vis & (d >= constants.d1_km) & (d <= constants.d2_km)).sum())
            if min_count is None or count < min_count:
                min_count = count
                worst = (float(tb), float(ob))
    n_states = len(thetas) * len(omegas)
    status = "ok" if min_count >= required else "failed"
    return BlockVerification(
        status=status,
        n_o=n_o,
        n_s=n_s,
        required=required,
        min_count=min_count,
        slack=min_count - required,
        n_states=n_states,
        failing_state=worst if status == "failed" else None,
    )


# ---------------------------------------------------------------------------
# Closed-form bound evaluators
# ---------------------------------------------------------------------------

def block_m(constants: BlockConstants, n_o: int, n_s: int) -> int:
    """Guaranteed interferer count m = floor(beta*N) - 1 (serving satellite
    discarded)."""
    return math.floor(constants.beta * n_o * n_s) - 1


def a_geom(constants: BlockConstants, pathloss_exp: float) -> float:
    """Geometry amplification (d2 / (r - e))^alpha relating the strongest
    possible signal to the weakest annulus interferer."""
    return (constants.d2_km / constants.d_min_km) ** pathloss_exp


def _require_block(constants: BlockConstants, n_o: int, n_s: int) -> int:
    if min(n_o, n_s) < constants.n0:
        raise BoundPreconditionError(
            f"min(N_o, N_s) = {min(n_o, n_s)} below certificate threshold n0 = {constants.n0}"
        )
    m = block_m(constants, n_o, n_s)
    if m < 1:
        raise BoundPreconditionError(
            f"guaranteed interferer count m = {m} < 1 at N = {n_o * n_s}; "
            f"bound needs N >= {math.ceil(2.0 / constants.beta)}"
        )
    return m


def bound_pcov(
    constants: BlockConstants,
    chan: ChannelParams,
    fading: FadingModel,
    tau_linear: float,
    n_o: int,
    n_s: int,
) -> float:
    """Coverage upper bound 4 Var(H)/m + (2 g_t / tau) A/m, clamped to [0, 1]."""
    m = _require_block(constants, n_o, n_s)
    a = a_geom(constants, chan.pathloss_exp)
    raw = 4.0 * fading.variance / m + (2.0 * chan.gain_tx_boost / tau_linear) * a / m
    return min(1.0, raw)


def bound_cerg(
    constants: BlockConstants,
    chan: ChannelParams,
    fading: FadingModel,
    n_o: int,
    n_s: int,
) -> float:
    """Ergodic spectral-efficiency upper bound in bits/s/Hz:
    (1/ln 2) * (2 g_t A/m + (4 Var(H)/m) * p g_t g_r (r-e)^(-alpha) / sigma^2)."""
    m = _require_block(constants, n_o, n_s)
    a = a_geom(constants, chan.pathloss_exp)
    snr_peak = (
        chan.tx_power * chan.gain_tx_boost * chan.gain_rx
        * constants.d_min_km ** (-chan.pathloss_exp) / chan.noise_power
    )
    return (2.0 * chan.gain_tx_boost * a / m + (4.0 * fading.variance / m) * snr_peak) / math.log(2.0)


def bound_pcov_thinned(
    constants: BlockConstants,
    chan: ChannelParams,
    fading: FadingModel,
    tau_linear: float,
    n_o: int,
    n_s: int,
    q: float,
) -> float:
    """Coverage upper bound under independent thinning with activity q:
    4 E[H^2]/(q m) + (2 g_t / tau) A/(q m), clamped to [0, 1]."""
    if not (0.0 < q <= 1.0):
        raise BoundPreconditionError("q must lie in (0, 1]")
    m = _require_block(constants, n_o, n_s)
    a = a_geom(constants, chan.pathloss_exp)
    raw = 4.0 * fading.second_moment / (q * m) + (2.0 * chan.gain_tx_boost / tau_linear) * a / (q * m)
    return min(1.0, raw)


def k_thin(
    constants: BlockConstants,
    chan: ChannelParams,
    fading: FadingModel,
    tau_linear: float,
) -> float:
    """Thinning collapse constant: coverage <= K_thin / (q N) once the
    certificate applies and N >= 4/beta."""
    a = a_geom(constants, chan.pathloss_exp)
    return (
        8.0 * fading.second_moment / constants.beta
        + (4.0 * chan.gain_tx_boost / (constants.beta * tau_linear)) * a
    )


def required_qn(
    constants: BlockConstants,
    chan: ChannelParams,
    fading: FadingModel,
    tau_linear: float,
    epsilon: float,
) -> float:
    """Dimensioning rule: q*N >= K_thin/epsilon forces coverage <= epsilon."""
    if not (0.0 < epsilon < 1.0):
        raise ValueError("epsilon must lie in (0, 1)")
    return k_thin(constants, chan, fading, tau_linear) / epsilon


def c_h(fading: FadingModel) -> float:
    """Fading constant 4 + 64 Var(H) in the mean-SINR decay bound."""
    return 4.0 + 64.0 * fading.variance


def k_sinr(constants: BlockConstants, chan: ChannelParams, fading: FadingModel) -> float:
    """Mean-SINR decay constant: E[SINR] <= K_SINR / N for all large N."""
    return (2.0 * chan.gain_tx_boost / constants.beta) * a_geom(constants, chan.pathloss_exp) * c_h(fading)


def k_erg(constants: BlockConstants, chan: ChannelParams, fading: FadingModel) -> float:
    """Normalizer for the rate scaling check: with E[H^2] in place of Var(H)
    the rate bound holds under thinning as well, giving
    C_erg <= K_erg / (q N) once N >= 4/beta."""
    a = a_geom(constants, chan.pathloss_exp)
    snr_peak = (
        chan.tx_power * chan.gain_tx_boost * chan.gain_rx
        * constants.d_min_km ** (-chan.pathloss_exp) / chan.noise_power
    )
    return (2.0 / (constants.beta * math.log(2.0))) * (
        2.0 * chan.gain_tx_boost * a + 4.0 * fading.second_moment * snr_peak
    )


def sinr_decay_threshold(constants: BlockConstants, fading: FadingModel) -> tuple[float, bool]:
    """(N threshold for the mean-SINR decay bound, heuristic flag).

    Uses max(4/beta, 8/(beta*kappa)) with kappa from the fading small-ball
    exponent; deterministic fading has none, so kappa = 1 is assumed and
    the flag marks the threshold as heuristic.
    """
    sb = fading.small_ball()
    heuristic = sb is None
    kappa = 1.0 if heuristic else sb[1]
    return max(4.0 / constants.beta, 8.0 / (constants.beta * kappa)), heuristic


@dataclass(frozen=True)
class BoundReport:
    """All closed-form constants for one constellation size (and one q)."""

    n_o: int
    n_s: int
    q: float
    m: int
    a_geom: float
    pcov_bound: float
    cerg_bound_bits: float
    pcov_thinned_bound: float
    k_thin: float
    k_sinr: float
    c_h: float


def bound_report(
    constants: BlockConstants,
    chan: ChannelParams,
    fading: FadingModel,
    tau_linear: float,
    n_o: int,
    n_s: int,
    q: float = 1.0,
) -> BoundReport:
    m = _require_block(constants, n_o, n_s)
    return BoundReport(
        n_o=n_o,
        n_s=n_s,
        q=q,
        m=m,
        a_geom=a_geom(constants, chan.pathloss_exp),
        pcov_bound=bound_pcov(constants, chan, fading, tau_linear, n_o, n_s),
        cerg_bound_bits=bound_cerg(constants, chan, fading, n_o, n_s),
        pcov_thinned_bound=bound_pcov_thinned(constants, chan, fading, tau_linear, n_o, n_s, q),
        k_thin=k_thin(constants, chan, fading, tau_linear),
        k_sinr=k_sinr(constants, chan, fading),
        c_h=c_h(fading),
    )


# ---------------------------------------------------------------------------
# Finite-search mean-SINR optimizer
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OptimizerEntry:
    n_o: int
    n_s: int
    n_total: int
    mean_sinr: float
    ci_lo: float
    ci_hi: float
    drops: int


@dataclass(frozen=True)
class OptimizerResult:
    n_o_star: int
    n_s_star: int
    j_star: float
    j_star_ci: tuple[float, float]
    table: tuple[OptimizerEntry, ...]
    j_ref: float
    j_ref_ci: tuple[float, float]
    k_sinr_value: float
    decay_threshold: float
    n_max_uncapped: float
    n_max: int
    cap_binding: bool
    smallball_heuristic: bool


def _mean_sinr_point(config, constants: BlockConstants, chan, fading, n_o: int, n_s: int, drops: int):
    """Monte Carlo estimate of E[SINR] under full reuse at one size."""
    from .montecarlo import Z_95  # local import to avoid a module cycle

    policy = ActivityPolicy.full_reuse()
    params = constants.walker(n_o, n_s)
    user = constants.user()
    kind_code, param_code = policy.stream_key()
    vals = np.empty(drops)
    for k in range(drops):
        rng = drop_rng(config.master_seed, n_o, n_s, kind_code, param_code, k)
        vals[k] = evaluate_drop(params, user, chan, fading, policy, rng).sinr
    mean = float(vals.mean())
    half = Z_95 * float(vals.std(ddof=1)) / math.sqrt(drops) if drops > 1 else 0.0
    return mean, (mean - half, mean + half)


def optimize_mean_sinr(
    config,
    constants: BlockConstants,
    chan: ChannelParams,
    fading: FadingModel,
    n_max_cap: int = 40_000,
) -> OptimizerResult:
    """Finite search for the mean-SINR maximizer.

    Estimates the reference value at (n0, n0), derives the search ceiling
    N_max = max(decay threshold, ceil(K_SINR / J_ref)) capped at n_max_cap,
    enumerates every integer pair with min(N_o, N_s) >= n0 and product
    <= N_max, and Monte Carlo estimates the objective at each.  A binding
    cap is reported, never silently absorbed.
    """
    drops = config.base_drops
    n0 = constants.n0
    j_ref, j_ref_ci = _mean_sinr_point(config, constants, chan, fading, n0, n0, drops)
    if not j_ref > 0.0:
        raise CertificateError("reference mean SINR is zero; geometry yields no visible satellites")

    k_val = k_sinr(constants, chan, fading)
    threshold, heuristic = sinr_decay_threshold(constants, fading)
    n_max_uncapped = max(threshold, math.ceil(k_val / j_ref))
    n_max = int(min(n_max_uncapped, n_max_cap))
    cap_binding = n_max_uncapped > n_max_cap

    pairs = [
        (a, b)
        for a in range(n0, max(n0, n_max // n0) + 1)
        for b in range(n0, max(n0, n_max // a) + 1)
        if a * b <= n_max
    ]
    if not pairs:
        pairs = [(n0, n0)]

    table = []
    for a, b in pairs:
        if (a, b) == (n0, n0):
            mean, ci = j_ref, j_ref_ci
        else:
            mean, ci = _mean_sinr_point(config, constants, chan, fading, a, b, drops)
        table.append(OptimizerEntry(a, b, a * b, mean, ci[0], ci[1], drops))

    best = max(table, key=lambda e: (e.mean_sinr, -e.n_total, -e.n_o))
    return OptimizerResult(
        n_o_star=best.n_o,
        n_s_star=best.n_s,
        j_star=best.mean_sinr,
        j_star_ci=(best.ci_lo, best.ci_hi),
        table=tuple(table),
        j_ref=j_ref,
        j_ref_ci=j_ref_ci,
        k_sinr_value=k_val,
        decay_threshold=threshold,
        n_max_uncapped=float(n_max_uncapped),
        n_max=n_max,
        cap_binding=cap_binding,
        smallball_heuristic=heuristic,
    )
