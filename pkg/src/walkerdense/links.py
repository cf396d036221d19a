"""Per-drop downlink evaluation: nearest-visible association, signal,
aggregate interference under an activity policy, and SINR.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ActivityPolicy, ChannelParams, FadingModel
from .geometry import UserPosition, WalkerParams, snapshot_link_geometry
from .phases import sample_phase


@dataclass(frozen=True)
class DropResult:
    """One Monte Carlo realization.  serving_distance_km is NaN when no
    satellite is visible; sinr is then 0 and the drop counts as outage."""

    serving_distance_km: float
    signal: float
    interference: float
    sinr: float
    n_visible: int
    n_active_interferers: int

    @property
    def no_visible(self) -> bool:
        return self.n_visible == 0


def nearest_visible(distances: np.ndarray, visible: np.ndarray):
    """Index and distance of the nearest visible satellite, or None.

    Ties break toward the lowest flat index, i.e. lexicographic
    (orbit_index, slot_index).
    """
    if not visible.any():
        return None
    masked = np.where(visible, distances, np.inf)
    idx = int(np.argmin(masked))
    return idx, float(distances[idx])


def evaluate_drop(
    params: WalkerParams,
    user: UserPosition,
    chan: ChannelParams,
    fading: FadingModel,
    policy: ActivityPolicy,
    rng: np.random.Generator,
) -> DropResult:
    """Sample a phase state, build the snapshot, associate, and assemble
    signal, interference, and SINR.

    Random-stream consumption order is fixed: phase (2 draws), fading for
    all N satellites in flat index order, then activity uniforms for the
    visible non-serving satellites.  Invisible satellites contribute no
    interference; the serving satellite is always active.
    """
    n = params.n_total
    phase = sample_phase(rng, params)
    d, vis = snapshot_link_geometry(params, user, phase.theta_bar, phase.omega_bar)
    h = fading.sample(rng, n)

    hit = nearest_visible(d, vis)
    if hit is None:
        return DropResult(
            serving_distance_km=float("nan"),
            signal=0.0,
            interference=0.0,
            sinr=0.0,
            n_visible=0,
            n_active_interferers=0,
        )
    serving, d0 = hit

    interferer = vis.copy()
    interferer[serving] = False
    n_cand = int(interferer.sum())
    q = policy.effective_q(n)
    active = rng.random(n_cand) < q

    g = np.where(d <= chan.gain_cutoff_km, chan.gain_tx_boost * chan.gain_rx, chan.gain_rx)
    power = chan.tx_power * g * h * d ** (-chan.pathloss_exp)
    signal = float(power[serving])
    interference = float(power[interferer][active].sum())
    sinr = signal / (interference + chan.noise_power)
    return DropResult(
        serving_distance_km=d0,
        signal=signal,
        interference=interference,
        sinr=sinr,
        n_visible=int(vis.sum()),
        n_active_interferers=int(active.sum()),
    )


def interference_lower_witness(
    distances: np.ndarray,
    visible: np.ndarray,
    chan: ChannelParams,
    d1_km: float,
    d2_km: float,
):
    """Count visible non-serving satellites with distance in [d1, d2] and
    the deterministic unit-fading interference floor they imply.

    Each such satellite contributes at least p * g_r * d2^(-alpha), so the
    floor is count times that constant.
    """
    hit = nearest_visible(distances, visible)
    in_annulus = visible & (distances >= d1_km) & (distances <= d2_km)
    if hit is not None:
        in_annulus = in_annulus.copy()
        in_annulus[hit[0]] = False
    count = int(in_annulus.sum())
    floor = count * chan.tx_power * chan.gain_rx * d2_km ** (-chan.pathloss_exp)
    return count, floor
