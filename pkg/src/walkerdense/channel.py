"""Link-level propagation: two-level antenna gain, power-law path loss,
unit-mean fading models, noise calibration, and per-resource-block activity
policies.  Linear units everywhere; dB only at interface boundaries.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ChannelParams:
    """Downlink propagation parameters, all in linear units.

    Gain model: G(d) = gain_tx_boost * gain_rx for d <= gain_cutoff_km
    (main lobe), gain_rx beyond (side lobe).
    """

    tx_power: float = 1.0
    pathloss_exp: float = 2.5
    gain_rx: float = 1.0
    gain_tx_boost: float = 10.0
    gain_cutoff_km: float = 1000.0
    noise_power: float = 1.0

    def __post_init__(self):
        if self.tx_power <= 0.0 or self.pathloss_exp <= 0.0:
            raise ValueError("tx_power and pathloss_exp must be positive")
        if self.gain_rx <= 0.0 or self.gain_tx_boost < 1.0:
            raise ValueError("need gain_rx > 0 and gain_tx_boost >= 1")
        if self.gain_cutoff_km <= 0.0 or self.noise_power <= 0.0:
            raise ValueError("gain_cutoff_km and noise_power must be positive")


def gain(d, params: ChannelParams):
    """Two-level antenna gain; the boundary d = cutoff gets the boosted value."""
    boosted = params.gain_tx_boost * params.gain_rx
    if np.ndim(d):
        return np.where(np.asarray(d) <= params.gain_cutoff_km, boosted, params.gain_rx)
    return boosted if d <= params.gain_cutoff_km else params.gain_rx


def rx_power(d, h, params: ChannelParams):
    """Received power p * G(d) * h * d^(-alpha); d in km, h a fading value."""
    return params.tx_power * gain(d, params) * h * np.asarray(d, dtype=float) ** (-params.pathloss_exp)


def calibrate_noise(
    tx_power: float,
    gain_rx: float,
    gain_tx_boost: float,
    pathloss_exp: float,
    d_min_km: float,
    snr_db: float,
    include_boost: bool = True,
) -> float:
    """Noise power at which a unit-fading link at distance d_min achieves
    exactly snr_db.

    With the baseline parameters d_min <= gain_cutoff, so the nearest
    possible link sits in the boosted-gain region; include_boost=False
    calibrates against the side-lobe gain instead.
    """
    if d_min_km <= 0.0:
        raise ValueError("d_min_km must be positive")
    g = gain_rx * (gain_tx_boost if include_boost else 1.0)
    return tx_power * g * d_min_km ** (-pathloss_exp) * 10.0 ** (-snr_db / 10.0)


@dataclass(frozen=True)
class FadingModel:
    """Unit-mean nonnegative fading law.

    kind is one of "unit" (deterministic 1), "rayleigh" (Exp(1) power
    fading), or "nakagami" (Gamma(m, 1/m) power fading, mean exactly 1).
    """

    kind: str
    m: float = 1.0

    def __post_init__(self):
        if self.kind not in ("unit", "rayleigh", "nakagami"):
            raise ValueError(f"unknown fading kind {self.kind!r}")
        if self.kind == "nakagami" and self.m < 0.5:
            raise ValueError("nakagami shape m must be >= 0.5")

    @classmethod
    def unit(cls) -> "FadingModel":
        return cls("unit")

    @classmethod
    def rayleigh(cls) -> "FadingModel":
        return cls("rayleigh")

    @classmethod
    def nakagami(cls, m: float) -> "FadingModel":
        return cls("nakagami", m=m)

    @property
    def mean(self) -> float:
        return 1.0

    @property
    def second_moment(self) -> float:
        if self.kind == "unit":
            return 1.0
        if self.kind == "rayleigh":
            return 2.0
        return 1.0 + 1.0 / self.m  # Gamma(m, 1/m)

    @property
    def variance(self) -> float:
        return self.second_moment - 1.0

    def small_ball(self) -> tuple[float, float] | None:
        """(c_sb, kappa) with P(H <= x) <= c_sb x^kappa on (0, 1], or None.

        Deterministic fading carries no useful small-ball exponent; callers
        relying on it must treat that case as heuristic.
        """
        if self.kind == "rayleigh":
            return 1.0, 1.0  # P(H <= x) = 1 - exp(-x) <= x
        if self.kind == "nakagami":
            # P(Gamma(m, 1/m) <= x) <= (m x)^m / Gamma(m+1) <= (m x)^m
            return self.m ** self.m, self.m
        return None

    def sample(self, rng: np.random.Generator, size=None):
        if self.kind == "unit":
            return 1.0 if size is None else np.ones(size)
        if self.kind == "rayleigh":
            return rng.standard_exponential(size)
        return rng.gamma(self.m, 1.0 / self.m, size)


def draw_fading(model: FadingModel, rng: np.random.Generator, size=None):
    """Draw unit-mean fading value(s) from the model."""
    return model.sample(rng, size)


@dataclass(frozen=True)
class ActivityPolicy:
    """Per-resource-block interferer activity.

    kind "full": every interferer active.  kind "fixed": independent
    activity with constant probability q.  kind "scaling": q(N) =
    min(1, c/N), which pins q*N at large N.
    """

    kind: str
    q: float = 1.0
    c: float = 600.0

    def __post_init__(self):
        if self.kind not in ("full", "fixed", "scaling"):
            raise ValueError(f"unknown activity kind {self.kind!r}")
        if self.kind == "fixed" and not (0.0 < self.q <= 1.0):
            raise ValueError("fixed thinning needs q in (0, 1]")
        if self.kind == "scaling" and self.c <= 0.0:
            raise ValueError("scaling law needs c > 0")

    @classmethod
    def full_reuse(cls) -> "ActivityPolicy":
        return cls("full")

    @classmethod
    def fixed_thinning(cls, q: float) -> "ActivityPolicy":
        return cls("fixed", q=q)

    @classmethod
    def scaling_law(cls, c: float = 600.0) -> "ActivityPolicy":
        return cls("scaling", c=c)

    def effective_q(self, n_total: int) -> float:
        if self.kind == "full":
            return 1.0
        if self.kind == "fixed":
            return self.q
        return min(1.0, self.c / n_total)

    @property
    def label(self) -> str:
        if self.kind == "full":
            return "full"
        if self.kind == "fixed":
            return f"q{self.q:g}"
        return f"scaling{self.c:g}"

    def stream_key(self) -> tuple[int, int]:
        """Stable integer pair identifying this policy in RNG spawn keys.

        Fixed thinning at q = 1 shares the full-reuse key: the two policies
        are behaviorally identical and must yield identical drop streams.
        """
        if self.kind == "full" or (self.kind == "fixed" and self.q == 1.0):
            return 0, 0
        if self.kind == "fixed":
            return 1, round(self.q * 1_000_000)
        return 2, round(self.c * 1_000)


def draw_activity(policy: ActivityPolicy, n_total: int, rng: np.random.Generator) -> bool:
    """One Bernoulli(effective_q) activity draw for a potential interferer."""
    if n_total < 1:
        raise ValueError("n_total must be >= 1")
    return bool(rng.random() < policy.effective_q(n_total))


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


def linear_to_db(x: float) -> float:
    return 10.0 * np.log10(x)
