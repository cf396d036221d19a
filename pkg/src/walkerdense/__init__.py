"""Walker LEO downlink densification simulator and converse-bound toolkit.

Simulates SINR coverage, spectral efficiency, interference growth, and
serving distance for Walker constellations sampled under the invariant
phase measure, and certifies the explicit finite-N collapse bounds
(annulus-block constants, coverage/rate converses, reuse scaling law,
mean-SINR decay) against the Monte Carlo estimates.
"""

__version__ = "0.1.0"

from .channel import ActivityPolicy, ChannelParams, FadingModel, calibrate_noise
from .geometry import (
    DegenerateLatitudeError,
    UserPosition,
    WalkerParams,
    horizon_distance,
    is_visible,
    snapshot_positions,
    walker_position,
)
from .links import DropResult, evaluate_drop, nearest_visible
from .phases import FlowParams, PhaseState, advance_phase, drop_rng, sample_phase
