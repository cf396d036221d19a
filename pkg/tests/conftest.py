import numpy as np
import pytest

from walkerdense.channel import ChannelParams
from walkerdense.geometry import UserPosition, WalkerParams
from walkerdense.montecarlo import table_one_channel

EARTH_KM = 6371.0
ORBIT_KM = 6921.0
INCLINATION = np.radians(53.0)


def baseline_walker(n_o: int = 10, n_s: int = 10) -> WalkerParams:
    return WalkerParams(n_o, n_s, ORBIT_KM, EARTH_KM, INCLINATION)


def equator_user() -> UserPosition:
    return UserPosition(0.0, EARTH_KM)


@pytest.fixture(scope="session")
def baseline_channel() -> ChannelParams:
    return table_one_channel()


def ks_uniform(samples, width: float) -> float:
    """Kolmogorov-Smirnov distance between samples and Unif[0, width)."""
    x = np.sort(np.asarray(samples, dtype=float)) / width
    n = len(x)
    hi = np.arange(1, n + 1) / n
    lo = np.arange(0, n) / n
    return float(max(np.max(hi - x), np.max(x - lo)))
