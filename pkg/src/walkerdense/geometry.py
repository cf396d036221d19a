"""Exact Walker-constellation geometry.

Phase-torus-to-sphere map, snapshot generation, user placement, horizon
visibility, and user-satellite distances.  All angles in radians, all
lengths in kilometers.  Every function is pure.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * np.pi


class DegenerateLatitudeError(ValueError):
    """Raised when no phase on the diagnostic grid yields a visible satellite."""


def wrap_angle(x):
    """Reduce angle(s) to [0, 2*pi) with a floored modulo."""
    y = np.mod(x, TWO_PI)
    # np.mod can round up to the modulus for tiny negative inputs
    return np.where(y >= TWO_PI, 0.0, y) if np.ndim(y) else (y if y < TWO_PI else 0.0)


@dataclass(frozen=True)
class WalkerParams:
    """Walker constellation design: N_o orbits x N_s satellites per orbit
    on the radius-r sphere at common inclination, above an Earth of radius e."""

    n_orbits: int
    n_sats_per_orbit: int
    orbit_radius_km: float
    earth_radius_km: float
    inclination_rad: float

    def __post_init__(self):
        if self.n_orbits < 1 or self.n_sats_per_orbit < 1:
            raise ValueError("constellation needs at least one orbit and one satellite")
        if not self.orbit_radius_km > self.earth_radius_km:
            raise ValueError("orbit radius must exceed Earth radius")
        if not (0.0 <= self.inclination_rad <= np.pi):
            raise ValueError("inclination must lie in [0, pi]")

    @property
    def n_total(self) -> int:
        return self.n_orbits * self.n_sats_per_orbit

    @property
    def cell_widths(self) -> tuple[float, float]:
        """Side lengths of the phase cell [0, 2pi/N_o) x [0, 2pi/N_s)."""
        return TWO_PI / self.n_orbits, TWO_PI / self.n_sats_per_orbit


@dataclass(frozen=True)
class UserPosition:
    """Ground user at a fixed latitude, longitude 0, in the rotating frame."""

    latitude_rad: float
    earth_radius_km: float

    def __post_init__(self):
        if not (-np.pi / 2 <= self.latitude_rad <= np.pi / 2):
            raise ValueError("latitude must lie in [-pi/2, pi/2]")

    @property
    def cartesian_km(self) -> np.ndarray:
        e = self.earth_radius_km
        return np.array([e * np.cos(self.latitude_rad), 0.0, e * np.sin(self.latitude_rad)])


def walker_position(params: WalkerParams, theta: float, omega: float) -> np.ndarray:
    """Map a phase pair (theta, omega) to the satellite position on the
    radius-r sphere.

    Closed form: with hat_theta = atan2(sin(omega) cos(incl), cos(omega)) and
    radial factor rho = sqrt(cos^2(omega) + sin^2(omega) cos^2(incl)),

        x = r rho cos(hat_theta + theta)
        y = r rho sin(hat_theta + theta)
        z = r sin(omega) sin(incl)
    """
    theta = wrap_angle(theta)
    omega = wrap_angle(omega)
    r = params.orbit_radius_km
    phi = params.inclination_rad
    so, co = np.sin(omega), np.cos(omega)
    rho = np.sqrt(co * co + so * so * np.cos(phi) ** 2)
    hat_theta = np.arctan2(so * np.cos(phi), co)
    lon = hat_theta + theta
    return np.array([r * rho * np.cos(lon), r * rho * np.sin(lon), r * so * np.sin(phi)])


def snapshot_phases(params: WalkerParams, theta_bar: float, omega_bar: float):
    """Per-orbit and per-slot phase angles of the snapshot, each in [0, 2pi).

    Orbit i carries theta_i = 2pi i/N_o + theta_bar, slot j carries
    omega_j = 2pi j/N_s + omega_bar.
    """
    i = np.arange(params.n_orbits)
    j = np.arange(params.n_sats_per_orbit)
    thetas = wrap_angle(TWO_PI * i / params.n_orbits + theta_bar)
    omegas = wrap_angle(TWO_PI * j / params.n_sats_per_orbit + omega_bar)
    return thetas, omegas


def snapshot_positions(params: WalkerParams, theta_bar: float, omega_bar: float) -> np.ndarray:
    """All N_o*N_s satellite positions for one phase state, shape (N, 3).

    Row k corresponds to orbit k // N_s, slot k % N_s (lexicographic order).
    """
    thetas, omegas = snapshot_phases(params, theta_bar, omega_bar)
    r = params.orbit_radius_km
    phi = params.inclination_rad
    so, co = np.sin(omegas), np.cos(omegas)
    rho = np.sqrt(co * co + so * so * np.cos(phi) ** 2)
    hat = np.arctan2(so * np.cos(phi), co)
    z = r * so * np.sin(phi)
    # lon[i, j] = hat_j + theta_i, expanded via angle addition
    cos_lon = np.cos(hat)[None, :] * np.cos(thetas)[:, None] - np.sin(hat)[None, :] * np.sin(thetas)[:, None]
    sin_lon = np.sin(hat)[None, :] * np.cos(thetas)[:, None] + np.cos(hat)[None, :] * np.sin(thetas)[:, None]
    x = r * rho[None, :] * cos_lon
    y = r * rho[None, :] * sin_lon
    out = np.empty((params.n_total, 3))
    out[:, 0] = x.ravel()
    out[:, 1] = y.ravel()
    out[:, 2] = np.broadcast_to(z[None, :], x.shape).ravel()
    return out


def phase_grid_geometry(params: WalkerParams, user: UserPosition, thetas, omegas):
    """Distances and visibility for the outer product of phase angles.

    Works for both a full snapshot (thetas = orbit phases, omegas = slot
    phases) and an estimation grid over the torus.  Returns
    (distance_km, visible) with shape (len(thetas), len(omegas)).

    Uses d^2 = r^2 + e^2 - 2 r e cos(gamma) with cos(gamma) = X.u/(r e),
    and the horizon condition cos(gamma) >= e/r (non-strict).
    """
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
    r = params.orbit_radius_km
    e = params.earth_radius_km
    phi = params.inclination_rad
    ux = np.cos(user.latitude_rad)  # user direction, unit norm
    uz = np.sin(user.latitude_rad)

    so, co = np.sin(omegas), np.cos(omegas)
    rho = np.sqrt(co * co + so * so * np.cos(phi) ** 2)
    hat = np.arctan2(so * np.cos(phi), co)
    zdir = so * np.sin(phi)  # z / r per slot
    cos_lon = np.cos(hat)[None, :] * np.cos(thetas)[:, None] - np.sin(hat)[None, :] * np.sin(thetas)[:, None]
    # cos(gamma) = (x ux + z uz)/r with x = r rho cos_lon, z = r zdir
    cos_gamma = rho[None, :] * cos_lon * ux + zdir[None, :] * uz
    d_sq = r * r + e * e - 2.0 * r * e * cos_gamma
    distance = np.sqrt(np.maximum(d_sq, 0.0))
    visible = cos_gamma >= e / r
    return distance, visible


def snapshot_link_geometry(params: WalkerParams, user: UserPosition, theta_bar: float, omega_bar: float):
    """Flat (N,) distance and visibility arrays for one snapshot.

    Index k maps to orbit k // N_s, slot k % N_s, matching snapshot_positions.
    """
    thetas, omegas = snapshot_phases(params, theta_bar, omega_bar)
    d, vis = phase_grid_geometry(params, user, thetas, omegas)
    return d.ravel(), vis.ravel()


def is_visible(sat: np.ndarray, user: UserPosition, params: WalkerParams) -> bool:
    """Horizon test: X.u/(|X||u|) >= e/r, boundary counts as visible."""
    sat = np.asarray(sat, dtype=float)
    u = user.cartesian_km
    cos_gamma = float(sat @ u) / (float(np.linalg.norm(sat)) * float(np.linalg.norm(u)))
    return cos_gamma >= params.earth_radius_km / params.orbit_radius_km


def distance(sat: np.ndarray, user: UserPosition) -> float:
    """Euclidean user-satellite distance in km."""
    return float(np.linalg.norm(np.asarray(sat, dtype=float) - user.cartesian_km))


def horizon_distance(params: WalkerParams) -> float:
    """Rim distance sqrt(r^2 - e^2): the largest possible visible distance."""
    r, e = params.orbit_radius_km, params.earth_radius_km
    if not r > e:
        raise ValueError("horizon distance requires r > e")
    return float(np.sqrt(r * r - e * e))


def geometry_hash(
    orbit_radius_km: float,
    earth_radius_km: float,
    inclination_rad: float,
    user_latitude_rad: float,
) -> str:
    """Short stable digest of the geometric scenario, used to pair artifacts."""
    key = "|".join(
        f"{v:.12g}" for v in (orbit_radius_km, earth_radius_km, inclination_rad, user_latitude_rad)
    )
    return hashlib.sha256(key.encode()).hexdigest()[:16]


def assert_latitude_nondegenerate(params: WalkerParams, user: UserPosition, grid: int = 64) -> None:
    """Abort if no phase on a grid x grid torus lattice maps to a visible satellite.

    The visible cap being reachable by the map does not depend on (N_o, N_s),
    so a coarse grid over [0, 2pi)^2 suffices as a diagnostic.
    """
    pts = (np.arange(grid) + 0.5) * (TWO_PI / grid)
    _, vis = phase_grid_geometry(params, user, pts, pts)
    if not bool(vis.any()):
        raise DegenerateLatitudeError(
            f"no visible satellite phase at latitude {np.degrees(user.latitude_rad):.3f} deg "
            f"(inclination {np.degrees(params.inclination_rad):.3f} deg): visible cap unreachable"
        )
