"""Tour of the Walker constellation geometry.

Places a 20x20 shell at 550 km / 53 deg inclination, samples a phase state,
and walks through the map, visibility, and distance machinery.
"""

import numpy as np

from walkerdense import UserPosition, WalkerParams, horizon_distance, walker_position
from walkerdense.geometry import snapshot_link_geometry, snapshot_positions
from walkerdense.phases import drop_rng, sample_phase

params = WalkerParams(
    n_orbits=20,
    n_sats_per_orbit=20,
    orbit_radius_km=6371.0 + 550.0,
    earth_radius_km=6371.0,
    inclination_rad=np.radians(53.0),
)
user = UserPosition(latitude_rad=0.0, earth_radius_km=6371.0)

print("single satellite positions from the phase map:")
for theta, omega in ((0.0, 0.0), (0.0, np.pi / 2), (np.pi / 4, np.pi / 3)):
    x = walker_position(params, theta, omega)
    print(f"  theta={theta:.3f} omega={omega:.3f} -> {np.round(x, 1)}  |x|={np.linalg.norm(x):.1f} km")

phase = sample_phase(drop_rng(2024, 0), params)
positions = snapshot_positions(params, phase.theta_bar, phase.omega_bar)
d, vis = snapshot_link_geometry(params, user, phase.theta_bar, phase.omega_bar)

print(f"\nsnapshot at phase ({phase.theta_bar:.4f}, {phase.omega_bar:.4f}):")
print(f"  satellites: {len(positions)}")
print(f"  visible from the equator user: {vis.sum()}")
print(f"  nearest visible distance: {d[vis].min():.1f} km (floor is r - e = 550 km)")
print(f"  farthest visible distance: {d[vis].max():.1f} km")
print(f"  horizon (rim) distance: {horizon_distance(params):.2f} km")
print("\nevery visible satellite sits between the floor and the rim, by construction.")
