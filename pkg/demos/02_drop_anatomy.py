"""Anatomy of one Monte Carlo drop.

Runs a single downlink realization (phase + fading + activity) at three
constellation sizes under full reuse and under 10x thinning, printing the
signal, interference, and SINR pieces.
"""

import numpy as np

from walkerdense import ActivityPolicy, FadingModel, UserPosition, WalkerParams, evaluate_drop
from walkerdense.channel import linear_to_db
from walkerdense.montecarlo import table_one_channel
from walkerdense.phases import drop_rng

chan = table_one_channel()  # noise calibrated to 12 dB SNR at the 550 km floor
user = UserPosition(0.0, 6371.0)
fading = FadingModel.rayleigh()

print(f"noise power sigma^2 = {chan.noise_power:.4g} (linear)")
for n_side in (10, 32, 100):
    params = WalkerParams(n_side, n_side, 6921.0, 6371.0, np.radians(53.0))
    for policy in (ActivityPolicy.full_reuse(), ActivityPolicy.fixed_thinning(0.1)):
        drop = evaluate_drop(params, user, chan, fading, policy, drop_rng(7, n_side))
        print(
            f"N={n_side * n_side:>6} {policy.label:>5}: D0={drop.serving_distance_km:7.1f} km  "
            f"visible={drop.n_visible:>4} active={drop.n_active_interferers:>4}  "
            f"S={drop.signal:.3g} I={drop.interference:.3g}  "
            f"SINR={linear_to_db(drop.sinr):+.1f} dB"
        )
print("\ndensification shrinks the serving distance but multiplies the active")
print("interferer count under full reuse; thinning keeps the denominator in check.")
