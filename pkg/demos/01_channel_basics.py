"""
Air-to-ground channel walkthrough
=================================

How the link budget between a hovering base station and a ground user
changes with horizontal distance, and why altitude buys line of sight.
"""

import math

import numpy as np

from absim.channel import ChannelParams, effective_path_loss_db, link_geometry, los_probability
from absim.scenario import ScenarioConfig

cfg = ScenarioConfig()
p = ChannelParams.from_config(cfg)
uav = (0.0, 0.0, cfg.altitude_m)

# reference loss at 1 m comes from the carrier frequency alone
print(f"carrier {cfg.carrier_hz / 1e9:.1f} GHz -> reference loss "
      f"{10 * math.log10(p.k0):.2f} dB at 1 m")

# a user straight below the platform sees a 90 degree elevation angle;
# the angle falls as the user walks away
print("\nground distance vs elevation angle and LoS probability (h = 100 m)")
print(f"{'ground m':>9} {'slant m':>9} {'elev deg':>9} {'P(LoS)':>7}")
for ground in (0.0, 100.0, 250.0, 386.0, 600.0, 900.0, 1146.0, 1500.0):
    geo = link_geometry(uav, (ground, 0.0))
    print(f"{ground:9.0f} {geo.distance_m:9.1f} {geo.theta_deg:9.2f} "
          f"{los_probability(geo.theta_deg, p):7.3f}")

# the probability is exactly 1 above one angle threshold and exactly 0
# below another, so coverage has a plateau and a cliff
lo = cfg.altitude_m / math.sin(math.radians(cfg.plos_xi_deg + 1.0 / cfg.plos_b1))
hi = cfg.altitude_m / math.sin(math.radians(cfg.plos_xi_deg))
print(f"\npure LoS out to a slant range of {lo:.0f} m,"
      f" pure NLoS beyond {hi:.0f} m")

# path loss picks up the blended excess on top of free space
print("\npath loss profile")
for ground in (50.0, 200.0, 386.0, 500.0, 800.0, 1146.0, 1500.0):
    geo = link_geometry(uav, (ground, 0.0))
    l_db = effective_path_loss_db(geo.distance_m, geo.theta_deg, p)
    bar = "#" * int((l_db - 75.0) / 1.5)
    print(f"{ground:7.0f} m  {l_db:7.2f} dB  {bar}")

# the jump past the plateau is the switch from the 1 dB LoS excess to the
# 20 dB NLoS excess; distance alone only contributes alpha decades
near = link_geometry(uav, (386.0, 0.0))
far = link_geometry(uav, (1146.0, 0.0))
fspl = 10 * p.alpha * math.log10(far.distance_m / near.distance_m)
total = (effective_path_loss_db(far.distance_m, far.theta_deg, p)
         - effective_path_loss_db(near.distance_m, near.theta_deg, p))
print(f"\n386 m -> 1146 m ground: +{total:.1f} dB total, "
      f"of which {fspl:.1f} dB is distance and {total - fspl:.1f} dB is lost LoS")
