# %% [markdown]
# # De-confliction geometry at a node
#
# Around each intersection a boundary circle of radius `d_star` marks where
# UAVs leave the street lanes. Each transition through the node climbs to a
# level reserved for its incoming street, crosses above the node and descends
# at the exit point.

# %%
import math

import numpy as np

from uavnet.geometry import (SeparationParams, build_node_airspace, check_network_geometry,
                             max_turn_angle, min_turn_spacing, transition_path)
from uavnet.network import build_snet1

phi = 3 * math.pi / 5
for d_sep in (6.0, 10.0, 14.0):
    print(f"d_sep {d_sep:5.1f} m -> d_min {min_turn_spacing(d_sep, phi):6.2f} m")

params = SeparationParams.from_spacing(20.0, phi, 4.0)
print(f"d_sep {params.d_sep:.3f} m, T_min {params.T_min:.2f} s")

# %%
snet = build_snet1()
air = build_node_airspace(snet, 9, params, d_star=45.0)
print("intersection points:", air.n_points, " min spacing", round(air.min_spacing(), 2), "m")
for e in air.level_order:
    print(f"  level {air.level_number(e)} for {e}: z = {air.levels[e]:.1f} m")

# %%
path = transition_path(air, (8, 9), (9, 5))
print(np.round(path.waypoints, 2))
print("length", round(path.length, 1), "m")

# %% [markdown]
# The lane offset makes the sharpest corner in the grid embedding wider than
# the nominal 3*pi/5, which is worth knowing before picking `d_sep`.

# %%
print("max turn at node 4:", round(math.degrees(max_turn_angle(build_node_airspace(snet, 4, params))), 1))
for r in check_network_geometry(snet, SeparationParams(14.0, phi, 4.0), 45.0):
    if not r.ok:
        print(r.message)
