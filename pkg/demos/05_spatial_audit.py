# %% [markdown]
# # Spatial audit of a full trial
#
# The timeline check only compares checkpoint times. Here every plan is flown
# as a 3-D trajectory through the leveled node geometry and all co-airborne
# pairs are compared on a common time grid.

# %%
import math

from uavnet.audit import audit_plans
from uavnet.geometry import SeparationParams, build_airspaces, default_dt, max_turn_angle
from uavnet.network import build_example_unet
from uavnet.simulator import SimConfig, run_trial, trial_rng

net = build_example_unet()
cfg = SimConfig(p_a=0.5, T_min=5.0)
trial = run_trial(cfg, net, trial_rng(0, 0))

# the sharpest realized corner sets d_min; d_sep = 5.5 m keeps T_min below 5 s
probe = build_airspaces(net, SeparationParams(5.5, 0.0, cfg.V))
phi = max(max_turn_angle(a) for a in probe.values())
params = SeparationParams(5.5, phi, cfg.V)
print(f"phi* {math.degrees(phi):.1f} deg, d_min {params.d_min:.2f} m, T_min {params.T_min:.2f} s")

# %%
result = audit_plans(trial.plans, build_airspaces(net, params), params.d_sep, default_dt(params))
print(f"{result.samples} samples, closest pair {result.min_distance:.2f} m, "
      f"{len(result.violations)} violations")
