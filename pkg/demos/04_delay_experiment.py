# %% [markdown]
# # Delay experiment
#
# Requests arrive once per second from a Bernoulli redraw loop, between
# random terminal pairs on the 42-node network, until 1000 UAVs are
# scheduled. Trial `j` uses the same random stream for every setting.

# %%
from uavnet.simulator import SimConfig, run_experiment

p_values = [0.1, 0.3, 0.5, 0.7, 0.9]
report = run_experiment(SimConfig(n_uav=1000, trials=7), p_values, [5.0, 2.0], jobs=4)
print(report.summary_csv())

# %%
slow, fast = report.mean_max_delay(5.0, 0.5), report.mean_max_delay(2.0, 0.5)
print(f"p_a = 0.5: {slow:.1f} s -> {fast:.1f} s ({100 * (1 - fast / slow):.1f}% lower)")
