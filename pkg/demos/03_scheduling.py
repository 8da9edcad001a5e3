# %% [markdown]
# # First-come-first-served scheduling
#
# Each request gets the shortest route and then the earliest start time at
# which every checkpoint on that route is at least `T_min` from all earlier
# reservations.

# %%
from uavnet.network import build_snet1
from uavnet.scheduler import (ScheduleBook, Scheduler, UavRequest, plans_to_csv,
                              verify_conflict_free)

snet = build_snet1()
book = ScheduleBook(T_min=5.0)
sched = Scheduler(snet, book, V=4.0, d_star=45.0)

requests = [UavRequest(1, 5, 10, 0.0), UavRequest(2, 8, 10, 2.0), UavRequest(3, 5, 10, 0.0),
            UavRequest(4, 1, 12, 1.0)]
plans = [sched.schedule(r) for r in requests]
print(plans_to_csv(plans))

# %% [markdown]
# UAVs 1 and 2 merge on the exit of node 9 toward 10; the second is pushed
# back until the gap there is exactly `T_min`.

# %%
for t, k in book.timeline(plans[0].arrivals[2][0]):
    print(f"  t = {t:7.3f} s  UAV {k}")
print(verify_conflict_free(book))
