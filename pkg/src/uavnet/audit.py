"""Spatial audit of committed schedules.

Each committed plan is turned into a timed 3-D trajectory: lanes between
nodes, and the leveled transition polyline inside every intermediate node.
The UAV passes each checkpoint exactly at its reserved time and moves at
uniform speed between consecutive checkpoints. All airborne UAVs are then
sampled on a common time grid and every pair closer than ``d_sep`` (less
the sampling bound) is reported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .geometry import NodeAirspace, Trajectory, transition_path
from .scheduler import FlightPlan


def _timed_polyline(points, t0, t1):
    pts = np.asarray(points, dtype=float)
    steps = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    frac = np.concatenate([[0.0], np.cumsum(steps)]) / steps.sum()
    return pts, t0 + frac * (t1 - t0)


def plan_trajectory(plan: FlightPlan, airspaces: dict[int, NodeAirspace],
                    mode: str = "leveled") -> Trajectory:
    arrivals = plan.arrival_times()
    pos = lambda cp: airspaces[cp.node].points[cp.edge]
    waypoints = [pos(arrivals[0][0])]
    times = [arrivals[0][1]]
    # arrivals alternate: departure, then (entry, exit) per intermediate node, then final entry
    i = 1
    while i < len(arrivals):
        entry, t_in = arrivals[i]
        waypoints.append(pos(entry))
        times.append(t_in)
        if i + 1 == len(arrivals):
            break
        exit_, t_out = arrivals[i + 1]
        path = transition_path(airspaces[entry.node], entry.edge, exit_.edge, mode)
        pts, ts = _timed_polyline(path.waypoints, t_in, t_out)
        waypoints.extend(pts[1:])
        times.extend(ts[1:])
        i += 2
    return Trajectory(np.array(waypoints), np.array(times))


@dataclass
class AuditResult:
    d_sep: float
    dt: float
    bound: float
    min_distance: float
    samples: int
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def audit_plans(plans, airspaces: dict[int, NodeAirspace], d_sep: float, dt: float,
                mode: str = "leveled") -> AuditResult:
    """Sample every pair of co-airborne UAVs; flag distances below ``d_sep - bound``."""
    trajs = [plan_trajectory(p, airspaces, mode) for p in plans]
    ids = [p.request.k for p in plans]
    if len(trajs) < 2:
        return AuditResult(d_sep, dt, 0.0, math.inf, 0)
    t0 = min(tr.start for tr in trajs)
    chunks_idx, chunks_uav, chunks_pos = [], [], []
    for u, tr in enumerate(trajs):
        i0 = math.ceil((tr.start - t0) / dt)
        i1 = math.floor((tr.end - t0) / dt)
        if i1 < i0:
            continue
        idx = np.arange(i0, i1 + 1)
        chunks_idx.append(idx)
        chunks_uav.append(np.full(len(idx), u))
        chunks_pos.append(tr.positions(t0 + idx * dt))
    idx = np.concatenate(chunks_idx)
    uav = np.concatenate(chunks_uav)
    pos = np.concatenate(chunks_pos)
    order = np.argsort(idx, kind="stable")
    idx, uav, pos = idx[order], uav[order], pos[order]

    bound = max(tr.max_speed for tr in trajs) * dt
    limit = d_sep - bound
    best = math.inf
    violations = []
    steps, starts = np.unique(idx, return_index=True)
    ends = np.append(starts[1:], len(idx))
    for step, a, b in zip(steps, starts, ends):
        if b - a < 2:
            continue
        pts = pos[a:b]
        tree = cKDTree(pts)
        dist, nn = tree.query(pts, k=2)
        best = min(best, float(dist[:, 1].min()))
        if dist[:, 1].min() < limit:
            for i, j in sorted(tree.query_pairs(limit)):
                violations.append((ids[uav[a + i]], ids[uav[a + j]], float(t0 + step * dt),
                                   float(np.linalg.norm(pts[i] - pts[j]))))
    return AuditResult(d_sep, dt, bound, best, len(idx), violations)
