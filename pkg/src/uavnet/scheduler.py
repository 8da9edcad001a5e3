"""First-come-first-served conflict-free scheduling over checkpoint timelines.

A checkpoint is the crossing of a directed edge with a node's boundary circle.
Every committed flight reserves its arrival time at each checkpoint on its
route; a new flight gets the earliest start time at or after its expected
time that keeps every reservation at least ``T_min`` apart.
"""

from __future__ import annotations

import bisect
import csv
import io
import json
from dataclasses import dataclass
from typing import NamedTuple

from .geometry import DEFAULT_D_STAR
from .network import Route, RouteNetwork, shortest_route

# Slack on the separation test; absorbs float rounding of STA = t - offset + T.
EPS = 1e-9

PLAN_COLUMNS = ("k", "L_i", "L_f", "ETA", "STA", "delay", "route")


class ConflictError(RuntimeError):
    """A plan would violate the separation of an existing reservation."""


class Checkpoint(NamedTuple):
    node: int
    edge: tuple[int, int]

    def label(self) -> str:
        return f"{self.node}:{self.edge[0]}-{self.edge[1]}"


@dataclass(frozen=True)
class UavRequest:
    k: int
    L_i: int
    L_f: int
    ETA: float

    def __post_init__(self):
        if self.L_i == self.L_f:
            raise ValueError("L_i and L_f must differ")
        if self.ETA < 0:
            raise ValueError("ETA must be non-negative")


@dataclass(frozen=True)
class FlightPlan:
    request: UavRequest
    route: Route
    STA: float
    arrivals: tuple[tuple[Checkpoint, float], ...]

    @property
    def delay(self) -> float:
        return self.STA - self.request.ETA

    def arrival_times(self):
        return [(cp, self.STA + off) for cp, off in self.arrivals]


def arrival_offsets(route: Route, net: RouteNetwork, V: float,
                    d_star: float = DEFAULT_D_STAR) -> list[tuple[Checkpoint, float]]:
    """Checkpoint offsets from STA using node-to-node distances.

    ``s`` is the distance flown from the start node and STA is the time the
    UAV is abreast of the start node. Every node contributes an exit
    checkpoint at ``(s + d_star) / V`` (the start node only this one, at
    ``d_star / V``) and every later node an entry checkpoint at
    ``(s - d_star) / V``; the destination has no exit. Placing the departure
    checkpoint at ``d_star / V`` rather than 0 keeps the first lane flown at
    the same speed as every other lane, so time gaps stay space gaps.
    """
    edges = route.edges
    out = [(Checkpoint(edges[0][0], edges[0]), d_star / V)]
    s = 0.0
    for j, e in enumerate(edges):
        s += net.edges[e].length
        node = e[1]
        out.append((Checkpoint(node, e), (s - d_star) / V))
        if j + 1 < len(edges):
            out.append((Checkpoint(node, edges[j + 1]), (s + d_star) / V))
    return out


class ScheduleBook:
    """Per-checkpoint sorted reservation timelines plus committed plans."""

    def __init__(self, T_min: float):
        if T_min < 0:
            raise ValueError("T_min must be non-negative")
        self.T_min = T_min
        self._times: dict[Checkpoint, list[float]] = {}
        self._uavs: dict[Checkpoint, list[int]] = {}
        self.plans: list[FlightPlan] = []

    def times(self, cp: Checkpoint) -> list[float]:
        return self._times.get(cp, [])

    def timeline(self, cp: Checkpoint) -> list[tuple[float, int]]:
        return list(zip(self._times.get(cp, []), self._uavs.get(cp, [])))

    @property
    def checkpoints(self):
        return sorted(self._times)

    def _reserve(self, cp, t, uav):
        times = self._times.setdefault(cp, [])
        uavs = self._uavs.setdefault(cp, [])
        i = bisect.bisect_right(times, t)
        times.insert(i, t)
        uavs.insert(i, uav)

    def conflicts(self, plan: FlightPlan) -> list[tuple[Checkpoint, int, float]]:
        found = []
        limit = self.T_min - EPS
        for cp, t in plan.arrival_times():
            times = self._times.get(cp, [])
            i = bisect.bisect_left(times, t)
            for j in (i - 1, i):
                if 0 <= j < len(times) and abs(times[j] - t) < limit:
                    found.append((cp, self._uavs[cp][j], abs(times[j] - t)))
        return found

    def commit(self, plan: FlightPlan) -> "ScheduleBook":
        clash = self.conflicts(plan)
        if clash:
            cp, other, gap = clash[0]
            raise ConflictError(
                f"UAV {plan.request.k} is {gap:.6f} s from UAV {other} at {cp.label()}")
        for cp, t in plan.arrival_times():
            self._reserve(cp, t, plan.request.k)
        self.plans.append(plan)
        return self

    def to_dict(self) -> dict:
        return {
            "T_min": self.T_min,
            "timelines": {
                cp.label(): [[t, k] for t, k in self.timeline(cp)] for cp in self.checkpoints
            },
        }


def commit(book: ScheduleBook, plan: FlightPlan) -> ScheduleBook:
    return book.commit(plan)


def earliest_sta(offsets, book: ScheduleBook, ETA: float, T_min: float | None = None) -> float:
    """Smallest STA >= ETA keeping every checkpoint arrival T_min from all reservations.

    Each reservation ``t`` on a checkpoint reached at ``offset`` forbids the open
    interval ``(t - offset - T_min, t - offset + T_min)``; the answer is the
    least point at or after ETA outside their union. A gap of exactly T_min
    is allowed.
    """
    if not offsets:
        raise ValueError("offsets must be nonempty")
    T = book.T_min if T_min is None else T_min
    forbidden = []
    for cp, off in offsets:
        times = book.times(cp)
        start = bisect.bisect_right(times, ETA + off - T)
        forbidden.extend((t - off - T, t - off + T) for t in times[start:])
    forbidden.sort()
    x = ETA
    for lo, hi in forbidden:
        if lo + EPS >= x:
            break
        if hi - EPS > x:
            x = hi
    return x


def verify_conflict_free(book: ScheduleBook, T_min: float | None = None):
    """Check consecutive gaps on every timeline. Returns (ok, violations)."""
    T = book.T_min if T_min is None else T_min
    violations = []
    for cp in book.checkpoints:
        line = book.timeline(cp)
        for (t0, k0), (t1, k1) in zip(line, line[1:]):
            if t1 - t0 < T - EPS:
                violations.append((cp, (k0, k1), t1 - t0))
    return not violations, violations


class Scheduler:
    """FCFS scheduler: shortest route, then earliest conflict-free STA.

    Routes and offsets are cached per origin-destination pair since the
    network is immutable.
    """

    def __init__(self, net: RouteNetwork, book: ScheduleBook, V: float,
                 d_star: float = DEFAULT_D_STAR):
        self.net = net
        self.book = book
        self.V = V
        self.d_star = d_star
        self._cache: dict[tuple[int, int], tuple[Route, tuple]] = {}

    def plan_for(self, L_i: int, L_f: int):
        key = (L_i, L_f)
        if key not in self._cache:
            route = shortest_route(self.net, L_i, L_f)
            self._cache[key] = (route, tuple(arrival_offsets(route, self.net, self.V, self.d_star)))
        return self._cache[key]

    def schedule(self, request: UavRequest) -> FlightPlan:
        route, offsets = self.plan_for(request.L_i, request.L_f)
        sta = earliest_sta(offsets, self.book, request.ETA)
        plan = FlightPlan(request, route, sta, offsets)
        self.book.commit(plan)
        return plan


def schedule(request: UavRequest, net: RouteNetwork, book: ScheduleBook, V: float,
             d_star: float = DEFAULT_D_STAR) -> FlightPlan:
    return Scheduler(net, book, V, d_star).schedule(request)


def plans_to_csv(plans) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(PLAN_COLUMNS)
    for p in plans:
        r = p.request
        w.writerow([r.k, r.L_i, r.L_f, f"{r.ETA:.6f}", f"{p.STA:.6f}", f"{p.delay:.6f}",
                    " ".join(map(str, p.route.nodes))])
    return buf.getvalue()


def read_requests(text: str) -> list[UavRequest]:
    """Parse a request CSV with header ``k,L_i,L_f,ETA``."""
    rows = csv.DictReader(io.StringIO(text))
    missing = {"k", "L_i", "L_f", "ETA"} - set(rows.fieldnames or ())
    if missing:
        raise ValueError(f"request file lacks columns {sorted(missing)}")
    return [UavRequest(int(r["k"]), int(r["L_i"]), int(r["L_f"]), float(r["ETA"])) for r in rows]


def timelines_json(book: ScheduleBook) -> str:
    return json.dumps(book.to_dict(), indent=1) + "\n"
