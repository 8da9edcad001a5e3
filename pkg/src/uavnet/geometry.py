"""Per-node de-confliction geometry and a sampled separation oracle.

Each node gets a horizontal boundary circle of radius ``d_star``. Every
directed edge touching the node crosses the circle once, at its intersection
point. Directed edges run in lanes offset to the right of the street
centreline, so the two directions of a street have distinct crossing points.
Transitions from an incoming edge happen on a horizontal level of their own,
stacked above the node.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .network import RouteNetwork

SQRT2 = math.sqrt(2.0)
DEFAULT_D_STAR = 45.0
DEFAULT_LANE_FACTOR = 0.75
_TOL = 1e-9

MODES = ("leveled", "direct", "on-demand")


class GeometryError(ValueError):
    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


def min_turn_spacing(d_sep: float, phi_star: float) -> float:
    """Along-route spacing that keeps followers ``d_sep`` apart through a turn."""
    if not 0 <= phi_star < math.pi:
        raise ValueError(f"phi_star must lie in [0, pi), got {phi_star}")
    return d_sep / math.cos(phi_star / 2.0)


def min_time_spacing(d_min: float, V: float) -> float:
    if V <= 0:
        raise ValueError("V must be positive")
    return d_min / V


@dataclass(frozen=True)
class SeparationParams:
    d_sep: float
    phi_star: float
    V: float

    def __post_init__(self):
        if self.d_sep <= 0:
            raise ValueError("d_sep must be positive")
        if not 0 <= self.phi_star < math.pi:
            raise ValueError("phi_star must lie in [0, pi)")
        if self.V <= 0:
            raise ValueError("V must be positive")

    @property
    def d_min(self) -> float:
        return min_turn_spacing(self.d_sep, self.phi_star)

    @property
    def T_min(self) -> float:
        return min_time_spacing(self.d_min, self.V)

    @property
    def level_gap(self) -> float:
        return max(self.d_sep, self.d_min)

    @classmethod
    def from_spacing(cls, d_min: float, phi_star: float, V: float) -> "SeparationParams":
        """Parameters whose derived ``d_min`` equals the given spacing."""
        return cls(d_min * math.cos(phi_star / 2.0), phi_star, V)


def default_dt(params: SeparationParams) -> float:
    """Sampling step whose positional error stays below ``d_sep / 10``."""
    return params.d_sep / (10.0 * params.V)


def _unit(v):
    n = np.linalg.norm(v)
    return v / n


def intersection_point(net: RouteNetwork, node: int, edge, d_star: float, lane_offset: float):
    """Crossing of the lane of ``edge`` with the boundary circle of ``node``."""
    a, b = edge
    pa, pb = np.asarray(net.position(a)), np.asarray(net.position(b))
    d = _unit(pb - pa)
    right = np.array([d[1], -d[0], 0.0])
    along = math.sqrt(d_star ** 2 - lane_offset ** 2)
    if node == b:
        return pb - along * d + lane_offset * right
    if node == a:
        return pa + along * d + lane_offset * right
    raise GeometryError(f"edge {edge} does not touch node {node}", node)


@dataclass(frozen=True, eq=False)
class NodeAirspace:
    node: int
    center: np.ndarray
    d_star: float
    h_star: float
    level_gap: float
    lane_offset: float
    points: dict
    levels: dict
    in_edges: tuple
    out_edges: tuple
    transitions: tuple = field(default=())

    @property
    def n_points(self) -> int:
        return len(self.points)

    def min_spacing(self) -> float:
        pts = list(self.points.values())
        if len(pts) < 2:
            return math.inf
        return min(
            float(np.linalg.norm(pts[i] - pts[j]))
            for i in range(len(pts)) for j in range(i + 1, len(pts))
        )

    def level_number(self, e_in) -> int:
        """1-based level index assigned to an incoming edge."""
        return self.level_order.index(tuple(e_in)) + 1

    @property
    def level_order(self) -> list:
        return sorted(self.levels, key=lambda e: self.levels[e])

    def level_height(self, number: int) -> float:
        return self.levels[self.level_order[number - 1]]


def _allowed_transitions(in_edges, out_edges):
    return tuple((ei, eo) for ei in in_edges for eo in out_edges if eo != (ei[1], ei[0]))


def build_node_airspace(net: RouteNetwork, node: int, params: SeparationParams,
                        d_star: float = DEFAULT_D_STAR, lane_offset: float | None = None,
                        h_star: float | None = None) -> NodeAirspace:
    if node not in net.nodes:
        raise GeometryError(f"unknown node {node}", node)
    if d_star < params.d_sep:
        raise GeometryError(f"d_star {d_star} below d_sep {params.d_sep}", node)
    if lane_offset is None:
        lane_offset = DEFAULT_LANE_FACTOR * params.d_sep
    if not 0 <= lane_offset < d_star:
        raise GeometryError("lane offset must lie in [0, d_star)", node)

    center = np.asarray(net.position(node), dtype=float)
    in_edges = tuple(net.in_edges(node))
    out_edges = tuple(net.out_edges(node))
    points = {}
    for e in in_edges + out_edges:
        length = net.edges[e].length
        if length < 2 * d_star - _TOL:
            raise GeometryError(
                f"node {node}: edge {{{e[0]},{e[1]}}} length {length:.3f} is shorter "
                f"than 2*d_star = {2 * d_star:.3f}", node)
        other = e[0] if e[1] == node else e[1]
        if abs(net.position(other)[2] - center[2]) > _TOL:
            raise GeometryError(
                f"node {node}: edge {{{e[0]},{e[1]}}} is not horizontal near the node", node)
        points[e] = intersection_point(net, node, e, d_star, lane_offset)

    transitions = _allowed_transitions(in_edges, out_edges)
    air = NodeAirspace(node, center, d_star, 0.0, params.level_gap, lane_offset,
                       points, {}, in_edges, out_edges, transitions)
    if len(transitions) > 1:
        spacing = air.min_spacing()
        if spacing < SQRT2 * params.d_sep - _TOL:
            raise GeometryError(
                f"node {node}: intersection spacing {spacing:.3f} below "
                f"sqrt(2)*d_sep = {SQRT2 * params.d_sep:.3f}", node)

    gap = params.level_gap
    needing = sorted({ei for ei, _ in transitions})
    levels = {e: center[2] + (i + 1) * gap for i, e in enumerate(needing)}
    top = len(needing) * gap
    if h_star is None:
        h_star = top + gap
    elif top > h_star + _TOL:
        raise GeometryError(
            f"node {node}: {len(needing)} levels need {top:.1f} m, cylinder is {h_star:.1f} m", node)
    return NodeAirspace(node, center, d_star, h_star, gap, lane_offset, points, levels,
                        in_edges, out_edges, transitions)


@dataclass
class NodeReport:
    node: int
    d_star: float
    n_points: int
    min_spacing: float
    n_levels: int
    ok: bool
    message: str = ""


def check_network_geometry(net: RouteNetwork, params: SeparationParams,
                           d_star: float = DEFAULT_D_STAR, lane_offset=None) -> list[NodeReport]:
    reports = []
    for node in sorted(net.nodes):
        try:
            air = build_node_airspace(net, node, params, d_star, lane_offset)
        except GeometryError as exc:
            reports.append(NodeReport(node, d_star, 0, math.nan, 0, False, str(exc)))
            continue
        reports.append(NodeReport(node, d_star, air.n_points, air.min_spacing(),
                                  len(air.levels), True))
    return reports


def build_airspaces(net: RouteNetwork, params: SeparationParams, d_star=DEFAULT_D_STAR,
                    lane_offset=None) -> dict[int, NodeAirspace]:
    return {n: build_node_airspace(net, n, params, d_star, lane_offset) for n in net.nodes}


# -- transition paths ----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class TransitionPath:
    waypoints: np.ndarray
    mode: str
    level: int | None = None

    @property
    def length(self) -> float:
        return float(np.linalg.norm(np.diff(self.waypoints, axis=0), axis=1).sum())


def _check_transition(air: NodeAirspace, e_in, e_out):
    e_in, e_out = tuple(e_in), tuple(e_out)
    if e_in not in air.in_edges:
        raise GeometryError(f"{e_in} is not an incoming edge of node {air.node}", air.node)
    if e_out not in air.out_edges:
        raise GeometryError(f"{e_out} is not an outgoing edge of node {air.node}", air.node)
    if e_out == (e_in[1], e_in[0]):
        raise GeometryError(f"back-track transition {e_in} -> {e_out}", air.node)
    return e_in, e_out


def _level_polyline(air, a, b, height):
    up = lambda p: np.array([p[0], p[1], height])
    top = np.array([air.center[0], air.center[1], height])
    return np.array([a, up(a), top, up(b), b])


def transition_path(air: NodeAirspace, e_in, e_out, mode: str = "leveled",
                    occupancy=None) -> TransitionPath:
    """Waypoint polyline from the entry point of ``e_in`` to the exit point of ``e_out``.

    ``occupancy`` (on-demand mode only) is the set of 1-based level numbers
    already in use at the node.
    """
    e_in, e_out = _check_transition(air, e_in, e_out)
    a, b = air.points[e_in], air.points[e_out]
    if mode == "leveled":
        number = air.level_number(e_in)
        return TransitionPath(_level_polyline(air, a, b, air.level_height(number)), mode, number)
    if mode == "direct":
        return TransitionPath(np.array([a, air.center.copy(), b]), mode, None)
    if mode == "on-demand":
        occupied = set(occupancy or ())
        if not occupied:
            return TransitionPath(np.array([a, air.center.copy(), b]), mode, None)
        for number in range(1, len(air.levels) + 1):
            if number not in occupied:
                return TransitionPath(
                    _level_polyline(air, a, b, air.level_height(number)), mode, number)
        raise GeometryError(f"node {air.node}: every level is occupied", air.node)
    raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")


def turn_angles(waypoints) -> np.ndarray:
    """Heading change at each interior waypoint, in radians."""
    seg = np.diff(np.asarray(waypoints, dtype=float), axis=0)
    seg = seg[np.linalg.norm(seg, axis=1) > _TOL]
    if len(seg) < 2:
        return np.zeros(0)
    u = seg / np.linalg.norm(seg, axis=1)[:, None]
    cos = np.clip(np.einsum("ij,ij->i", u[:-1], u[1:]), -1.0, 1.0)
    return np.arccos(cos)


def max_turn_angle(air: NodeAirspace) -> float:
    """Largest heading change over all leveled transitions at the node."""
    best = 0.0
    for e_in, e_out in air.transitions:
        angles = turn_angles(transition_path(air, e_in, e_out).waypoints)
        if len(angles):
            best = max(best, float(angles.max()))
    return best


# -- sampled separation oracle ----------------------------------------------------

class Trajectory:
    """Piecewise-linear motion through ``waypoints`` reached at ``times``."""

    def __init__(self, waypoints, times):
        self.waypoints = np.asarray(waypoints, dtype=float)
        self.times = np.asarray(times, dtype=float)
        if len(self.waypoints) != len(self.times) or len(self.times) < 1:
            raise ValueError("waypoints and times must have equal nonzero length")
        if np.any(np.diff(self.times) < 0):
            raise ValueError("times must be non-decreasing")

    @classmethod
    def constant_speed(cls, waypoints, V: float, t0: float = 0.0) -> "Trajectory":
        wp = np.asarray(waypoints, dtype=float)
        steps = np.linalg.norm(np.diff(wp, axis=0), axis=1)
        return cls(wp, t0 + np.concatenate([[0.0], np.cumsum(steps)]) / V)

    @property
    def start(self) -> float:
        return float(self.times[0])

    @property
    def end(self) -> float:
        return float(self.times[-1])

    @property
    def max_speed(self) -> float:
        dt = np.diff(self.times)
        ds = np.linalg.norm(np.diff(self.waypoints, axis=0), axis=1)
        moving = dt > 0
        return float((ds[moving] / dt[moving]).max()) if moving.any() else 0.0

    def positions(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return np.stack([np.interp(t, self.times, self.waypoints[:, k]) for k in range(3)], axis=-1)


@dataclass(frozen=True)
class SeparationResult:
    distance: float
    time: float
    bound: float


def trajectory_min_distance(a: Trajectory, b: Trajectory, dt: float) -> SeparationResult:
    """Minimum sampled distance over the common time window of two trajectories.

    The true continuous minimum is at least ``distance - bound``.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    lo, hi = max(a.start, b.start), min(a.end, b.end)
    if lo > hi:
        return SeparationResult(math.inf, math.nan, 0.0)
    knots = np.concatenate([a.times, b.times])
    knots = knots[(knots >= lo) & (knots <= hi)]
    t = np.unique(np.concatenate([np.arange(lo, hi, dt), [hi], knots]))
    gap = np.linalg.norm(a.positions(t) - b.positions(t), axis=1)
    i = int(np.argmin(gap))
    return SeparationResult(float(gap[i]), float(t[i]), (a.max_speed + b.max_speed) * dt / 2.0)


def pairwise_min_distance(path_a, t_a: float, path_b, t_b: float, V: float,
                          dt: float = 0.05) -> SeparationResult:
    """Closest approach of two constant-speed traversals entering at ``t_a`` and ``t_b``."""
    wa = path_a.waypoints if isinstance(path_a, TransitionPath) else path_a
    wb = path_b.waypoints if isinstance(path_b, TransitionPath) else path_b
    return trajectory_min_distance(Trajectory.constant_speed(wa, V, t_a),
                                   Trajectory.constant_speed(wb, V, t_b), dt)


def lower_bound_distance(d_star: float, chord: float) -> float:
    """Closed-form lower bound ``chord / sqrt(2)`` on level-crossing separation."""
    if d_star <= 0:
        raise ValueError("d_star must be positive")
    if not 0 <= chord <= SQRT2 * d_star + _TOL:
        raise ValueError(f"chord {chord} outside [0, sqrt(2)*d_star]")
    return chord / SQRT2
