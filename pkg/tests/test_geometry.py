import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from uavnet.geometry import (
    SQRT2, GeometryError, SeparationParams, Trajectory, build_node_airspace,
    check_network_geometry, default_dt, lower_bound_distance, max_turn_angle,
    min_time_spacing, min_turn_spacing, pairwise_min_distance, trajectory_min_distance,
    transition_path, turn_angles,
)
from uavnet.network import build_example_unet, build_snet1

from oracles import follow_min_distance, star_network

PHI = 3 * math.pi / 5
NOMINAL = SeparationParams.from_spacing(20.0, PHI, 4.0)


@pytest.fixture(scope="module")
def snet1():
    return build_snet1()


@pytest.fixture(scope="module")
def node9(snet1):
    return build_node_airspace(snet1, 9, NOMINAL, 45.0)


def test_min_turn_spacing_band():
    # d_sep 6..14 m at the five-leg turn angle gives roughly 10..23 m
    assert min_turn_spacing(6.0, PHI) == pytest.approx(10.2078097, abs=1e-6)
    assert min_turn_spacing(14.0, PHI) == pytest.approx(23.8182226, abs=1e-6)
    assert min_turn_spacing(7.5, 0.0) == 7.5
    with pytest.raises(ValueError):
        min_turn_spacing(6.0, math.pi)


def test_min_time_spacing():
    assert min_time_spacing(20.0, 4.0) == 5.0
    assert min_time_spacing(8.0, 4.0) == 2.0
    assert min_time_spacing(0.0, 4.0) == 0.0
    with pytest.raises(ValueError):
        min_time_spacing(1.0, 0.0)


def test_params_derived():
    assert NOMINAL.d_min == pytest.approx(20.0)
    assert NOMINAL.T_min == pytest.approx(5.0)
    assert NOMINAL.level_gap == NOMINAL.d_min >= NOMINAL.d_sep
    assert default_dt(NOMINAL) == pytest.approx(NOMINAL.d_sep / 40.0)
    with pytest.raises(ValueError):
        SeparationParams(0.0, PHI, 4.0)
    with pytest.raises(ValueError):
        SeparationParams(5.0, math.pi, 4.0)


@given(st.floats(0.1, 50.0), st.floats(0.0, 3.1), st.floats(0.0, 3.1))
def test_min_turn_spacing_monotone(d_sep, a, b):
    lo, hi = sorted((a, b))
    assert min_turn_spacing(d_sep, lo) <= min_turn_spacing(d_sep, hi)
    assert min_turn_spacing(d_sep, lo) >= d_sep


def test_node9_levels(node9):
    assert len(node9.levels) == 3
    heights = sorted(node9.levels.values())
    assert np.all(np.diff(heights) >= node9.level_gap - 1e-9)
    assert node9.level_gap >= NOMINAL.d_min
    assert heights[-1] <= node9.h_star
    assert node9.level_number((8, 9)) == 2
    assert node9.n_points == 6


def test_intersection_points_on_circle(node9):
    for p in node9.points.values():
        assert math.hypot(*(p - node9.center)[:2]) == pytest.approx(45.0)
        assert p[2] == node9.center[2]
    assert node9.min_spacing() >= SQRT2 * NOMINAL.d_sep


def test_backtrack_only_node_has_no_levels(snet1):
    air = build_node_airspace(snet1, 12, NOMINAL, 45.0)
    assert air.levels == {} and air.transitions == ()


def test_spacing_error_when_points_one_dsep_apart():
    params = SeparationParams(6.0, PHI, 4.0)
    net = star_network([0.0, math.pi], 200.0)
    # opposite lanes of the same street sit two lane offsets apart
    with pytest.raises(GeometryError, match="spacing") as err:
        build_node_airspace(net, 0, params, 30.0, lane_offset=3.0)
    assert err.value.node == 0


def test_short_edge_and_small_dstar_rejected(snet1):
    with pytest.raises(GeometryError, match="shorter"):
        build_node_airspace(snet1, 9, NOMINAL, 60.0)
    with pytest.raises(GeometryError, match="below d_sep"):
        build_node_airspace(snet1, 9, NOMINAL, 5.0)


def test_crowded_cylinder_rejected(snet1):
    with pytest.raises(GeometryError, match="cylinder"):
        build_node_airspace(snet1, 9, NOMINAL, 45.0, h_star=30.0)


def test_network_reports(snet1):
    reports = check_network_geometry(snet1, NOMINAL, 45.0)
    assert all(r.ok for r in reports)
    tight = check_network_geometry(snet1, SeparationParams(14.0, PHI, 4.0), 45.0)
    assert {r.node for r in tight if not r.ok} == {4, 8, 10}


def test_leveled_transition_node9(node9):
    path = transition_path(node9, (8, 9), (9, 5))
    wp = path.waypoints
    assert len(wp) == 5 and path.level == 2
    h = node9.level_height(2)
    b, e = node9.points[(8, 9)], node9.points[(9, 5)]
    np.testing.assert_allclose(wp[0], b)
    np.testing.assert_allclose(wp[1], [b[0], b[1], h])
    np.testing.assert_allclose(wp[2], [node9.center[0], node9.center[1], h])
    np.testing.assert_allclose(wp[3], [e[0], e[1], h])
    np.testing.assert_allclose(wp[4], e)


def test_direct_and_on_demand(node9):
    direct = transition_path(node9, (8, 9), (9, 5), "direct")
    assert len(direct.waypoints) == 3
    free = transition_path(node9, (8, 9), (9, 5), "on-demand", occupancy=set())
    np.testing.assert_allclose(free.waypoints, direct.waypoints)
    busy = transition_path(node9, (8, 9), (9, 5), "on-demand", occupancy={1})
    assert busy.level == 2 and len(busy.waypoints) == 5
    with pytest.raises(GeometryError, match="occupied"):
        transition_path(node9, (8, 9), (9, 5), "on-demand", occupancy={1, 2, 3})


def test_transition_errors(node9):
    with pytest.raises(GeometryError, match="back-track"):
        transition_path(node9, (8, 9), (9, 8))
    with pytest.raises(GeometryError, match="incoming"):
        transition_path(node9, (9, 8), (9, 5))
    with pytest.raises(ValueError):
        transition_path(node9, (8, 9), (9, 5), "sideways")


def test_turn_angles_of_leveled_paths(snet1):
    air = build_node_airspace(snet1, 4, NOMINAL, 45.0)
    for e_in, e_out in air.transitions:
        ang = turn_angles(transition_path(air, e_in, e_out).waypoints)
        a = air.points[e_in] - air.center
        b = air.points[e_out] - air.center
        between = math.acos(np.dot(a[:2], b[:2]) / (np.linalg.norm(a[:2]) * np.linalg.norm(b[:2])))
        np.testing.assert_allclose(ang, [math.pi / 2, math.pi - between, math.pi / 2], atol=1e-9)


def test_max_turn_of_uniform_star():
    # five evenly spread streets: the lane offset widens the sharpest corner past 3pi/5
    net = star_network([2 * math.pi * i / 5 for i in range(5)], 200.0)
    air = build_node_airspace(net, 0, SeparationParams(6.0, PHI, 4.0), 40.0)
    skew = 2 * math.asin(air.lane_offset / air.d_star)
    assert PHI < max_turn_angle(air) <= PHI + skew + 1e-9


def test_identical_paths_zero_distance(node9):
    path = transition_path(node9, (8, 9), (9, 5))
    assert pairwise_min_distance(path, 3.0, path, 3.0, 4.0).distance == 0.0


def test_no_overlap_is_infinite(node9):
    path = transition_path(node9, (8, 9), (9, 5))
    res = pairwise_min_distance(path, 0.0, path, 1e4, 4.0)
    assert res.distance == math.inf


def test_ascent_vs_level_bound(node9):
    """UAV climbing past level 2 against a UAV flying level 2 toward the node."""
    low = transition_path(node9, (8, 9), (9, 10))
    high = transition_path(node9, (10, 9), (9, 8))
    assert high.level == 3 and low.level == 2
    bound = node9.min_spacing() / SQRT2
    dt = default_dt(NOMINAL)
    worst = min(pairwise_min_distance(high, 0.0, low, off, 4.0, dt).distance
                for off in np.linspace(-60.0, 60.0, 241))
    assert worst >= bound - 4.0 * dt * 2


def test_levels_stay_apart_brute_force():
    # straight-through crossing at two levels: horizontal overlap above the node
    rng = np.random.default_rng(7)
    for _ in range(50):
        gap = rng.uniform(6.0, 30.0)
        pa = np.array([[-50.0, 0.0, gap], [50.0, 0.0, gap]])
        pb = np.array([[0.0, -50.0, 2 * gap], [0.0, 50.0, 2 * gap]])
        best = min(pairwise_min_distance(pa, 0.0, pb, off, 4.0, 0.02).distance
                   for off in rng.uniform(-20.0, 20.0, 20))
        assert best >= gap - 1e-9


def test_lower_bound_distance():
    assert lower_bound_distance(20.0, SQRT2 * 14.0) == pytest.approx(14.0)
    assert lower_bound_distance(50.0, 0.0) == 0.0
    assert lower_bound_distance(50.0, 30.0) == pytest.approx(21.2132034)
    with pytest.raises(ValueError):
        lower_bound_distance(10.0, 15.0)


def test_lower_bound_oracle_cross_check():
    d_star, chord, V = 50.0, 30.0, 4.0
    theta = 2 * math.asin(chord / (2 * d_star))
    H = 20.0
    a = np.array([d_star * math.cos(theta), d_star * math.sin(theta)])
    climb = np.array([[a[0], a[1], 0.0], [a[0], a[1], 2 * H]])
    level = np.array([[d_star, 0.0, H], [0.0, 0.0, H]])
    dt = 0.01
    best = min(pairwise_min_distance(climb, 0.0, level, off, V, dt).distance
               for off in np.linspace(-15.0, 15.0, 301))
    assert best >= lower_bound_distance(d_star, chord) - V * dt


@given(st.floats(3.0, 14.0), st.floats(0.05, 2.6), st.floats(1.0, 10.0))
@settings(max_examples=60, deadline=None)
def test_followers_through_turn(d_sep, phi_star, V):
    phi = phi_star
    params = SeparationParams(d_sep, phi_star, V)
    dt = default_dt(params)
    T = params.T_min
    leg = 10 * params.d_min
    corner = np.array([[-leg, 0.0, 0.0], [0.0, 0.0, 0.0],
                       [leg * math.cos(phi), leg * math.sin(phi), 0.0]])
    lead = Trajectory.constant_speed(corner, V, 0.0)
    follow = Trajectory.constant_speed(corner, V, T)
    res = trajectory_min_distance(lead, follow, dt)
    assert res.distance >= d_sep - res.bound
    assert follow_min_distance(phi, T, V, dt, leg) >= d_sep - V * dt


def test_unet_geometry_passes_default():
    reports = check_network_geometry(build_example_unet(), NOMINAL, 45.0)
    assert all(r.ok for r in reports)
