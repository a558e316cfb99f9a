import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import ground_network, ground_obs, image_obs, two_point_network
from mhtrack.domain import DomainError, Mode, TrackerConfig
from mhtrack.gating import (
    GateReason,
    end_of_track_deadline,
    gate,
    mixed_distance,
    speed_gate,
    temporal_gate,
    time_window,
)

CFG = TrackerConfig()


def test_mixed_distance_6_8():
    assert mixed_distance((0, 0), (6, 8), 0.7) == pytest.approx(11.2, abs=1e-9)


@pytest.mark.parametrize("beta", [0.0, 0.3, 1.0])
def test_mixed_distance_coincident(beta):
    assert mixed_distance((2.5, -1), (2.5, -1), beta) == 0.0


@pytest.mark.parametrize("beta", [0.0, 0.7, 1.0])
def test_mixed_distance_axis_aligned(beta):
    assert mixed_distance((1, 3), (1, -4), beta) == pytest.approx(7.0, abs=1e-12)


pts = st.tuples(st.floats(-50, 50), st.floats(-50, 50))


@settings(max_examples=100, deadline=None)
@given(pts, pts, st.floats(0, 1))
def test_mixed_distance_between_norms(a, b, beta):
    l2 = math.dist(a, b)
    l1 = abs(a[0] - b[0]) + abs(a[1] - b[1])
    d = mixed_distance(a, b, beta)
    assert l2 - 1e-9 <= d <= l1 + 1e-9


def _pair(gap_x: float, gap_y: float, dt: float):
    last = ground_obs(1, [(0, -1, 0), (1, 0, 0)])
    cand = ground_obs(2, [(1 + dt, gap_x, gap_y), (2 + dt, gap_x + 1, gap_y)], camera="c1")
    return last, cand


def test_speed_gate_pass():
    last, cand = _pair(6, 8, 10)  # 11.2 m in 10 s
    assert speed_gate(last, cand, CFG).reason is GateReason.PASS


def test_speed_gate_too_fast():
    last, cand = _pair(6, 8, 5)  # 2.24 m/s
    assert speed_gate(last, cand, CFG).reason is GateReason.TOO_FAST


def test_speed_gate_too_slow_on_zero_displacement():
    last, cand = _pair(0, 0, 3)
    decision = speed_gate(last, cand, CFG)
    assert decision.reason is GateReason.TOO_SLOW and not decision.admissible


def test_speed_gate_boundaries_reject():
    # exactly g_speed_max and g_speed_min
    last, cand = _pair(4, 0, 2)
    assert speed_gate(last, cand, CFG).reason is GateReason.TOO_FAST
    last, cand = _pair(1, 0, 2)
    assert speed_gate(last, cand, CFG).reason is GateReason.TOO_SLOW


def test_speed_gate_needs_positive_gap():
    last, cand = _pair(3, 0, 0)
    with pytest.raises(ValueError):
        speed_gate(last, cand, CFG)


def test_speed_gate_mode_mismatch():
    last = image_obs(1, 0, 1, "A", "A")
    cand = image_obs(2, 5, 6, "B", "B")
    assert speed_gate(last, cand, CFG).reason is GateReason.MODE_MISMATCH


@settings(max_examples=100, deadline=None)
@given(st.floats(-20, 20), st.floats(-20, 20), st.floats(0, 2 * math.pi), st.floats(1, 10), st.floats(1, 10))
def test_speed_gate_rigid_motion_invariance_at_beta_one(tx, ty, angle, gx, dt):
    cfg = CFG.replace(beta=1.0)  # rotation invariance needs the pure Euclidean metric
    c, s = math.cos(angle), math.sin(angle)

    def move(p):
        return (c * p[0] - s * p[1] + tx, s * p[0] + c * p[1] + ty)

    base = [(0, 0.0, 0.0), (1, 1.0, 0.0)]
    cand = [(1 + dt, 1.0 + gx, 0.5), (2 + dt, 2.0 + gx, 0.5)]
    a = speed_gate(ground_obs(1, base), ground_obs(2, cand), cfg).reason
    moved = [(t, *move((x, y))) for t, x, y in base], [(t, *move((x, y))) for t, x, y in cand]
    b = speed_gate(ground_obs(1, moved[0]), ground_obs(2, moved[1]), cfg).reason
    speed = math.dist((1.0, 0.0), (1.0 + gx, 0.5)) / dt
    if abs(speed - cfg.g_speed_min) > 1e-9 and abs(speed - cfg.g_speed_max) > 1e-9:
        assert a is b


def test_time_window():
    assert time_window(30, 4, CFG) == (20, 40)
    assert time_window(30, 4, CFG.replace(g_time_min=1.0, g_time_max=99.0)) == (1.0, 99.0)


def test_temporal_gate_pass():
    net = two_point_network()
    last, cand = image_obs(1, 0, 10, "A", "A"), image_obs(2, 45, 50, "B", "B", camera="c1")
    assert temporal_gate(last, cand, net, CFG).reason is GateReason.PASS


def test_temporal_gate_forbidden_transition():
    net = two_point_network(allowed=False)
    last, cand = image_obs(1, 0, 10, "A", "A"), image_obs(2, 45, 50, "B", "B", camera="c1")
    assert temporal_gate(last, cand, net, CFG).reason is GateReason.NO_TRANSITION


def test_temporal_gate_out_of_window():
    net = two_point_network()
    last, cand = image_obs(1, 0, 10, "A", "A"), image_obs(2, 51, 60, "B", "B", camera="c1")
    assert temporal_gate(last, cand, net, CFG).reason is GateReason.TIME_OUT_OF_WINDOW


@pytest.mark.parametrize("dt", [20.0, 40.0])
def test_temporal_gate_boundaries_reject(dt):
    net = two_point_network()
    last, cand = image_obs(1, 0, 10, "A", "A"), image_obs(2, 10 + dt, 70, "B", "B", camera="c1")
    assert not temporal_gate(last, cand, net, CFG).admissible


def test_temporal_gate_missing_stats_is_an_error():
    net = two_point_network()
    std = net.transition_std.copy()
    std[0, 1] = math.nan
    bad = type(net)(net.cameras, net.mode, net.entry_exit_points, net.transitions, net.transition_mean, std)
    last, cand = image_obs(1, 0, 10, "A", "A"), image_obs(2, 45, 50, "B", "B", camera="c1")
    with pytest.raises(DomainError):
        temporal_gate(last, cand, bad, CFG)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.5, 80), st.floats(0, 4), st.floats(0, 4), st.floats(0, 3), st.floats(0, 3))
def test_widening_alphas_never_rejects_a_pass(dt, lo, hi, dlo, dhi):
    net = two_point_network()
    last, cand = image_obs(1, 0, 10, "A", "A"), image_obs(2, 10 + dt, 90, "B", "B", camera="c1")
    narrow = CFG.replace(g_time_alpha_lo=lo, g_time_alpha_hi=hi)
    wide = CFG.replace(g_time_alpha_lo=lo + dlo, g_time_alpha_hi=hi + dhi)
    if temporal_gate(last, cand, net, narrow).admissible:
        assert temporal_gate(last, cand, net, wide).admissible


def test_gate_dispatches_on_mode():
    last, cand = _pair(6, 8, 10)
    assert gate(last, cand, ground_network(), CFG).admissible
    assert ground_network().mode is Mode.GROUND_PLANE


def test_deadline_ground_plane():
    net = ground_network(400.0)
    assert end_of_track_deadline(ground_obs(1, [(0, 0, 0), (1, 1, 0)]), net, CFG) == pytest.approx(20.0, abs=1e-9)
    assert end_of_track_deadline(ground_obs(1, [(0, 0, 0), (1, 2, 0)]), net, CFG) == pytest.approx(10.0, abs=1e-9)


def test_deadline_image_plane_is_constant():
    net = two_point_network()
    cfg = CFG.replace(g_end_fixed=60.0)
    for t1 in (1.0, 7.0, 30.0):
        assert end_of_track_deadline(image_obs(1, 0, t1, "A", "A"), net, cfg) == 60.0


def test_deadline_stationary_is_infinite():
    o = ground_obs(1, [(0, 3, 3), (4, 3, 3)])
    assert end_of_track_deadline(o, ground_network(), CFG) == math.inf


def test_deadline_needs_closed_observation():
    o = ground_obs(1, [(0, 0, 0), (1, 1, 0)], closed=False)
    with pytest.raises(DomainError):
        end_of_track_deadline(o, ground_network(), CFG)
