"""Observation-to-track gates (speed and transition-time) and the end-of-track deadline."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .domain import CameraNetworkModel, DomainError, Mode, Observation, TrackerConfig, observation_speed


class GateReason(str, enum.Enum):
    PASS = "pass"
    TOO_FAST = "too_fast"
    TOO_SLOW = "too_slow"
    NO_TRANSITION = "no_transition"
    TIME_OUT_OF_WINDOW = "time_out_of_window"
    MODE_MISMATCH = "mode_mismatch"


@dataclass(frozen=True, slots=True)
class GateDecision:
    reason: GateReason

    @property
    def admissible(self) -> bool:
        return self.reason is GateReason.PASS


PASS = GateDecision(GateReason.PASS)


def mixed_distance(a: tuple[float, float], b: tuple[float, float], beta: float) -> float:
    dx, dy = abs(a[0] - b[0]), abs(a[1] - b[1])
    return beta * math.hypot(dx, dy) + (1.0 - beta) * (dx + dy)


def gap_seconds(last: Observation, cand: Observation) -> float:
    return cand.start_time - last.end_time


def speed_gate(last: Observation, cand: Observation, cfg: TrackerConfig) -> GateDecision:
    if not (last.has_ground and cand.has_ground):
        return GateDecision(GateReason.MODE_MISMATCH)
    dt = gap_seconds(last, cand)
    if not dt > 0:
        raise ValueError(f"observation {cand.id} does not start after {last.id} ends (dt={dt})")
    d = mixed_distance(cand.history[0].ground_pos, last.history[-1].ground_pos, cfg.beta)
    speed = d / dt
    if not speed > cfg.g_speed_min:
        return GateDecision(GateReason.TOO_SLOW)
    if not speed < cfg.g_speed_max:
        return GateDecision(GateReason.TOO_FAST)
    return PASS


def time_window(mu: float, sigma: float, cfg: TrackerConfig) -> tuple[float, float]:
    lo = cfg.g_time_min if cfg.g_time_min is not None else mu - cfg.g_time_alpha_lo * sigma
    hi = cfg.g_time_max if cfg.g_time_max is not None else mu + cfg.g_time_alpha_hi * sigma
    return lo, hi


def temporal_gate(
    last: Observation, cand: Observation, net: CameraNetworkModel, cfg: TrackerConfig
) -> GateDecision:
    if last.exit_point is None or cand.entry_point is None:
        return GateDecision(GateReason.MODE_MISMATCH)
    if not net.allowed(last.exit_point, cand.entry_point):
        return GateDecision(GateReason.NO_TRANSITION)
    mu, sigma = net.transition_stats(last.exit_point, cand.entry_point)
    lo, hi = time_window(mu, sigma, cfg)
    if lo < gap_seconds(last, cand) < hi:
        return PASS
    return GateDecision(GateReason.TIME_OUT_OF_WINDOW)


def gate(last: Observation, cand: Observation, net: CameraNetworkModel, cfg: TrackerConfig) -> GateDecision:
    """Dispatch to the gate that matches the network's operating mode."""
    if net.mode is Mode.GROUND_PLANE:
        return speed_gate(last, cand, cfg)
    return temporal_gate(last, cand, net, cfg)


def end_of_track_deadline(o: Observation, net: CameraNetworkModel, cfg: TrackerConfig) -> float:
    """Seconds a searching branch ending in ``o`` may wait before it is declared ended.

    A stationary target (zero estimated speed) never times out.
    """
    if not o.closed:
        raise DomainError(f"observation {o.id} is still being tracked")
    if net.mode is Mode.IMAGE_PLANE:
        return cfg.g_end_fixed
    speed = observation_speed(o)
    if speed == 0:
        return math.inf
    return math.sqrt(net.ground_area) / speed
