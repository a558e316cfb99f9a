"""Likelihood-ratio track scoring.

A branch's log score starts at the track-initiation constant ``c0`` and grows
by one weighted increment per associated observation::

    delta = w_A * log(p_A / c2) + w_X * log(p_X / c1)

where ``p_A`` compares the candidate's appearance with the branch's running
mean appearance and ``p_X`` is the kinematic density (transition time in the
image-plane mode, travelled distance in the ground-plane mode).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .domain import CameraNetworkModel, Mode, Observation, TrackerConfig, observation_speed, running_average
from .gating import gap_seconds, mixed_distance

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


@dataclass(frozen=True, slots=True)
class BranchScoreState:
    log_score: float
    assoc_count: int
    mean_feature: np.ndarray

    @classmethod
    def initial(cls, feature: np.ndarray, cfg: TrackerConfig) -> "BranchScoreState":
        return cls(cfg.c0, 1, feature)


def appearance_similarity(a: np.ndarray, b: np.ndarray) -> float:
    """Bhattacharyya coefficient of two normalized histograms."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"feature dimension mismatch: {a.shape} vs {b.shape}")
    bc = float(np.sqrt(a * b).sum())
    return min(max(bc, 0.0), 1.0)


def update_mean_feature(state: BranchScoreState, new_feature: np.ndarray) -> BranchScoreState:
    k = state.assoc_count + 1
    return BranchScoreState(state.log_score, k, running_average(state.mean_feature, new_feature, k))


def gaussian_log_density(x: float, mean: float, variance: float) -> float:
    return -0.5 * (x - mean) ** 2 / variance - 0.5 * math.log(variance) - _LOG_SQRT_2PI


def kinematic_likelihood_temporal(dt: float, mu: float, sigma: float) -> float:
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    return math.exp(gaussian_log_density(dt, mu, sigma * sigma))


def _distance_residual(last: Observation, cand: Observation, cfg: TrackerConfig) -> tuple[float, float]:
    speed = observation_speed(last)
    expected = speed * gap_seconds(last, cand)
    d = mixed_distance(cand.history[0].ground_pos, last.history[-1].ground_pos, cfg.beta)
    return speed, expected - d


def kinematic_likelihood_distance(last: Observation, cand: Observation, cfg: TrackerConfig) -> float:
    """Density of the travelled-distance residual; the variance is ``speed / gamma``.

    A stationary predecessor degenerates to a point mass: 1 on zero residual, else 0.
    """
    speed, residual = _distance_residual(last, cand, cfg)
    if speed == 0:
        return 1.0 if residual == 0 else 0.0
    return math.exp(gaussian_log_density(residual, 0.0, speed / cfg.gamma))


def _kinematic_log_density(last: Observation, cand: Observation, net: CameraNetworkModel, cfg: TrackerConfig) -> float:
    # log-space avoids underflow far in the tails
    if net.mode is Mode.IMAGE_PLANE:
        mu, sigma = net.transition_stats(last.exit_point, cand.entry_point)
        return gaussian_log_density(gap_seconds(last, cand), mu, sigma * sigma)
    speed, residual = _distance_residual(last, cand, cfg)
    if speed == 0:
        return 0.0 if residual == 0 else -math.inf
    return gaussian_log_density(residual, 0.0, speed / cfg.gamma)


def delta_log_score(
    state: BranchScoreState,
    last: Observation,
    cand: Observation,
    net: CameraNetworkModel,
    cfg: TrackerConfig,
) -> float:
    """Score increment for appending ``cand`` to a branch whose last observation is ``last``.

    Returns ``-inf`` when either likelihood is exactly zero; callers drop such pairings.
    """
    total = 0.0
    # a zero weight switches its cue off entirely, even at zero likelihood
    if cfg.w_A > 0:
        p_a = appearance_similarity(cand.feature, state.mean_feature)
        if p_a == 0:
            return -math.inf
        total += cfg.w_A * math.log(p_a / cfg.c2)
    if cfg.w_X > 0:
        log_px = _kinematic_log_density(last, cand, net, cfg)
        if log_px == -math.inf:
            return -math.inf
        total += cfg.w_X * (log_px - math.log(cfg.c1))
    return total


def total_log_score(increments: Iterable[float], cfg: TrackerConfig) -> float:
    return cfg.c0 + math.fsum(increments)
