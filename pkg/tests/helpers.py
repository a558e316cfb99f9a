"""Small builders for observations and networks used across the unit tests."""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from mhtrack.domain import CameraNetworkModel, EntryExitPoint, Mode, Observation, TrackPoint


def ground_obs(obs_id: int, points: Sequence[tuple[float, float, float]], feature=(0.5, 0.5),
               camera: str = "c0", closed: bool = True) -> Observation:
    """Observation from ``(t, x, y)`` samples on the ground plane."""
    history = tuple(TrackPoint(t, (0.0, 0.0), (1.0, 1.0), (x, y)) for t, x, y in points)
    return Observation(obs_id, camera, history, np.asarray(feature, dtype=float), closed)


def image_obs(obs_id: int, t0: float, t1: float, entry: Optional[str], exit_: Optional[str],
              feature=(0.5, 0.5), camera: str = "c0", closed: bool = True) -> Observation:
    history = (TrackPoint(t0, (0.0, 0.0), (1.0, 1.0)), TrackPoint(t1, (0.0, 0.0), (1.0, 1.0)))
    return Observation(obs_id, camera, history, np.asarray(feature, dtype=float), closed, entry, exit_ if closed else None)


def two_point_network(mu: float = 30.0, sigma: float = 4.0, allowed: bool = True) -> CameraNetworkModel:
    points = (EntryExitPoint("A", "c0", (0.0, 0.0)), EntryExitPoint("B", "c1", (0.0, 0.0)))
    trans = np.array([[False, allowed], [False, False]])
    mean = np.full((2, 2), np.nan)
    std = np.full((2, 2), np.nan)
    if allowed:
        mean[0, 1], std[0, 1] = mu, sigma
    return CameraNetworkModel(("c0", "c1"), Mode.IMAGE_PLANE, points, trans, mean, std)


def ground_network(area: float = 400.0) -> CameraNetworkModel:
    return CameraNetworkModel(("c0", "c1"), Mode.GROUND_PLANE, ground_area=area)


def random_feature(rng: np.random.Generator, dim: int = 8) -> np.ndarray:
    f = rng.dirichlet(np.ones(dim))
    return f / f.sum()
