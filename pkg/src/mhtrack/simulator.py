"""Deterministic synthetic camera-network scenarios with ground truth.

The layout is a corridor of ``n_cameras`` non-overlapping fields of view
placed along the x axis, separated by blind gaps. Camera ``i`` covers
``x in [i*(L+G), i*(L+G)+L]`` and ``y in [0, W]``; its west and east edges
carry the entry/exit points ``c{i}W`` and ``c{i}E``.

Random draws come from independent streams spawned from ``seed``
(``numpy.random.SeedSequence(seed).spawn(4)``): motion, appearance,
fragmentation/clutter, and a spare that is currently unused. The motion
stream is consumed per target, in target order, as follows::

    t0        = uniform(0, duration)
    direction = +1 if random() < 0.5 else -1
    camera    = (0 if direction > 0 else C-1)    if start_at_edge
                integers(0, C)                   otherwise (drawn before direction)
    speed     = uniform(*speed_range)
    y_in      = uniform(1, W-1)
    repeat:
        y_out = uniform(1, W-1)                  # presence in `camera`
        stop if the next camera is off the corridor
        stop if random() < p_leave
        y_in  = uniform(1, W-1)                  # entry into the next camera
        image_plane only: transit = normal(mu, sigma*jitter), clipped

The appearance stream first draws one base feature per target by rejection
(Dirichlet draws until the pairwise Bhattacharyya limit holds), then one noise
vector per observation in observation-id order. Observation ids follow the
order ``(t_start, identity)`` of the presences.

Ground-plane transits take ``mixed_distance(exit, entry, walk_beta) / speed``
seconds so a target's blind-gap walk is consistent with its in-camera speed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from typing import Optional

import numpy as np

from .domain import CameraNetworkModel, EntryExitPoint, Mode, SctEvent
from .gating import mixed_distance
from .scoring import appearance_similarity

IMAGE_WIDTH = 640.0
IMAGE_HEIGHT = 480.0
_U_MARGIN = 20.0
BOX_SIZE = (40.0, 100.0)


@dataclass(frozen=True)
class ScenarioSpec:
    seed: int = 0
    mode: Mode = Mode.GROUND_PLANE
    n_cameras: int = 4
    n_targets: int = 10
    duration: float = 300.0
    speed_range: tuple[float, float] = (0.7, 1.8)
    feature_dim: int = 16
    feature_concentration: float = 0.05  # Dirichlet parameter of the base appearance
    feature_noise: float = 0.03
    max_base_similarity: float = 0.5
    transition_jitter: float = 1.0
    camera_length: float = 20.0
    gap_length: float = 15.0
    corridor_width: float = 10.0
    transit_sigma: float = 1.5
    p_leave: float = 0.2
    start_at_edge: bool = True
    sample_period: float = 0.5
    walk_beta: float = 0.7
    fragmentation_prob: float = 0.0
    clutter_rate: float = 0.0  # clutter observations per minute

    def __post_init__(self) -> None:
        object.__setattr__(self, "mode", Mode(self.mode))
        object.__setattr__(self, "speed_range", tuple(float(s) for s in self.speed_range))

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioSpec":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown scenario keys: {sorted(unknown)}")
        return cls(**data)

    def to_dict(self) -> dict:
        out = {f.name: getattr(self, f.name) for f in fields(self)}
        out["mode"] = self.mode.value
        out["speed_range"] = list(self.speed_range)
        return out

    def violations(self) -> list[str]:
        out = []
        lo, hi = self.speed_range
        if not 0 < lo <= hi < math.inf:
            out.append("speed_range must satisfy 0 < lo <= hi < inf")
        if self.feature_noise < 0:
            out.append("feature_noise must be >= 0")
        if self.n_targets < 0:
            out.append("n_targets must be >= 0")
        if self.n_cameras < 2:
            out.append("at least two cameras are needed for any allowed transition")
        if self.feature_dim < 1 or not self.feature_concentration > 0:
            out.append("feature_dim must be >= 1 and feature_concentration > 0")
        if not self.duration > 0:
            out.append("duration must be positive")
        if not self.sample_period > 0:
            out.append("sample_period must be positive")
        if not 0 <= self.p_leave <= 1:
            out.append("p_leave must be in [0, 1]")
        if self.transit_sigma <= 0 or self.transition_jitter < 0:
            out.append("transit_sigma must be > 0 and transition_jitter >= 0")
        if self.corridor_width <= 2 or self.camera_length <= 0 or self.gap_length <= 0:
            out.append("corridor dimensions must be positive (width > 2 m)")
        if not 0 <= self.fragmentation_prob <= 1 or self.clutter_rate < 0:
            out.append("fragmentation_prob must be in [0,1] and clutter_rate >= 0")
        return out

    # -- layout -------------------------------------------------------------

    def camera_x0(self, cam: int) -> float:
        return cam * (self.camera_length + self.gap_length)

    @property
    def transit_mean(self) -> float:
        return self.gap_length / (0.5 * (self.speed_range[0] + self.speed_range[1]))

    @property
    def ground_area(self) -> float:
        span = self.n_cameras * self.camera_length + (self.n_cameras - 1) * self.gap_length
        return span * self.corridor_width

    def network(self) -> CameraNetworkModel:
        c = self.n_cameras
        cams = tuple(f"c{i}" for i in range(c))
        v_mid = IMAGE_HEIGHT / 2
        points = []
        for i in range(c):
            points.append(EntryExitPoint(f"c{i}W", cams[i], (_U_MARGIN, v_mid)))
            points.append(EntryExitPoint(f"c{i}E", cams[i], (IMAGE_WIDTH - _U_MARGIN, v_mid)))
        n = len(points)
        trans = np.zeros((n, n), dtype=bool)
        mean = np.full((n, n), np.nan)
        std = np.full((n, n), np.nan)
        for i in range(c - 1):
            east, west_next = 2 * i + 1, 2 * (i + 1)
            for a, b in ((east, west_next), (west_next, east)):
                trans[a, b] = True
                mean[a, b] = self.transit_mean
                std[a, b] = self.transit_sigma
        return CameraNetworkModel(cams, self.mode, tuple(points), trans, mean, std, self.ground_area)


@dataclass
class GroundTruth:
    identities: dict[int, list[int]] = field(default_factory=dict)  # identity -> observation ids

    def identity_of(self) -> dict[int, int]:
        return {obs: ident for ident, obs_ids in self.identities.items() for obs in obs_ids}


@dataclass
class _Presence:
    identity: int
    camera: int
    t_start: float
    t_end: float
    p_start: tuple[float, float]
    p_end: tuple[float, float]
    seq: int = 0


def _random_feature(rng: np.random.Generator, dim: int, concentration: float) -> np.ndarray:
    f = rng.dirichlet(np.full(dim, concentration))
    return f / f.sum()


def _base_features(spec: ScenarioSpec, rng: np.random.Generator, count: int) -> list[np.ndarray]:
    out: list[np.ndarray] = []
    for ident in range(count):
        for _ in range(10_000):
            f = _random_feature(rng, spec.feature_dim, spec.feature_concentration)
            if all(appearance_similarity(f, g) <= spec.max_base_similarity for g in out):
                out.append(f)
                break
        else:
            raise ValueError(
                f"cannot draw base feature {ident} with similarity <= {spec.max_base_similarity} "
                f"in {spec.feature_dim} dimensions"
            )
    return out


def _noisy(base: np.ndarray, noise: float, rng: np.random.Generator) -> np.ndarray:
    f = np.clip(base + rng.normal(0.0, noise, base.shape), 0.0, None)
    total = f.sum()
    return base.copy() if total <= 0 else f / total


def _simulate_motion(spec: ScenarioSpec, rng: np.random.Generator) -> list[_Presence]:
    c, w = spec.n_cameras, spec.corridor_width
    out = []
    for ident in range(spec.n_targets):
        t = rng.uniform(0.0, spec.duration)
        if spec.start_at_edge:
            direction = 1 if rng.random() < 0.5 else -1
            cam = 0 if direction > 0 else c - 1
        else:
            cam = int(rng.integers(0, c))
            direction = 1 if rng.random() < 0.5 else -1
        speed = rng.uniform(*spec.speed_range)
        y_in = rng.uniform(1.0, w - 1.0)
        while True:
            y_out = rng.uniform(1.0, w - 1.0)
            x0 = spec.camera_x0(cam)
            x_in, x_out = (x0, x0 + spec.camera_length) if direction > 0 else (x0 + spec.camera_length, x0)
            dwell = math.hypot(spec.camera_length, y_out - y_in) / speed
            out.append(_Presence(ident, cam, t, t + dwell, (x_in, y_in), (x_out, y_out)))
            t += dwell
            nxt = cam + direction
            if not 0 <= nxt < c:
                break
            if rng.random() < spec.p_leave:
                break
            y_in = rng.uniform(1.0, w - 1.0)
            entry = (x_out + direction * spec.gap_length, y_in)
            if spec.mode is Mode.GROUND_PLANE:
                transit = mixed_distance((x_out, y_out), entry, spec.walk_beta) / speed
            else:
                mu, sigma = spec.transit_mean, spec.transit_sigma
                draw = rng.normal(mu, sigma * spec.transition_jitter)
                transit = float(np.clip(draw, max(mu - 4 * sigma, 1e-3), mu + 4 * sigma))
            t += transit
            cam = nxt
    return out


def _fragment_and_clutter(spec: ScenarioSpec, presences: list[_Presence], rng: np.random.Generator) -> list[_Presence]:
    out = []
    for p in presences:
        span = p.t_end - p.t_start
        if spec.fragmentation_prob > 0 and rng.random() < spec.fragmentation_prob and span > 6.0:
            frac = rng.uniform(0.3, 0.7)
            cut = p.t_start + frac * span
            mid_a = _lerp(p, cut - 1.0)
            mid_b = _lerp(p, cut + 1.0)
            out.append(_Presence(p.identity, p.camera, p.t_start, cut - 1.0, p.p_start, mid_a, 0))
            out.append(_Presence(p.identity, p.camera, cut + 1.0, p.t_end, mid_b, p.p_end, 1))
        else:
            out.append(p)
    if spec.clutter_rate > 0:
        n = int(rng.poisson(spec.clutter_rate * spec.duration / 60.0))
        for k in range(n):
            cam = int(rng.integers(0, spec.n_cameras))
            t0 = rng.uniform(0.0, spec.duration)
            x0 = spec.camera_x0(cam)
            a = (x0 + rng.uniform(0, spec.camera_length), rng.uniform(1.0, spec.corridor_width - 1.0))
            b = (x0 + rng.uniform(0, spec.camera_length), rng.uniform(1.0, spec.corridor_width - 1.0))
            dur = rng.uniform(5.0, 15.0)
            out.append(_Presence(spec.n_targets + k, cam, t0, t0 + dur, a, b))
    return out


def _lerp(p: _Presence, t: float) -> tuple[float, float]:
    a = (t - p.t_start) / (p.t_end - p.t_start)
    return (p.p_start[0] + a * (p.p_end[0] - p.p_start[0]), p.p_start[1] + a * (p.p_end[1] - p.p_start[1]))


def _to_image(spec: ScenarioSpec, cam: int, pos: tuple[float, float]) -> tuple[float, float]:
    fx = (pos[0] - spec.camera_x0(cam)) / spec.camera_length
    fy = pos[1] / spec.corridor_width
    u = _U_MARGIN + fx * (IMAGE_WIDTH - 2 * _U_MARGIN)
    v = IMAGE_HEIGHT / 4 + fy * IMAGE_HEIGHT / 2
    return u, v


def _sample_times(p: _Presence, period: float) -> list[float]:
    times = []
    k = 0
    while True:
        t = p.t_start + k * period
        if t >= p.t_end - 1e-9:
            break
        times.append(t)
        k += 1
    times.append(p.t_end)
    return times


def generate(spec: ScenarioSpec) -> tuple[list[SctEvent], GroundTruth]:
    """Simulate the scenario; returns the time-sorted SCT event stream and the truth."""
    problems = spec.violations()
    if problems:
        raise ValueError("invalid scenario: " + "; ".join(problems))
    motion_ss, feature_ss, extra_ss, _ = np.random.SeedSequence(spec.seed).spawn(4)
    motion_rng = np.random.default_rng(motion_ss)
    feature_rng = np.random.default_rng(feature_ss)
    extra_rng = np.random.default_rng(extra_ss)

    presences = _simulate_motion(spec, motion_rng)
    presences = _fragment_and_clutter(spec, presences, extra_rng)
    presences = [p for p in presences if p.t_start < spec.duration]
    presences.sort(key=lambda p: (p.t_start, p.identity, p.seq))

    n_identities = max([spec.n_targets] + [p.identity + 1 for p in presences])
    bases = _base_features(spec, feature_rng, spec.n_targets)
    bases += [_random_feature(feature_rng, spec.feature_dim, spec.feature_concentration) for _ in range(n_identities - spec.n_targets)]

    truth = GroundTruth()
    keyed = []
    for obs_id, p in enumerate(presences):
        truth.identities.setdefault(p.identity, []).append(obs_id)
        feature = tuple(float(x) for x in _noisy(bases[p.identity], spec.feature_noise, feature_rng))
        times = [t for t in _sample_times(p, spec.sample_period) if t < spec.duration]
        closed = len(times) > 1 and times[-1] == p.t_end
        for k, t in enumerate(times):
            pos = _lerp(p, t)
            u, v = _to_image(spec, p.camera, pos)
            if k == 0:
                kind = "start"
            elif closed and k == len(times) - 1:
                kind = "end"
            else:
                kind = "extend"
            ground = spec.mode is Mode.GROUND_PLANE
            keyed.append((
                (t, obs_id, k),
                SctEvent(
                    kind=kind,
                    obs_id=obs_id,
                    camera=f"c{p.camera}",
                    time=t,
                    u=u,
                    v=v,
                    w=BOX_SIZE[0],
                    h=BOX_SIZE[1],
                    x=pos[0] if ground else None,
                    y=pos[1] if ground else None,
                    feature=feature if kind in ("start", "end") else None,
                ),
            ))
    keyed.sort(key=lambda item: item[0])
    truth.identities = {k: truth.identities[k] for k in sorted(truth.identities)}
    return [ev for _, ev in keyed], truth


def perfect_tracks(truth: GroundTruth) -> list[tuple[int, ...]]:
    return [tuple(obs_ids) for _, obs_ids in sorted(truth.identities.items())]
