"""Core value types: track points, observations, the camera-network model and tracker settings."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, fields
from typing import Optional, Sequence

import numpy as np

FEATURE_SUM_TOL = 1e-9


class Mode(str, enum.Enum):
    GROUND_PLANE = "ground_plane"
    IMAGE_PLANE = "image_plane"


class DomainError(ValueError):
    """Raised when input data breaks a domain invariant."""


@dataclass(frozen=True, slots=True)
class TrackPoint:
    time: float
    image_pos: tuple[float, float]
    image_size: tuple[float, float]
    ground_pos: Optional[tuple[float, float]] = None


def normalize_feature(values: Sequence[float] | np.ndarray) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise DomainError("feature must be a non-empty 1-d vector")
    if np.any(arr < 0) or not np.all(np.isfinite(arr)):
        raise DomainError("feature entries must be finite and nonnegative")
    total = arr.sum()
    if total <= 0:
        raise DomainError("feature has zero mass")
    out = arr / total
    out.flags.writeable = False
    return out


def running_average(mean: np.ndarray, new: np.ndarray, k: int) -> np.ndarray:
    """Fold the k-th sample into the mean of the first k-1 samples."""
    if k < 1:
        raise ValueError("k must be >= 1")
    out = ((k - 1) / k) * np.asarray(mean, dtype=float) + (1.0 / k) * np.asarray(new, dtype=float)
    out.flags.writeable = False
    return out


def _check_feature(feature: np.ndarray) -> None:
    if feature.ndim != 1 or feature.size == 0:
        raise DomainError("feature must be a non-empty 1-d vector")
    if np.any(feature < 0):
        raise DomainError("feature entries must be nonnegative")
    if abs(float(feature.sum()) - 1.0) > FEATURE_SUM_TOL:
        raise DomainError(f"feature must sum to 1 (got {feature.sum()!r})")


@dataclass(frozen=True, eq=False)
class Observation:
    """One contiguous single-camera track of one (unknown) target."""

    id: int
    camera: str
    history: tuple[TrackPoint, ...]
    feature: np.ndarray
    closed: bool = False
    entry_point: Optional[str] = None
    exit_point: Optional[str] = None

    def __post_init__(self) -> None:
        if not self.history:
            raise DomainError(f"observation {self.id}: empty history")
        times = [p.time for p in self.history]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise DomainError(f"observation {self.id}: times must strictly increase")
        has_ground = {p.ground_pos is not None for p in self.history}
        if len(has_ground) > 1:
            raise DomainError(f"observation {self.id}: ground_pos on some points only")
        feat = np.asarray(self.feature, dtype=float)
        _check_feature(feat)
        feat.flags.writeable = False
        object.__setattr__(self, "feature", feat)
        if self.exit_point is not None and not self.closed:
            raise DomainError(f"observation {self.id}: exit_point set on an open observation")

    @property
    def start_time(self) -> float:
        return self.history[0].time

    @property
    def end_time(self) -> float:
        return self.history[-1].time

    @property
    def duration(self) -> float:
        return self.end_time - self.start_time

    @property
    def has_ground(self) -> bool:
        return self.history[0].ground_pos is not None


def observation_speed(o: Observation) -> float:
    """Mean of the per-step ground-plane speeds along the history."""
    if not o.has_ground:
        raise DomainError(f"observation {o.id}: no ground positions")
    if len(o.history) < 2:
        raise DomainError(f"observation {o.id}: speed undefined for a single point")
    speeds = []
    for prev, cur in zip(o.history, o.history[1:]):
        (x0, y0), (x1, y1) = prev.ground_pos, cur.ground_pos
        speeds.append(math.hypot(x1 - x0, y1 - y0) / (cur.time - prev.time))
    return math.fsum(speeds) / len(speeds)


@dataclass(frozen=True, slots=True)
class EntryExitPoint:
    id: str
    camera: str
    image_pos: tuple[float, float]


@dataclass(frozen=True, eq=False)
class CameraNetworkModel:
    """Cameras, entry/exit points and the learned transition statistics between them.

    ``transitions``, ``transition_mean`` and ``transition_std`` are square
    matrices indexed by position in ``entry_exit_points``; mean and std are
    NaN wherever no transition is allowed.
    """

    cameras: tuple[str, ...]
    mode: Mode
    entry_exit_points: tuple[EntryExitPoint, ...] = ()
    transitions: np.ndarray = field(default_factory=lambda: np.zeros((0, 0), dtype=bool))
    transition_mean: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    transition_std: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    ground_area: Optional[float] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "mode", Mode(self.mode))
        for name in ("transitions", "transition_mean", "transition_std"):
            arr = np.array(getattr(self, name), dtype=bool if name == "transitions" else float)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "_point_index", {p.id: i for i, p in enumerate(self.entry_exit_points)})

    def point_index(self, point_id: str) -> int:
        try:
            return self._point_index[point_id]
        except KeyError:
            raise DomainError(f"unknown entry/exit point {point_id!r}") from None

    def allowed(self, exit_point: str, entry_point: str) -> bool:
        return bool(self.transitions[self.point_index(exit_point), self.point_index(entry_point)])

    def transition_stats(self, exit_point: str, entry_point: str) -> tuple[float, float]:
        i, j = self.point_index(exit_point), self.point_index(entry_point)
        mu, sigma = float(self.transition_mean[i, j]), float(self.transition_std[i, j])
        if not (math.isfinite(mu) and math.isfinite(sigma) and sigma > 0):
            raise DomainError(f"no transition statistics for {exit_point!r} -> {entry_point!r}")
        return mu, sigma

    def nearest_point(self, camera: str, image_pos: tuple[float, float]) -> Optional[str]:
        best, best_d = None, math.inf
        for p in self.entry_exit_points:
            if p.camera != camera:
                continue
            d = math.hypot(p.image_pos[0] - image_pos[0], p.image_pos[1] - image_pos[1])
            if d < best_d:
                best, best_d = p.id, d
        return best

    def violations(self) -> list[str]:
        out = []
        n = len(self.entry_exit_points)
        if len({p.id for p in self.entry_exit_points}) != n:
            out.append("entry/exit point ids are not unique")
        for p in self.entry_exit_points:
            if p.camera not in self.cameras:
                out.append(f"entry/exit point {p.id!r} on unknown camera {p.camera!r}")
        if self.transitions.shape != (n, n):
            out.append(f"transitions must be {n}x{n}")
        elif n:
            for name in ("transition_mean", "transition_std"):
                if getattr(self, name).shape != (n, n):
                    out.append(f"{name} must be {n}x{n}")
            if not out:
                allowed = self.transitions
                mean_ok = np.isfinite(self.transition_mean)
                std_ok = np.isfinite(self.transition_std)
                if np.any(allowed & ~(mean_ok & std_ok)):
                    out.append("transition_mean/std missing for an allowed transition")
                if np.any(~allowed & (mean_ok | std_ok)):
                    out.append("transition_mean/std set for a forbidden transition")
                if np.any(allowed & std_ok & (np.nan_to_num(self.transition_std) <= 0)):
                    out.append("transition_std must be > 0")
        if self.mode is Mode.GROUND_PLANE:
            if self.ground_area is None or not self.ground_area > 0:
                out.append("ground_plane mode requires a positive ground_area")
        else:
            if n == 0:
                out.append("image_plane mode requires entry/exit points")
            if n == 0 or not np.any(self.transitions):
                out.append("image_plane mode requires at least one allowed transition")
        return out


@dataclass(frozen=True, slots=True)
class TrackerConfig:
    """Tracker parameters. Defaults are the DukeMTMC parameter set."""

    n_scan: Optional[int] = 10  # None disables pruning
    w_A: float = 0.8
    c0: float = 0.001
    c1: float = 0.3
    c2: float = 0.75
    scan_seconds: float = 1.0
    beta: float = 0.7
    g_speed_min: float = 0.5
    g_speed_max: float = 2.0
    g_time_alpha_lo: float = 2.5
    g_time_alpha_hi: float = 2.5
    g_time_min: Optional[float] = None  # absolute overrides of the mu -/+ alpha*sigma window
    g_time_max: Optional[float] = None
    g_end_fixed: float = 60.0
    gamma: float = 1.0

    @property
    def w_X(self) -> float:
        return 1.0 - self.w_A

    @classmethod
    def dukemtmc(cls) -> "TrackerConfig":
        return cls()

    @classmethod
    def nlpr_mct(cls) -> "TrackerConfig":
        return cls(w_A=0.815, c0=0.005, c1=0.1, c2=0.75)

    def replace(self, **changes) -> "TrackerConfig":
        known = {f.name for f in fields(self)}
        unknown = set(changes) - known
        if unknown:
            raise KeyError(f"unknown tracker config keys: {sorted(unknown)}")
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        values.update(changes)
        return TrackerConfig(**values)


def validate_config(cfg: TrackerConfig, net: CameraNetworkModel) -> list[str]:
    """Every invariant violation of the pair; an empty list means valid."""
    out = []
    if cfg.n_scan is not None and (not isinstance(cfg.n_scan, int) or cfg.n_scan < 1):
        out.append("n_scan must be a positive integer (or None to disable pruning)")
    if not 0.0 <= cfg.w_A <= 1.0:
        out.append("w_A out of [0,1]")
    for name in ("c1", "c2"):
        v = getattr(cfg, name)
        if not 0.0 < v < 1.0:
            out.append(f"{name} out of (0,1)")
    if not math.isfinite(cfg.c0):
        out.append("c0 must be finite")
    if not cfg.scan_seconds > 0:
        out.append("scan_seconds must be positive")
    if not 0.0 <= cfg.beta <= 1.0:
        out.append("beta out of [0,1]")
    if not cfg.g_speed_min < cfg.g_speed_max:
        out.append("g_speed_min must be < g_speed_max")
    if cfg.g_speed_min < 0:
        out.append("g_speed_min must be >= 0")
    if cfg.g_time_alpha_lo < 0 or cfg.g_time_alpha_hi < 0:
        out.append("g_time alphas must be >= 0")
    if cfg.g_time_min is not None and cfg.g_time_max is not None and not cfg.g_time_min < cfg.g_time_max:
        out.append("g_time_min must be < g_time_max")
    if not cfg.g_end_fixed > 0:
        out.append("g_end_fixed must be positive")
    if not cfg.gamma > 0:
        out.append("gamma must be positive")
    out.extend(net.violations())
    return out


EVENT_KINDS = ("start", "extend", "end")


@dataclass(frozen=True, eq=False)
class SctEvent:
    """One record of the single-camera-tracker output stream."""

    kind: str
    obs_id: int
    camera: str
    time: float
    u: float
    v: float
    w: float
    h: float
    x: Optional[float] = None
    y: Optional[float] = None
    feature: Optional[tuple[float, ...]] = None

    def __post_init__(self) -> None:
        if self.kind not in EVENT_KINDS:
            raise DomainError(f"unknown event kind {self.kind!r}")
        if (self.x is None) != (self.y is None):
            raise DomainError("ground position needs both x and y")

    def point(self) -> TrackPoint:
        ground = None if self.x is None else (self.x, self.y)
        return TrackPoint(self.time, (self.u, self.v), (self.w, self.h), ground)
