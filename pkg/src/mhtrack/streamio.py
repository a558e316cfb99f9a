"""Line-delimited JSON file formats and the configuration document.

* observation stream: one SCT event per line,
  ``{"event", "obs_id", "camera", "time", "u", "v", "w", "h", "x"?, "y"?, "feature"?}``
* truth file: ``{"identity", "obs_id"}`` per line
* track file: ``{"track", "obs_ids"}`` per line
* config document: ``{"tracker": {...TrackerConfig...}, "network": {...CameraNetworkModel...}}``
"""

from __future__ import annotations

import json
import math
from dataclasses import fields
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .domain import CameraNetworkModel, DomainError, EntryExitPoint, Mode, SctEvent, TrackerConfig
from .simulator import GroundTruth


class FormatError(DomainError):
    """A file could not be parsed."""


def _dumps(obj: Any) -> str:
    return json.dumps(obj, separators=(",", ":"), allow_nan=False)


# -- observation stream ---------------------------------------------------------

def event_to_record(ev: SctEvent) -> dict:
    rec = {"event": ev.kind, "obs_id": ev.obs_id, "camera": ev.camera, "time": ev.time,
           "u": ev.u, "v": ev.v, "w": ev.w, "h": ev.h}
    if ev.x is not None:
        rec["x"], rec["y"] = ev.x, ev.y
    if ev.feature is not None:
        rec["feature"] = list(ev.feature)
    return rec


def record_to_event(rec: dict) -> SctEvent:
    feature = rec.get("feature")
    return SctEvent(
        kind=rec["event"],
        obs_id=int(rec["obs_id"]),
        camera=str(rec["camera"]),
        time=float(rec["time"]),
        u=float(rec["u"]),
        v=float(rec["v"]),
        w=float(rec["w"]),
        h=float(rec["h"]),
        x=None if rec.get("x") is None else float(rec["x"]),
        y=None if rec.get("y") is None else float(rec["y"]),
        feature=None if feature is None else tuple(float(f) for f in feature),
    )


def format_stream(events: Iterable[SctEvent]) -> str:
    return "".join(_dumps(event_to_record(ev)) + "\n" for ev in events)


def parse_stream(text: str) -> list[SctEvent]:
    out = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            out.append(record_to_event(json.loads(line)))
        except (ValueError, KeyError, TypeError) as exc:
            raise FormatError(f"stream line {lineno}: {exc}") from None
    return out


def observation_durations(events: Iterable[SctEvent]) -> dict[int, float]:
    """Track-history duration of every observation in a stream."""
    span: dict[int, tuple[float, float]] = {}
    for ev in events:
        lo, hi = span.get(ev.obs_id, (ev.time, ev.time))
        span[ev.obs_id] = (min(lo, ev.time), max(hi, ev.time))
    return {k: hi - lo for k, (lo, hi) in span.items()}


def write_stream(path: str | Path, events: Iterable[SctEvent]) -> None:
    Path(path).write_text(format_stream(events))


def read_stream(path: str | Path) -> list[SctEvent]:
    return parse_stream(Path(path).read_text())


# -- truth and tracks -------------------------------------------------------------

def format_truth(truth: GroundTruth) -> str:
    lines = []
    for ident, obs_ids in sorted(truth.identities.items()):
        lines += [_dumps({"identity": ident, "obs_id": o}) for o in obs_ids]
    return "".join(line + "\n" for line in lines)


def parse_truth(text: str) -> GroundTruth:
    truth = GroundTruth()
    seen = set()
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
            ident, obs = int(rec["identity"]), int(rec["obs_id"])
        except (ValueError, KeyError, TypeError) as exc:
            raise FormatError(f"truth line {lineno}: {exc}") from None
        if obs in seen:
            raise FormatError(f"truth line {lineno}: observation {obs} listed twice")
        seen.add(obs)
        truth.identities.setdefault(ident, []).append(obs)
    truth.identities = {k: truth.identities[k] for k in sorted(truth.identities)}
    return truth


def check_tracks_disjoint(tracks: Sequence[Sequence[int]]) -> None:
    seen: set[int] = set()
    for i, track in enumerate(tracks):
        dup = seen.intersection(track)
        if dup or len(set(track)) != len(track):
            raise DomainError(f"track {i} reuses observations {sorted(dup) or list(track)}")
        seen.update(track)


def format_tracks(tracks: Sequence[Sequence[int]]) -> str:
    check_tracks_disjoint(tracks)
    return "".join(_dumps({"track": i, "obs_ids": list(t)}) + "\n" for i, t in enumerate(tracks))


def parse_tracks(text: str) -> list[tuple[int, ...]]:
    out = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
            out.append(tuple(int(o) for o in rec["obs_ids"]))
        except (ValueError, KeyError, TypeError) as exc:
            raise FormatError(f"track line {lineno}: {exc}") from None
    check_tracks_disjoint(out)
    return out


# -- configuration ------------------------------------------------------------------

def _matrix(arr: np.ndarray) -> list:
    return [[None if isinstance(x, float) and math.isnan(x) else x for x in row] for row in arr.tolist()]


def network_to_dict(net: CameraNetworkModel) -> dict:
    return {
        "cameras": list(net.cameras),
        "mode": net.mode.value,
        "entry_exit_points": [
            {"id": p.id, "camera": p.camera, "image_pos": list(p.image_pos)} for p in net.entry_exit_points
        ],
        "transitions": [[int(x) for x in row] for row in net.transitions.tolist()],
        "transition_mean": _matrix(net.transition_mean),
        "transition_std": _matrix(net.transition_std),
        "ground_area": net.ground_area,
    }


def network_from_dict(data: dict) -> CameraNetworkModel:
    points = tuple(
        EntryExitPoint(str(p["id"]), str(p["camera"]), (float(p["image_pos"][0]), float(p["image_pos"][1])))
        for p in data.get("entry_exit_points", [])
    )
    n = len(points)

    def matrix(key: str, fill: float) -> np.ndarray:
        raw = data.get(key)
        if raw is None:
            return np.full((n, n), fill)
        arr = np.array([[fill if x is None else x for x in row] for row in raw], dtype=float)
        return arr.reshape(n, n)

    trans = matrix("transitions", 0.0).astype(bool)
    area = data.get("ground_area")
    return CameraNetworkModel(
        cameras=tuple(str(c) for c in data["cameras"]),
        mode=Mode(data["mode"]),
        entry_exit_points=points,
        transitions=trans,
        transition_mean=matrix("transition_mean", math.nan),
        transition_std=matrix("transition_std", math.nan),
        ground_area=None if area is None else float(area),
    )


def tracker_to_dict(cfg: TrackerConfig) -> dict:
    return {f.name: getattr(cfg, f.name) for f in fields(cfg)}


def tracker_from_dict(data: dict) -> TrackerConfig:
    return TrackerConfig().replace(**data)


def config_document(cfg: TrackerConfig, net: CameraNetworkModel) -> dict:
    return {"tracker": tracker_to_dict(cfg), "network": network_to_dict(net)}


def load_config(path: str | Path) -> tuple[TrackerConfig, CameraNetworkModel]:
    try:
        doc = json.loads(Path(path).read_text())
        return tracker_from_dict(doc.get("tracker", {})), network_from_dict(doc["network"])
    except (ValueError, KeyError, TypeError, IndexError) as exc:
        raise FormatError(f"{path}: bad config document: {exc}") from None


def save_json(path: str | Path, doc: Any) -> None:
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def apply_overrides(doc: dict, overrides: Sequence[str]) -> dict:
    """Apply ``key=value`` overrides; bare keys are looked up in ``tracker`` then ``network``.

    Values are parsed as JSON when possible, else kept as strings.
    """
    doc = json.loads(json.dumps(doc))
    for item in overrides:
        if "=" not in item:
            raise ValueError(f"override {item!r} is not key=value")
        key, raw = item.split("=", 1)
        try:
            value = json.loads(raw)
        except ValueError:
            value = raw
        if "." in key:
            section, name = key.split(".", 1)
        else:
            section = next((s for s in ("tracker", "network") if key in doc.get(s, {})), "tracker")
            name = key
        doc.setdefault(section, {})[name] = value
    return doc
