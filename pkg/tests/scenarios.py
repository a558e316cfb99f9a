"""Hand-built scenarios shared by several test modules.

The walkthrough scenario: one target crosses three cameras (o1, o2, o4) while
a differently dressed person (o3) shows up in the middle camera at the same time.
"""

from __future__ import annotations

import math

import numpy as np

from mhtrack.domain import CameraNetworkModel, EntryExitPoint, Mode, SctEvent, TrackerConfig

# appearance of o1, o2, o4 and of o3; Bhattacharyya(FEATURE_A, FEATURE_B) = 0.3
FEATURE_A = (0.5, 0.5, 0.0, 0.0)
FEATURE_B = (0.045, 0.045, 0.455, 0.455)

# (obs_id, camera, start, end, feature)
WALKTHROUGH_OBSERVATIONS = [
    (1, "cam1", 0.2, 1.5, FEATURE_A),
    (2, "cam2", 2.2, 3.3, FEATURE_A),
    (3, "cam2", 2.4, 3.6, FEATURE_B),
    (4, "cam3", 4.3, 5.5, FEATURE_A),
]


def walkthrough_network() -> CameraNetworkModel:
    points = tuple(EntryExitPoint(f"P{i}", f"cam{i + 1}", (320.0, 240.0)) for i in range(3))
    trans = np.zeros((3, 3), dtype=bool)
    mean = np.full((3, 3), math.nan)
    std = np.full((3, 3), math.nan)
    for a, b in ((0, 1), (1, 2)):
        trans[a, b] = True
        mean[a, b] = 0.8
        std[a, b] = 0.1
    return CameraNetworkModel(("cam1", "cam2", "cam3"), Mode.IMAGE_PLANE, points, trans, mean, std)


def walkthrough_config(**changes) -> TrackerConfig:
    return TrackerConfig(n_scan=None, g_end_fixed=1.2).replace(**changes)


def walkthrough_events() -> list[SctEvent]:
    out = []
    for obs_id, cam, t0, t1, feat in WALKTHROUGH_OBSERVATIONS:
        for kind, t in (("start", t0), ("extend", round((t0 + t1) / 2, 6)), ("end", t1)):
            out.append(SctEvent(kind, obs_id, cam, t, 320.0, 240.0, 40.0, 100.0,
                                feature=feat if kind != "extend" else None))
    out.sort(key=lambda e: (e.time, e.obs_id))
    return out


def walkthrough_scans() -> list[list[SctEvent]]:
    scans: list[list[SctEvent]] = [[] for _ in range(6)]
    for ev in walkthrough_events():
        scans[int(ev.time)].append(ev)
    return scans


def branch_label(leaf, width: int) -> str:
    """Slot label of a branch after ``width`` growth scans: one digit per growth scan, 0 for a dummy
    or for scans before the tree's root existed."""
    slots = [0 if node.dummy else node.obs_id for node in leaf.path()]
    return "".join(str(s) for s in [0] * (width - len(slots)) + slots)


def forest_labels(forest) -> dict[str, str]:
    return {branch_label(leaf, forest.growth_scans): leaf.status.label for leaf in forest.leaves.values()}
