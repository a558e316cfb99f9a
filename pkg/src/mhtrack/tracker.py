"""Scan-by-scan replay of an SCT event stream through the hypothesis engine."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .domain import CameraNetworkModel, SctEvent, TrackerConfig, validate_config
from .forest import GlobalHypothesis, HypothesisForest, IngestionError, ingest_scan, n_scan_prune
from .mwis import best_global_hypothesis


@dataclass
class ScanTiming:
    scan: int
    seconds: float
    grew: bool
    leaves: int


@dataclass
class TrackingResult:
    tracks: list[tuple[int, ...]]
    scores: list[float]
    timings: list[ScanTiming] = field(default_factory=list)
    forest: Optional[HypothesisForest] = None

    @property
    def peak_leaves(self) -> int:
        return max((t.leaves for t in self.timings), default=0)

    def latency_summary(self) -> dict:
        def stats(values: list[float]) -> dict:
            if not values:
                return {"count": 0, "mean": 0.0, "max": 0.0}
            return {"count": len(values), "mean": math.fsum(values) / len(values), "max": max(values)}

        return {
            "all_scans": stats([t.seconds for t in self.timings]),
            "growth_scans": stats([t.seconds for t in self.timings if t.grew]),
            "peak_leaves": self.peak_leaves,
            "total_seconds": math.fsum(t.seconds for t in self.timings),
        }


class Tracker:
    """Online multi-camera tracker: feed it one scan of events at a time."""

    def __init__(self, net: CameraNetworkModel, cfg: TrackerConfig):
        problems = validate_config(cfg, net)
        if problems:
            raise ValueError("invalid configuration: " + "; ".join(problems))
        self.net = net
        self.cfg = cfg
        self.forest = HypothesisForest()
        self.best: Optional[GlobalHypothesis] = None
        self.timings: list[ScanTiming] = []

    def step(self, events: Sequence[SctEvent]) -> Optional[GlobalHypothesis]:
        t0 = time.perf_counter()
        before = self.forest.growth_scans
        ingest_scan(self.forest, events, self.net, self.cfg)
        grew = self.forest.growth_scans != before
        if grew:
            self.best = best_global_hypothesis(self.forest)
            n_scan_prune(self.forest, self.best, self.cfg)
        self.timings.append(ScanTiming(self.forest.scan_counter - 1, time.perf_counter() - t0, grew,
                                       len(self.forest.leaves)))
        return self.best if grew else None

    def current_best(self) -> GlobalHypothesis:
        if not self.forest.trees:
            return GlobalHypothesis(())
        return best_global_hypothesis(self.forest)


def split_scans(events: Iterable[SctEvent], scan_seconds: float) -> list[list[SctEvent]]:
    """Group a time-sorted stream into consecutive scans, empty ones included."""
    scans: list[list[SctEvent]] = []
    last_time = -math.inf
    for lineno, ev in enumerate(events, 1):
        if ev.time < last_time:
            raise IngestionError(f"event {lineno} (t={ev.time}) is out of time order")
        if ev.time < 0:
            raise IngestionError(f"event {lineno} has negative time")
        last_time = ev.time
        idx = int(ev.time // scan_seconds)
        while len(scans) <= idx:
            scans.append([])
        scans[idx].append(ev)
    return scans


def run_tracker(events: Iterable[SctEvent], net: CameraNetworkModel, cfg: TrackerConfig,
                keep_forest: bool = False) -> TrackingResult:
    tracker = Tracker(net, cfg)
    for scan in split_scans(events, cfg.scan_seconds):
        tracker.step(scan)
    best = tracker.current_best()
    best.check_disjoint()
    order = sorted(range(len(best.branches)), key=lambda i: best.tracks[i][0])
    return TrackingResult(
        tracks=[best.tracks[i] for i in order],
        scores=[best.branches[i].log_score for i in order],
        timings=tracker.timings,
        forest=tracker.forest if keep_forest else None,
    )
