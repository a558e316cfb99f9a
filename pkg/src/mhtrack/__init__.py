"""Multi-camera multiple-hypothesis tracking over single-camera observations."""

__version__ = "0.1.0"

from .domain import CameraNetworkModel, Mode, Observation, SctEvent, TrackerConfig
from .forest import GlobalHypothesis, HypothesisForest, ingest_scan, n_scan_prune
from .metrics import IdReport, evaluate
from .mwis import best_global_hypothesis, brute_force_mwis, solve_mwis
from .simulator import GroundTruth, ScenarioSpec, generate, perfect_tracks
from .tracker import Tracker, run_tracker

__all__ = [
    "CameraNetworkModel",
    "GlobalHypothesis",
    "GroundTruth",
    "HypothesisForest",
    "IdReport",
    "Mode",
    "Observation",
    "ScenarioSpec",
    "SctEvent",
    "Tracker",
    "TrackerConfig",
    "best_global_hypothesis",
    "brute_force_mwis",
    "evaluate",
    "generate",
    "ingest_scan",
    "n_scan_prune",
    "perfect_tracks",
    "run_tracker",
    "solve_mwis",
]
