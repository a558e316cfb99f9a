import pytest

from scenarios import walkthrough_config, walkthrough_events, walkthrough_network
from mhtrack.domain import Mode, SctEvent, TrackerConfig
from mhtrack.forest import IngestionError, check_forest
from mhtrack.simulator import ScenarioSpec, generate
from mhtrack.tracker import Tracker, run_tracker, split_scans


def test_empty_stream():
    res = run_tracker([], ScenarioSpec().network(), TrackerConfig())
    assert res.tracks == [] and res.timings == []


def test_single_observation_has_initiation_score():
    evs = [SctEvent("start", 0, "c0", 0.2, 20, 240, 40, 100, 0.0, 5.0, feature=(1.0,)),
           SctEvent("end", 0, "c0", 3.5, 620, 240, 40, 100, 20.0, 5.0, feature=(1.0,))]
    res = run_tracker(evs, ScenarioSpec().network(), TrackerConfig())
    assert res.tracks == [(0,)]
    assert res.scores == [0.001]


def test_walkthrough_stream_end_to_end():
    res = run_tracker(walkthrough_events(), walkthrough_network(), walkthrough_config(n_scan=2), keep_forest=True)
    assert res.tracks == [(1, 2, 4), (3,)]
    check_forest(res.forest)


def test_split_scans_keeps_empty_scans_and_checks_order():
    evs = walkthrough_events()
    scans = split_scans(evs, 1.0)
    assert len(scans) == 6 and scans[3] != [] and sum(map(len, scans)) == len(evs)
    with pytest.raises(IngestionError):
        split_scans(list(reversed(evs)), 1.0)


def test_invalid_config_rejected():
    with pytest.raises(ValueError):
        Tracker(ScenarioSpec().network(), TrackerConfig(w_A=2.0))


def test_latency_summary_shape():
    spec = ScenarioSpec(seed=1)
    events, _ = generate(spec)
    res = run_tracker(events, spec.network(), TrackerConfig())
    s = res.latency_summary()
    assert s["all_scans"]["count"] == len(res.timings)
    assert 0 < s["growth_scans"]["count"] <= s["all_scans"]["count"]
    assert res.peak_leaves >= 1


@pytest.mark.parametrize("mode", list(Mode))
def test_deterministic(mode):
    spec = ScenarioSpec(seed=8, mode=mode)
    events, _ = generate(spec)
    cfg = TrackerConfig() if mode is Mode.GROUND_PLANE else TrackerConfig.nlpr_mct()
    a = run_tracker(events, spec.network(), cfg)
    b = run_tracker(events, spec.network(), cfg)
    assert a.tracks == b.tracks and a.scores == b.scores


@pytest.mark.parametrize("seed", range(10))
def test_pruned_equals_unpruned_on_small_scenarios(seed):
    spec = ScenarioSpec(seed=seed, n_targets=3, duration=120.0, n_cameras=3)
    events, truth = generate(spec)
    assert sum(map(len, truth.identities.values())) <= 10
    a = run_tracker(events, spec.network(), TrackerConfig(n_scan=10))
    b = run_tracker(events, spec.network(), TrackerConfig(n_scan=None))
    assert a.tracks == b.tracks
