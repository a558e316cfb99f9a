import json
import math

import pytest

from mhtrack.domain import DomainError, Mode, TrackerConfig
from mhtrack.simulator import ScenarioSpec, generate
from mhtrack.streamio import (
    FormatError,
    apply_overrides,
    config_document,
    event_to_record,
    format_stream,
    format_tracks,
    format_truth,
    network_from_dict,
    network_to_dict,
    observation_durations,
    parse_stream,
    parse_tracks,
    parse_truth,
    tracker_from_dict,
    tracker_to_dict,
)


@pytest.mark.parametrize("mode", ["ground_plane", "image_plane"])
def test_stream_round_trip(mode):
    events, truth = generate(ScenarioSpec(seed=2, mode=Mode(mode), n_targets=10))
    text = format_stream(events)
    back = parse_stream(text)
    assert [event_to_record(e) for e in back] == [event_to_record(e) for e in events]
    assert format_stream(back) == text
    t2 = parse_truth(format_truth(truth))
    assert t2.identities == truth.identities


def test_stream_error_carries_line_number():
    good = format_stream(generate(ScenarioSpec(seed=2, n_targets=1))[0]).splitlines()
    text = "\n".join(good[:2] + ['{"event": "start"}'] + good[2:])
    with pytest.raises(FormatError, match="line 3"):
        parse_stream(text)


def test_truth_duplicate_observation():
    with pytest.raises(FormatError):
        parse_truth('{"identity": 0, "obs_id": 1}\n{"identity": 1, "obs_id": 1}\n')


def test_tracks_round_trip_and_disjointness():
    tracks = [(0, 3), (1,), (2, 4, 5)]
    assert parse_tracks(format_tracks(tracks)) == tracks
    with pytest.raises(DomainError):
        format_tracks([(0, 1), (1,)])
    with pytest.raises(DomainError):
        parse_tracks('{"track": 0, "obs_ids": [1]}\n{"track": 1, "obs_ids": [1]}\n')


@pytest.mark.parametrize("mode", list(Mode))
def test_config_round_trip(mode):
    net = ScenarioSpec(mode=mode).network()
    cfg = TrackerConfig.nlpr_mct()
    doc = json.loads(json.dumps(config_document(cfg, net)))
    assert tracker_from_dict(doc["tracker"]) == cfg
    back = network_from_dict(doc["network"])
    assert network_to_dict(back) == network_to_dict(net)
    assert math.isnan(back.transition_mean[0, 0])


def test_overrides():
    doc = config_document(TrackerConfig(), ScenarioSpec().network())
    out = apply_overrides(doc, ["n_scan=3", "tracker.w_A=0.5", "ground_area=99", "n_scan=null"])
    assert out["tracker"]["n_scan"] is None and out["tracker"]["w_A"] == 0.5
    assert out["network"]["ground_area"] == 99
    assert doc["tracker"]["n_scan"] == 10  # input untouched
    with pytest.raises(ValueError):
        apply_overrides(doc, ["novalue"])


def test_tracker_dict_rejects_unknown_keys():
    with pytest.raises(KeyError):
        tracker_from_dict({"nope": 1})
    assert tracker_to_dict(TrackerConfig())["c0"] == 0.001


def test_observation_durations():
    events, _ = generate(ScenarioSpec(seed=4))
    d = observation_durations(events)
    assert all(v > 0 for v in d.values())
