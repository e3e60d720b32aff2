import random
from datetime import timedelta

import pytest

from oracles import brute_force_observation_runs
from wildtrap.errors import ValidationError
from wildtrap.store import aggregate_observations
from test_store_events import BASE, make_event


def test_close_events_form_one_observation():
    events = [make_event(0, minutes=0), make_event(1, minutes=5)]
    obs = aggregate_observations(events, 30)
    assert len(obs) == 1
    assert obs[0].event_count == 2
    assert obs[0].window_start == BASE
    assert obs[0].window_end == BASE + timedelta(minutes=5)


def test_gap_of_window_or_more_splits():
    events = [make_event(0, minutes=0), make_event(1, minutes=40)]
    assert len(aggregate_observations(events, 30)) == 2
    # boundary: exactly the window apart starts a new observation
    events = [make_event(0, minutes=0), make_event(1, minutes=30)]
    assert len(aggregate_observations(events, 30)) == 2
    events = [make_event(0, minutes=0), make_event(1, minutes=29)]
    assert len(aggregate_observations(events, 30)) == 1


def test_labels_group_independently():
    events = [
        make_event(0, label="elephant", minutes=0),
        make_event(1, label="zebra", minutes=1),
        make_event(2, label="elephant", minutes=2),
        make_event(3, label="zebra", minutes=45),
    ]
    obs = aggregate_observations(events, 30)
    by_label = {}
    for o in obs:
        by_label.setdefault(o.label, []).append(o)
    assert len(by_label["elephant"]) == 1
    assert by_label["elephant"][0].event_count == 2
    assert len(by_label["zebra"]) == 2


def test_invalid_window_rejected():
    with pytest.raises(ValidationError):
        aggregate_observations([], 0)


def test_matches_brute_force_grouping_oracle():
    rng = random.Random(2718)
    for _ in range(200):
        events = [
            make_event(i, camera=f"cam-{rng.randint(0, 2)}",
                       label=rng.choice(["elephant", "zebra", "human"]),
                       confidence=round(rng.uniform(0, 1), 2),
                       minutes=rng.randint(0, 600))
            for i in range(rng.randint(0, 40))
        ]
        window = rng.choice([5, 15, 30, 60])
        obs = aggregate_observations(events, window)
        runs = brute_force_observation_runs(events, window)
        assert len(obs) == len(runs)
        got = sorted((o.camera_id, o.label, o.window_start, o.event_count) for o in obs)
        expected = sorted((r[0].camera_id, r[0].label, r[0].detected_at, len(r)) for r in runs)
        assert got == expected
        # partition: each event in exactly one observation
        assert sum(o.event_count for o in obs) == len(events)
        assert all(o.event_count >= 1 and o.window_start <= o.window_end for o in obs)


def test_wider_window_never_increases_observation_count():
    rng = random.Random(161803)
    for _ in range(50):
        events = [
            make_event(i, camera=f"cam-{rng.randint(0, 1)}",
                       label=rng.choice(["elephant", "zebra"]),
                       minutes=rng.randint(0, 300))
            for i in range(rng.randint(1, 30))
        ]
        counts = [len(aggregate_observations(events, w)) for w in (5, 10, 30, 60, 120)]
        assert counts == sorted(counts, reverse=True)
