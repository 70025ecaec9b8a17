"""Indices, baselines, deviation levels, and cue assembly over a fake log."""

from __future__ import annotations

import json
import math
import random
from datetime import date, timedelta

import pytest

from senseme.aggregation import (
    ActivityIndex,
    AggregationConfig,
    Baseline,
    BaselineKey,
    PHYSICAL,
    SOCIAL,
    SOCIAL_DAY_WINDOW_ID,
    VERBAL,
    assemble_cues,
    baseline_for,
    compute_index,
    deviation_level,
)
from senseme.errors import KindMismatch, UnknownChild
from senseme.features import SecondFeature
from senseme.proximity import ProximitySighting
from senseme.schedule import WindowInstance, parse_timetable
from conftest import MONDAY, TIMETABLE_DOC, ts


def break_window(day=MONDAY, start="09:15", end="09:25", wid="b1"):
    return WindowInstance(date=day, window_id=wid, kind="break",
                          start=ts(day, start), end=ts(day, end))


def class_window(day=MONDAY, start="09:00", end="09:15", wid="c1", class_id="math"):
    return WindowInstance(date=day, window_id=wid, kind="class",
                          start=ts(day, start), end=ts(day, end), class_id=class_id)


def motion(t, value, device="d-c01"):
    return SecondFeature(device=device, t=t, kind="motion", value=value)


def audio(t, value, device="d-c01"):
    return SecondFeature(device=device, t=t, kind="audio", value=value)


class TestComputeIndex:
    def test_physical_is_mean_of_motion_counts(self):
        w = break_window()
        feats = [motion(w.start + i, v) for i, v in enumerate([0.0, 0.3, 0.3])]
        idx = compute_index(feats, w, PHYSICAL)
        assert idx.value == pytest.approx(0.2, abs=1e-12)
        assert idx.coverage == pytest.approx(3 / (w.end - w.start))

    def test_verbal_is_voiced_fraction_at_threshold(self):
        w = class_window()
        feats = [audio(w.start + i, v) for i, v in enumerate([0.0, 0.2, 0.01])]
        idx = compute_index(feats, w, VERBAL)
        assert idx.value == pytest.approx(1 / 3, abs=1e-12)

    def test_threshold_is_inclusive(self):
        w = class_window()
        feats = [audio(w.start, 0.05)]
        assert compute_index(feats, w, VERBAL).value == 1.0

    def test_features_outside_window_do_not_contribute(self):
        w = break_window()
        feats = [motion(w.end, 0.5), motion(w.start - 1, 0.5)]
        idx = compute_index(feats, w, PHYSICAL)
        assert idx.coverage == 0.0
        assert idx.value is None

    def test_boundary_seconds_half_open(self):
        w = break_window()
        feats = [motion(w.start, 0.4), motion(w.end - 1, 0.2), motion(w.end, 0.9)]
        idx = compute_index(feats, w, PHYSICAL)
        assert idx.value == pytest.approx(0.3)
        assert idx.coverage == pytest.approx(2 / (w.end - w.start))

    def test_kind_mismatch(self):
        with pytest.raises(KindMismatch):
            compute_index([], class_window(), PHYSICAL)
        with pytest.raises(KindMismatch):
            compute_index([], break_window(), VERBAL)

    def test_wrong_sensor_kind_filtered_out(self):
        w = break_window()
        idx = compute_index([audio(w.start, 0.5)], w, PHYSICAL)
        assert idx.value is None and idx.coverage == 0.0

    def test_matches_brute_force_on_random_instances(self):
        rng = random.Random(3)
        w = break_window()
        for _ in range(50):
            n = rng.randint(0, 80)
            seconds = rng.sample(range(w.start - 30, w.end + 30), n)
            feats = [motion(t, rng.uniform(0, 2)) for t in seconds]
            idx = compute_index(feats, w, PHYSICAL)
            in_window = [f.value for f in feats if w.start <= f.t < w.end]
            if not in_window:
                assert idx.value is None
            else:
                assert idx.value == pytest.approx(sum(in_window) / len(in_window), rel=1e-12)


def history_index(day, value, kind=PHYSICAL, wid="b1", class_id=None, child="c01"):
    return ActivityIndex(child=child, date=day, window_id=wid, kind=kind,
                         value=value, coverage=1.0, class_id=class_id)


class TestBaselineFor:
    KEY = BaselineKey(child="c01", kind=PHYSICAL)

    def test_mean_over_three_prior_days(self):
        history = [history_index(MONDAY - timedelta(days=d), v)
                   for d, v in [(1, 0.2), (2, 0.4), (3, 0.6)]]
        b = baseline_for(history, self.KEY, MONDAY)
        assert b is not None
        assert b.mean == pytest.approx(0.4, abs=1e-12)
        assert b.n == 3

    def test_under_min_history_unavailable(self):
        history = [history_index(MONDAY - timedelta(days=d), 0.5) for d in (1, 2)]
        assert baseline_for(history, self.KEY, MONDAY) is None

    def test_only_trailing_seven_days_count(self):
        history = [history_index(MONDAY - timedelta(days=d), 1.0) for d in range(1, 9)]
        history.append(history_index(MONDAY - timedelta(days=8), 100.0))
        b = baseline_for(history, self.KEY, MONDAY)
        assert b is not None
        # day -8 (both the 1.0 and the 100.0) is outside [as_of-7, as_of-1]
        assert b.mean == pytest.approx(1.0, abs=1e-12)
        assert b.n == 7

    def test_current_day_excluded(self):
        history = [history_index(MONDAY, 50.0)] + [
            history_index(MONDAY - timedelta(days=d), 0.1) for d in (1, 2, 3)
        ]
        b = baseline_for(history, self.KEY, MONDAY)
        assert b.mean == pytest.approx(0.1, abs=1e-12)

    def test_verbal_key_filters_by_class(self):
        key = BaselineKey(child="c01", kind=VERBAL, class_id="math")
        history = []
        for d in (1, 2, 3):
            day = MONDAY - timedelta(days=d)
            history.append(history_index(day, 0.2, kind=VERBAL, wid="c1", class_id="math"))
            history.append(history_index(day, 0.9, kind=VERBAL, wid="c2", class_id="reading"))
        b = baseline_for(history, key, MONDAY)
        assert b.mean == pytest.approx(0.2, abs=1e-12)
        assert b.n == 3

    def test_undefined_values_do_not_contribute(self):
        history = [history_index(MONDAY - timedelta(days=d), None) for d in (1, 2, 3)]
        assert baseline_for(history, self.KEY, MONDAY) is None

    def test_brute_force_oracle_on_random_histories(self):
        rng = random.Random(11)
        for _ in range(200):
            history = []
            for _ in range(rng.randint(0, 25)):
                day = MONDAY - timedelta(days=rng.randint(0, 12))
                value = None if rng.random() < 0.2 else rng.uniform(0, 3)
                history.append(history_index(day, value))
            b = baseline_for(history, self.KEY, MONDAY)

            lo, hi = MONDAY - timedelta(days=7), MONDAY - timedelta(days=1)
            contributing = [h.value for h in history
                            if h.value is not None and lo <= h.date <= hi]
            if len(contributing) < 3:
                assert b is None
            else:
                assert b.n == len(contributing)
                assert abs(b.mean - sum(contributing) / len(contributing)) < 1e-12


class TestDeviationLevel:
    def base(self, mean, n=3):
        return Baseline(key=BaselineKey("c01", PHYSICAL), mean=mean, n=n, as_of=MONDAY)

    def test_half_of_mean_is_below(self):
        d = deviation_level(0.2, self.base(0.4))
        assert d.level == "below" and d.ratio == pytest.approx(0.5)

    def test_equal_to_mean_is_typical(self):
        d = deviation_level(0.3, self.base(0.3))
        assert d.level == "typical" and d.ratio == pytest.approx(1.0)

    def test_band_edges(self):
        assert deviation_level(0.74, self.base(1.0)).level == "below"
        assert deviation_level(0.75, self.base(1.0)).level == "typical"
        assert deviation_level(1.25, self.base(1.0)).level == "typical"
        assert deviation_level(1.26, self.base(1.0)).level == "above"

    def test_zero_mean_zero_value_is_typical(self):
        d = deviation_level(0.0, self.base(0.0))
        assert d.level == "typical" and d.ratio == 1.0

    def test_zero_mean_positive_value_is_unbounded_above(self):
        d = deviation_level(0.2, self.base(0.0))
        assert d.level == "above" and math.isinf(d.ratio)

    def test_no_value_or_no_baseline(self):
        assert deviation_level(None, self.base(0.4)).level == "no_baseline"
        assert deviation_level(0.4, None).level == "no_baseline"
        assert deviation_level(None, None).ratio is None

    def test_scaling_invariance(self):
        rng = random.Random(5)
        for _ in range(100):
            v = rng.uniform(0, 2)
            mean = rng.uniform(0.01, 2)
            k = rng.uniform(0.01, 50)
            before = deviation_level(v, self.base(mean))
            after = deviation_level(k * v, self.base(k * mean))
            assert before.level == after.level
            assert after.ratio == pytest.approx(before.ratio, rel=1e-9)


class FakeSnapshot:
    """In-memory snapshot implementing the protocol cue assembly reads."""

    def __init__(self, children: dict[str, str]):
        self.children = children          # child -> device
        self.features: list[SecondFeature] = []
        self.sightings: list[ProximitySighting] = []
        self.annotations: dict[str, list[dict]] = {}

    def device_of(self, child):
        if child not in self.children:
            raise UnknownChild(child)
        return self.children[child]

    def device_to_child(self):
        return {d: c for c, d in self.children.items()}

    def features_in(self, device, kind, start, end):
        return [f for f in self.features
                if f.device == device and f.kind == kind and start <= f.t < end]

    def sightings_between(self, start, end):
        return [s for s in self.sightings if start <= s.t < end]

    def annotations_for(self, cue_key):
        return tuple(self.annotations.get(cue_key, ()))

    def last_seen_before(self, child, t):
        device = self.device_of(child)
        candidates = [f.t for f in self.features if f.device == device and f.t <= t]
        candidates += [s.t for s in self.sightings
                       if device in (s.observer, s.seen) and s.t <= t]
        return max(candidates) if candidates else None


@pytest.fixture
def school_tt():
    return parse_timetable(json.dumps(TIMETABLE_DOC))


def fill_school_day(snapshot: FakeSnapshot, day, child="c01", peer="c02",
                    motion_value=0.3, rms=0.2):
    device = snapshot.children[child]
    for start, end, kind in [("09:00", "09:15", "audio"), ("09:15", "09:25", "motion"),
                             ("09:25", "09:40", "audio"), ("09:40", "09:50", "motion")]:
        for t in range(ts(day, start), ts(day, end)):
            value = motion_value if kind == "motion" else rms
            snapshot.features.append(SecondFeature(device, t, kind, value))
    if peer is not None:
        snapshot.sightings.append(ProximitySighting(
            t=ts(day, "09:20"), observer=device, seen=snapshot.children[peer]))


class TestAssembleCues:
    def make_snapshot(self):
        return FakeSnapshot({"c01": "d-c01", "c02": "d-c02"})

    def test_full_day_yields_two_verbal_two_physical_one_social(self, school_tt):
        snap = self.make_snapshot()
        fill_school_day(snap, MONDAY)
        cues = assemble_cues(snap, school_tt, {}, "c01", MONDAY)
        kinds = sorted(c.key.kind for c in cues)
        assert kinds == [PHYSICAL, PHYSICAL, SOCIAL, VERBAL, VERBAL]
        assert [c.key.window_id for c in cues if c.key.kind != SOCIAL] == \
            ["c1", "b1", "c2", "b2"]

    def test_empty_date_gives_undefined_values_and_no_baseline(self, school_tt):
        snap = self.make_snapshot()
        cues = assemble_cues(snap, school_tt, {}, "c01", MONDAY)
        assert len(cues) == 5
        for cue in cues:
            assert cue.index.coverage == 0.0
            assert cue.index.value is None
            assert cue.deviation.level == "no_baseline"
            assert cue.low_confidence

    def test_unknown_child(self, school_tt):
        with pytest.raises(UnknownChild):
            assemble_cues(self.make_snapshot(), school_tt, {}, "zz", MONDAY)

    def test_deterministic_under_replay(self, school_tt):
        snap = self.make_snapshot()
        for back in range(0, 5):
            fill_school_day(snap, MONDAY - timedelta(days=back))
        first = assemble_cues(snap, school_tt, {}, "c01", MONDAY)
        second = assemble_cues(snap, school_tt, {}, "c01", MONDAY)
        assert first == second

    def test_baselines_and_levels_consistent(self, school_tt):
        snap = self.make_snapshot()
        # Mon/Tue/Wed/Thu of the previous week leave a clean baseline
        for back in (7, 6, 5, 4):
            fill_school_day(snap, MONDAY - timedelta(days=back), motion_value=0.4, rms=0.2)
        fill_school_day(snap, MONDAY, motion_value=0.1, rms=0.2)  # quiet break day
        cues = assemble_cues(snap, school_tt, {}, "c01", MONDAY)
        by_kind = {}
        for cue in cues:
            by_kind.setdefault(cue.key.kind, []).append(cue)

        for cue in by_kind[PHYSICAL]:
            assert cue.baseline is not None
            assert cue.baseline.mean == pytest.approx(0.4, abs=1e-12)
            assert cue.baseline.n == 8  # 4 days x 2 pooled break windows
            assert cue.deviation.level == "below"
            assert cue.deviation.ratio == pytest.approx(0.25)
        for cue in by_kind[VERBAL]:
            assert cue.baseline is not None
            assert cue.baseline.n == 4  # per-class history
            assert cue.deviation.level == "typical"
            level = deviation_level(cue.index.value, cue.baseline)
            assert level == cue.deviation

    def test_social_cue_counts_break_peers(self, school_tt):
        snap = self.make_snapshot()
        fill_school_day(snap, MONDAY)  # sighting at 09:20, inside break b1
        cues = assemble_cues(snap, school_tt, {}, "c01", MONDAY)
        social = [c for c in cues if c.key.kind == SOCIAL]
        assert len(social) == 1
        cue = social[0]
        assert cue.key.window_id == SOCIAL_DAY_WINDOW_ID
        assert cue.social.distinct_peers == 1
        assert cue.social.copresence_minutes == pytest.approx(5.0)
        assert cue.index.value == 1.0
        assert 0 < cue.index.coverage <= 1.0

    def test_class_time_sighting_does_not_count_socially(self, school_tt):
        snap = self.make_snapshot()
        device = snap.children["c01"]
        snap.features.append(SecondFeature(device, ts(MONDAY, "09:05"), "audio", 0.1))
        snap.sightings.append(ProximitySighting(
            t=ts(MONDAY, "09:05"), observer=device, seen=snap.children["c02"]))
        cues = assemble_cues(snap, school_tt, {}, "c01", MONDAY)
        social = [c for c in cues if c.key.kind == SOCIAL][0]
        assert social.social.distinct_peers == 0

    def test_location_label_is_window_start_label(self, school_tt):
        snap = self.make_snapshot()
        fill_school_day(snap, MONDAY)
        cues = assemble_cues(snap, school_tt, {}, "c01", MONDAY)
        for cue in cues:
            if cue.key.kind == VERBAL:
                assert cue.location == "in class"
            elif cue.key.kind == PHYSICAL:
                assert cue.location == "on break"

    def test_index_scaling_leaves_levels_unchanged(self, school_tt):
        for k in (0.5, 2.0, 7.0):
            plain, scaled = self.make_snapshot(), self.make_snapshot()
            for back in (7, 6, 5, 4, 0):
                fill_school_day(plain, MONDAY - timedelta(days=back),
                                motion_value=0.2 if back else 0.35, rms=0.2)
                fill_school_day(scaled, MONDAY - timedelta(days=back),
                                motion_value=(0.2 if back else 0.35) * k, rms=0.2)
            cues_plain = assemble_cues(plain, school_tt, {}, "c01", MONDAY)
            cues_scaled = assemble_cues(scaled, school_tt, {}, "c01", MONDAY)
            for a, b in zip(cues_plain, cues_scaled):
                if a.key.kind == PHYSICAL:
                    assert a.deviation.level == b.deviation.level
                    assert b.deviation.ratio == pytest.approx(a.deviation.ratio, rel=1e-9)
