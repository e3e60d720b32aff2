import math
import random

import pytest

from oracles import brute_force_evaluate, grid_iou, integrate_envelope
from wildtrap.errors import ValidationError
from wildtrap.evaluation import (
    DetectionRecord,
    EvalConfig,
    GroundTruthBox,
    PRPoint,
    RankedOutcome,
    average_precision,
    evaluate,
    iou,
    match_detections,
    pr_curve,
)
from wildtrap.geometry import Box


def det(image_id, label, conf, coords):
    return DetectionRecord(image_id, label, conf, Box.from_list(coords))


def gt(image_id, label, coords):
    return GroundTruthBox(image_id, label, Box.from_list(coords))


class TestIoU:
    def test_identical_boxes(self):
        b = Box(3, 4, 10, 12)
        assert iou(b, b) == 1.0

    def test_disjoint_boxes(self):
        assert iou(Box(0, 0, 5, 5), Box(6, 6, 10, 10)) == 0.0

    def test_touching_edges_are_disjoint(self):
        assert iou(Box(0, 0, 5, 5), Box(5, 0, 10, 5)) == 0.0

    def test_half_overlap(self):
        # 50 / 150, frozen against the pixel-grid count
        a, b = Box(0, 0, 10, 10), Box(5, 0, 15, 10)
        assert iou(a, b) == pytest.approx(1 / 3, abs=1e-12)
        assert grid_iou((0, 0, 10, 10), (5, 0, 15, 10)) == pytest.approx(1 / 3, abs=1e-12)

    def test_symmetry_and_bounds_random(self):
        rng = random.Random(1234)
        for _ in range(500):
            a = _random_box(rng)
            b = _random_box(rng)
            v = iou(a, b)
            assert v == iou(b, a)
            assert 0.0 <= v <= 1.0
            assert iou(a, a) == 1.0


def _random_box(rng, limit=64):
    x0 = rng.randint(0, limit - 2)
    y0 = rng.randint(0, limit - 2)
    x1 = rng.randint(x0 + 1, limit)
    y1 = rng.randint(y0 + 1, limit)
    return Box(x0, y0, x1, y1)


class TestMatching:
    def test_higher_confidence_wins_shared_gt(self):
        dets = [det(1, "zebra", 0.7, [1, 1, 9, 9]), det(1, "zebra", 0.9, [0, 0, 10, 10])]
        gts = [gt(1, "zebra", [0, 0, 10, 10])]
        outcomes = match_detections(dets, gts)
        # ranked order: det index 1 (0.9) first and it takes the GT
        assert outcomes[0].det_index == 1 and outcomes[0].is_tp
        assert outcomes[1].det_index == 0 and not outcomes[1].is_tp

    def test_threshold_boundary_strict_geq(self):
        # IoU 0.49 below a 0.5 threshold is a FP; exactly 0.5 is a TP
        below = match_detections(
            [det(1, "x", 0.9, [0, 0, 100, 49])], [gt(1, "x", [0, 0, 100, 100])],
        )
        assert not below[0].is_tp and below[0].iou == pytest.approx(0.49)
        at = match_detections(
            [det(1, "x", 0.9, [0, 0, 100, 50])], [gt(1, "x", [0, 0, 100, 100])],
        )
        assert at[0].is_tp and at[0].iou == pytest.approx(0.5)

    def test_zero_detections(self):
        assert match_detections([], [gt(1, "x", [0, 0, 4, 4])]) == []

    def test_gt_never_matched_twice(self):
        rng = random.Random(77)
        for _ in range(100):
            dets = [det(1, "x", round(rng.uniform(0.05, 0.99), 2),
                        _random_box(rng).as_list()) for _ in range(rng.randint(0, 12))]
            gts = [gt(1, "x", _random_box(rng).as_list()) for _ in range(rng.randint(0, 6))]
            outcomes = match_detections(dets, gts)
            matched = [o.matched_gt_index for o in outcomes if o.is_tp]
            assert len(matched) == len(set(matched))
            assert len(matched) <= min(len(dets), len(gts))


class TestPRCurve:
    def test_hand_worked_tp_fp_tp(self):
        ranked = [RankedOutcome(0.9, True), RankedOutcome(0.8, False), RankedOutcome(0.7, True)]
        points = pr_curve(ranked, n_ground_truth=2)
        assert points == [
            PRPoint(0.5, 1.0, 0.9),
            PRPoint(0.5, 0.5, 0.8),
            PRPoint(1.0, 2 / 3, 0.7),
        ]

    def test_all_tp_precision_one(self):
        ranked = [RankedOutcome(0.9 - i * 0.1, True) for i in range(4)]
        points = pr_curve(ranked, 4)
        assert all(p.precision == 1.0 for p in points)
        assert points[-1].recall == 1.0

    def test_all_fp(self):
        ranked = [RankedOutcome(0.9, False), RankedOutcome(0.8, False), RankedOutcome(0.7, False)]
        points = pr_curve(ranked, 3)
        assert [p.precision for p in points] == [0.0, 0.0, 0.0]
        assert all(p.recall == 0.0 for p in points)

    def test_zero_ground_truth_recall_is_zero(self):
        points = pr_curve([RankedOutcome(0.9, False)], 0)
        assert points == [PRPoint(0.0, 0.0, 0.9)]

    def test_negative_gt_rejected(self):
        with pytest.raises(ValidationError):
            pr_curve([], -1)

    def test_recall_non_decreasing_random(self):
        rng = random.Random(5)
        for _ in range(200):
            n_gt = rng.randint(1, 10)
            tps = 0
            ranked = []
            conf = 1.0
            for _ in range(rng.randint(0, 15)):
                conf -= rng.random() * 0.05
                hit = rng.random() < 0.5 and tps < n_gt
                tps += hit
                ranked.append(RankedOutcome(max(conf, 0.0), hit))
            points = pr_curve(ranked, n_gt)
            recalls = [p.recall for p in points]
            assert recalls == sorted(recalls)


class TestAveragePrecision:
    def test_single_tp_one_gt(self):
        assert average_precision(pr_curve([RankedOutcome(0.9, True)], 1)) == 1.0

    def test_hand_worked_envelope(self):
        ranked = [RankedOutcome(0.9, True), RankedOutcome(0.8, False), RankedOutcome(0.7, True)]
        points = pr_curve(ranked, 2)
        ap = average_precision(points, "all_points")
        assert ap == pytest.approx(0.5 * 1.0 + 0.5 * (2 / 3), abs=1e-12)

    def test_no_detections(self):
        assert average_precision([]) == 0.0

    def test_eleven_point_perfect(self):
        points = pr_curve([RankedOutcome(0.9, True), RankedOutcome(0.8, True)], 2)
        assert average_precision(points, "eleven_point") == pytest.approx(1.0)

    def test_eleven_point_partial(self):
        # one TP of two GTs: interpolated precision 1.0 up to recall 0.5, 0 beyond
        points = pr_curve([RankedOutcome(0.9, True)], 2)
        assert average_precision(points, "eleven_point") == pytest.approx(6 / 11)

    def test_matches_interval_scan_oracle_random(self):
        rng = random.Random(99)
        for _ in range(300):
            n_gt = rng.randint(1, 8)
            ranked = []
            hits = 0
            for _ in range(rng.randint(0, 12)):
                hit = rng.random() < 0.4 and hits < n_gt
                hits += hit
                ranked.append(RankedOutcome(round(rng.uniform(0.05, 0.99), 2), hit))
            ranked.sort(key=lambda r: -r.confidence)
            points = pr_curve(ranked, n_gt)
            ap = average_precision(points, "all_points")
            oracle = integrate_envelope([(p.recall, p.precision) for p in points])
            assert ap == pytest.approx(oracle, abs=1e-12)

    def test_envelope_non_increasing_and_fp_removal_random(self):
        rng = random.Random(31)
        for _ in range(200):
            n_gt = rng.randint(1, 6)
            ranked = []
            hits = 0
            for _ in range(rng.randint(1, 12)):
                hit = rng.random() < 0.5 and hits < n_gt
                hits += hit
                ranked.append(RankedOutcome(round(rng.uniform(0.05, 0.99), 3), hit))
            ranked.sort(key=lambda r: -r.confidence)
            points = pr_curve(ranked, n_gt)
            env = []
            best = 0.0
            for p in reversed(points):
                best = max(best, p.precision)
                env.append(best)
            env.reverse()
            for earlier, later in zip(env, env[1:]):
                assert earlier >= later
            ap = average_precision(points, "all_points")
            fp_positions = [i for i, r in enumerate(ranked) if not r.is_tp]
            if fp_positions:
                drop = rng.choice(fp_positions)
                thinned = ranked[:drop] + ranked[drop + 1:]
                ap_thinned = average_precision(pr_curve(thinned, n_gt), "all_points")
                assert ap_thinned >= ap - 1e-12


class TestEvaluate:
    def test_perfect_detector_map_is_one(self):
        gts = [gt(1, "elephant", [0, 0, 50, 40]), gt(1, "zebra", [60, 10, 90, 40]),
               gt(2, "elephant", [5, 5, 25, 25])]
        dets = [det(g.image_id, g.label, 1.0, g.bbox.as_list()) for g in gts]
        report = evaluate(dets, gts)
        assert report.map == 1.0
        assert all(c.ap == 1.0 for c in report.per_class)

    def test_map_is_arithmetic_mean(self):
        # class a: perfect single match; class b: one FP then one TP of one GT
        gts = [gt(1, "a", [0, 0, 10, 10]), gt(1, "b", [20, 20, 30, 30])]
        dets = [
            det(1, "a", 0.9, [0, 0, 10, 10]),
            det(1, "b", 0.9, [40, 40, 50, 50]),
            det(1, "b", 0.8, [20, 20, 30, 30]),
        ]
        report = evaluate(dets, gts)
        by_label = {c.label: c.ap for c in report.per_class}
        assert by_label["a"] == 1.0
        assert by_label["b"] == pytest.approx(0.5)
        assert report.map == pytest.approx(0.75)

    def test_unknown_label_excluded_from_map(self):
        gts = [gt(1, "a", [0, 0, 10, 10])]
        dets = [det(1, "a", 0.9, [0, 0, 10, 10]), det(1, "ghost", 0.99, [0, 0, 5, 5])]
        report = evaluate(dets, gts)
        assert report.map == 1.0
        assert report.excluded == [
            {"label": "ghost", "n_detections": 1, "reason": "no_ground_truth"}
        ]

    def test_zero_gt_class_reported_separately(self):
        gts = [gt(1, "a", [0, 0, 10, 10])]
        report = evaluate([det(1, "b", 0.5, [0, 0, 4, 4])], gts)
        assert [c.label for c in report.per_class] == ["a"]
        assert report.excluded[0]["label"] == "b"

    def test_empty_everything(self):
        report = evaluate([], [])
        assert report.map == 0.0
        assert report.per_class == []
        assert report.combined_pr_points == []

    def test_matches_brute_force_on_random_instances(self):
        rng = random.Random(2024)
        labels = ["elephant", "zebra", "rhino", "human", "vehicle"]
        for _ in range(60):
            raw_gts, raw_dets = _random_instance(rng, labels)
            report = evaluate(
                [det(d["image_id"], d["label"], d["confidence"], list(d["bbox"]))
                 for d in raw_dets],
                [gt(g["image_id"], g["label"], list(g["bbox"])) for g in raw_gts],
            )
            reference = brute_force_evaluate(raw_dets, raw_gts, iou_threshold=0.5)
            assert report.map == pytest.approx(reference["map"], abs=1e-9)
            for cls in report.per_class:
                assert cls.ap == pytest.approx(reference["per_class"][cls.label], abs=1e-9)

    def test_confidence_tie_break_is_deterministic(self):
        gts = [gt(1, "a", [0, 0, 10, 10]), gt(2, "a", [0, 0, 10, 10])]
        dets = [
            det(2, "a", 0.5, [0, 0, 10, 10]),
            det(1, "a", 0.5, [2, 2, 12, 12]),
        ]
        first = evaluate(dets, gts)
        second = evaluate(dets, gts)
        assert first.per_class[0].pr_points == second.per_class[0].pr_points
        assert first.map == second.map


def _random_instance(rng, labels):
    n_images = rng.randint(1, 6)
    n_labels = rng.randint(1, min(5, len(labels)))
    chosen = rng.sample(labels, n_labels)
    gts = []
    for image_id in range(1, n_images + 1):
        for label in chosen:
            for _ in range(rng.randint(0, 3)):
                gts.append({"image_id": image_id, "label": label,
                            "bbox": _int_box(rng)})
    dets = []
    for _ in range(rng.randint(0, 20)):
        image_id = rng.randint(1, n_images)
        label = rng.choice(chosen)
        if gts and rng.random() < 0.6:
            base = rng.choice([g for g in gts if g["label"] == label] or gts)
            bbox = _jittered(rng, base["bbox"])
            image_id = base["image_id"]
        else:
            bbox = _int_box(rng)
        dets.append({"image_id": image_id, "label": label,
                     "confidence": round(rng.uniform(0.05, 0.99), 2), "bbox": bbox})
    return gts, dets


def _int_box(rng, limit=64):
    x0 = rng.randint(0, limit - 8)
    y0 = rng.randint(0, limit - 8)
    return (x0, y0, x0 + rng.randint(4, 8), y0 + rng.randint(4, 8))


def _jittered(rng, bbox, limit=64):
    dx = rng.randint(-3, 3)
    dy = rng.randint(-3, 3)
    x0, y0, x1, y1 = bbox
    x0 = min(max(x0 + dx, 0), limit - 1)
    y0 = min(max(y0 + dy, 0), limit - 1)
    x1 = min(max(x1 + dx, x0 + 1), limit)
    y1 = min(max(y1 + dy, y0 + 1), limit)
    return (x0, y0, x1, y1)


def test_config_validation():
    with pytest.raises(ValidationError):
        EvalConfig(iou_threshold=0.0)
    with pytest.raises(ValidationError):
        EvalConfig(interpolation="midpoint")
    assert EvalConfig().iou_threshold == 0.5


def test_map_stays_in_unit_interval_random():
    rng = random.Random(404)
    labels = ["a", "b", "c"]
    for _ in range(50):
        raw_gts, raw_dets = _random_instance(rng, labels)
        report = evaluate(
            [det(d["image_id"], d["label"], d["confidence"], list(d["bbox"])) for d in raw_dets],
            [gt(g["image_id"], g["label"], list(g["bbox"])) for g in raw_gts],
        )
        assert 0.0 <= report.map <= 1.0
        assert not math.isnan(report.map)
