import json

import numpy as np
import pytest

from kfsearch.core import ScoreState, SemanticTargets
from kfsearch.errors import ConfigError, InvalidInputError
from kfsearch.videostream import (
    Detection,
    FileTargetPlanner,
    FrameBatch,
    ScriptedDetector,
    check_all_found,
    plan_targets_from_file,
    sample_frames,
    score_objects,
)


def fresh_mask(n, visited=()):
    mask = np.zeros(n, dtype=bool)
    for f in visited:
        mask[f] = True
    return mask


class TestSampleFrames:
    def test_batch_size_from_budget(self):
        rng = np.random.default_rng(0)
        dist = np.full(100, 0.01)
        batch = sample_frames(dist, 16, fresh_mask(100), 8, rng)
        assert len(batch) == 16
        assert batch.grid_side == 4
        assert not batch.partial
        assert len(set(batch.indices)) == 16

    def test_budget_three_gives_single_frame(self):
        rng = np.random.default_rng(0)
        dist = np.full(100, 0.01)
        batch = sample_frames(dist, 3, fresh_mask(100), 8, rng)
        assert batch.grid_side == 1
        assert len(batch) == 1

    def test_grid_capped(self):
        rng = np.random.default_rng(0)
        dist = np.full(1000, 1e-3)
        batch = sample_frames(dist, 1000, fresh_mask(1000), 8, rng)
        assert batch.grid_side == 8
        assert len(batch) == 64

    def test_all_visited_gives_empty_batch(self):
        rng = np.random.default_rng(0)
        dist = np.full(10, 0.1)
        batch = sample_frames(dist, 16, fresh_mask(10, range(10)), 8, rng)
        assert len(batch) == 0
        assert batch.partial

    def test_partial_batch_returns_all_remaining(self):
        rng = np.random.default_rng(0)
        dist = np.full(10, 0.1)
        batch = sample_frames(dist, 100, fresh_mask(10, range(7)), 8, rng)
        assert sorted(batch.indices) == [7, 8, 9]
        assert batch.partial

    def test_never_returns_visited(self):
        rng = np.random.default_rng(5)
        dist = np.full(50, 0.02)
        visited = fresh_mask(50, range(0, 50, 2))
        for _ in range(20):
            batch = sample_frames(dist, 9, visited, 3, rng)
            assert all(not visited[f] for f in batch.indices)

    def test_seeded_determinism(self):
        dist = np.random.default_rng(1).dirichlet(np.ones(200))
        a = sample_frames(dist, 25, fresh_mask(200), 5, np.random.default_rng(99))
        b = sample_frames(dist, 25, fresh_mask(200), 5, np.random.default_rng(99))
        assert a == b

    def test_zero_probability_frames_never_drawn(self):
        rng = np.random.default_rng(7)
        dist = np.zeros(20)
        dist[:10] = 0.1
        for _ in range(10):
            batch = sample_frames(dist, 4, fresh_mask(20), 2, rng)
            assert all(f < 10 for f in batch.indices)

    def test_uniform_selection_frequency(self):
        # Without-replacement draws from a uniform distribution include each
        # frame with probability n/N; check against a binomial 3-sigma band.
        n_frames, n_draw, trials = 100, 16, 10_000
        dist = np.full(n_frames, 1.0 / n_frames)
        rng = np.random.default_rng(2024)
        counts = np.zeros(n_frames)
        mask = fresh_mask(n_frames)
        for _ in range(trials):
            batch = sample_frames(dist, n_draw, mask, 4, rng)
            for f in batch.indices:
                counts[f] += 1
        p = n_draw / n_frames
        sigma = np.sqrt(p * (1 - p) * trials)
        assert np.all(np.abs(counts - p * trials) <= 3 * sigma)

    def test_weighted_draws_follow_distribution(self):
        # One draw per batch so empirical frequency tracks the weights.
        n_frames, trials = 4, 40_000
        dist = np.array([0.1, 0.2, 0.3, 0.4])
        rng = np.random.default_rng(11)
        counts = np.zeros(n_frames)
        mask = fresh_mask(n_frames)
        for _ in range(trials):
            batch = sample_frames(dist, 1, mask, 1, rng)
            counts[batch.indices[0]] += 1
        freqs = counts / trials
        sigma = np.sqrt(dist * (1 - dist) / trials)
        assert np.all(np.abs(freqs - dist) <= 4 * sigma)

    def test_remaining_budget_must_be_positive(self):
        with pytest.raises(InvalidInputError):
            sample_frames(np.full(10, 0.1), 0, fresh_mask(10), 2, np.random.default_rng(0))


class TestScoreObjects:
    TARGETS = SemanticTargets(targets=(("dog", 1.0),), cues=(("bench", 0.5),))

    def test_no_detections_scores_zero(self):
        batch = FrameBatch(indices=(3, 4), grid_side=2)
        out = score_objects([], self.TARGETS, batch)
        assert out == [(3, 0.0), (4, 0.0)]

    def test_single_target_detection(self):
        batch = FrameBatch(indices=(3,), grid_side=1)
        out = score_objects([Detection(3, "dog", 0.9)], self.TARGETS, batch)
        assert out == [(3, 0.9)]

    def test_max_over_weighted_detections(self):
        batch = FrameBatch(indices=(3,), grid_side=1)
        dets = [Detection(3, "dog", 0.6), Detection(3, "bench", 0.9)]
        out = score_objects(dets, self.TARGETS, batch)
        assert out == [(3, pytest.approx(0.6, abs=1e-15))]

    def test_unknown_object_ignored_and_logged(self, caplog):
        batch = FrameBatch(indices=(3,), grid_side=1)
        with caplog.at_level("WARNING"):
            out = score_objects([Detection(3, "cat", 0.9)], self.TARGETS, batch)
        assert out == [(3, 0.0)]
        assert "unknown object" in caplog.text

    def test_scores_stay_in_unit_interval(self):
        rng = np.random.default_rng(0)
        batch = FrameBatch(indices=tuple(range(10)), grid_side=4, partial=True)
        dets = [
            Detection(int(rng.integers(10)), "dog" if rng.random() < 0.5 else "bench",
                      float(rng.uniform(0, 1)))
            for _ in range(50)
        ]
        for _, score in score_objects(dets, self.TARGETS, batch):
            assert 0.0 <= score <= 1.0


class TestCheckAllFound:
    TARGETS = SemanticTargets(targets=(("dog", 1.0), ("car", 1.0)), cues=(("bench", 0.5),))

    def test_nothing_found(self):
        assert not check_all_found({}, self.TARGETS, 0.5)

    def test_all_targets_cues_ignored(self):
        assert check_all_found({"dog": 0.8, "car": 0.6}, self.TARGETS, 0.5)

    def test_threshold_inclusive(self):
        assert check_all_found({"dog": 0.5, "car": 0.5}, self.TARGETS, 0.5)

    def test_one_target_missing(self):
        assert not check_all_found({"dog": 0.9, "bench": 0.9}, self.TARGETS, 0.5)


class TestPlanTargetsFromFile:
    def test_minimal_file(self, tmp_path):
        path = tmp_path / "t.json"
        path.write_text(json.dumps({"targets": ["red umbrella"]}))
        targets = plan_targets_from_file(path)
        assert targets.targets == (("red umbrella", 1.0),)
        assert targets.cues == ()

    def test_default_weights(self, tmp_path):
        path = tmp_path / "t.json"
        path.write_text(
            json.dumps({"targets": [{"name": "dog", "weight": 0.8}], "cues": ["park bench"]})
        )
        targets = plan_targets_from_file(path)
        assert targets.targets == (("dog", 0.8),)
        assert targets.cues == (("park bench", 0.5),)

    def test_empty_targets_rejected(self, tmp_path):
        path = tmp_path / "t.json"
        path.write_text(json.dumps({"targets": []}))
        with pytest.raises(ConfigError):
            plan_targets_from_file(path)

    def test_duplicate_names_rejected(self, tmp_path):
        path = tmp_path / "t.json"
        path.write_text(json.dumps({"targets": ["dog"], "cues": ["dog"]}))
        with pytest.raises(ConfigError):
            plan_targets_from_file(path)

    def test_planner_wrapper(self, tmp_path):
        path = tmp_path / "t.json"
        path.write_text(json.dumps({"targets": ["dog"]}))
        planner = FileTargetPlanner(path)
        assert planner.plan("any query", 4).target_names() == ["dog"]


class TestScriptedDetector:
    def test_filters_to_request(self, tmp_path):
        path = tmp_path / "d.json"
        path.write_text(
            json.dumps(
                {
                    "5": [{"name": "dog", "confidence": 0.9}],
                    "6": [{"name": "cat", "confidence": 0.8}],
                }
            )
        )
        det = ScriptedDetector.from_file(path)
        out = det.detect([5, 6, 7], ["dog"])
        assert out == [Detection(5, "dog", 0.9)]

    def test_planted_frames_fire(self):
        script = {f: [("dog", 0.9)] for f in (100, 101, 102)}
        det = ScriptedDetector(script)
        batch = [99, 100, 101, 103]
        hits = {d.frame for d in det.detect(batch, ["dog"])}
        assert hits == {100, 101}

    def test_malformed_fixture(self, tmp_path):
        path = tmp_path / "d.json"
        path.write_text(json.dumps({"5": [{"name": "dog"}]}))
        with pytest.raises(ConfigError):
            ScriptedDetector.from_file(path)


class TestDetectionValidation:
    def test_confidence_range(self):
        with pytest.raises(InvalidInputError):
            Detection(1, "dog", 1.5)

    def test_empty_name(self):
        with pytest.raises(InvalidInputError):
            Detection(1, "", 0.5)

    def test_duplicate_batch_frames_rejected(self):
        with pytest.raises(InvalidInputError):
            FrameBatch(indices=(1, 1), grid_side=1)
