from __future__ import annotations

import numpy as np
import pytest

from conftest import make_dataset, make_record
from interpred.evaluation.protocol import (
    NUM_RATIOS,
    RATIOS,
    RatioTable,
    evaluate,
    evaluate_methods,
    observed_length,
    predicted_labels,
    predictions_frame,
    slice_observation,
    tables_frame,
)
from interpred.fusion.ranking import FusionWeights
from interpred.numerics.random import make_rng
from interpred.prediction.sequence import predict_sequence, score_streams
from test_prediction import random_models


class TestObservation:
    def test_round_half_up_exhaustive(self):
        for n in range(1, 501):
            previous = 0
            for i in range(1, NUM_RATIOS + 1):
                expected = max(1, (2 * n * i + 10) // 20)
                assert observed_length(n, i) == expected
                assert expected >= previous
                previous = expected
            assert observed_length(n, NUM_RATIOS) == n

    def test_examples(self):
        assert observed_length(24, 1) == 2
        assert observed_length(25, 1) == 3
        assert observed_length(15, 5) == 8
        assert observed_length(3, 1) == 1

    def test_bad_ratio(self):
        with pytest.raises(ValueError):
            observed_length(10, 0)
        with pytest.raises(ValueError):
            observed_length(10, 11)

    def test_slice_lengths(self):
        video = make_record(make_rng(0), "v", 1, n=12)
        part = slice_observation(video, 3)
        assert part.n == 4
        assert part.flow_feats.shape[0] == 3
        np.testing.assert_array_equal(part.context_seq, video.context_seq[:4])
        one = slice_observation(make_record(make_rng(1), "w", 1, n=4), 1)
        assert one.n == 1 and one.flow_feats.shape[0] == 1
        assert slice_observation(video, NUM_RATIOS) is video


class TestRatioTable:
    def test_validation(self):
        with pytest.raises(ValueError):
            RatioTable(np.zeros(9))
        with pytest.raises(ValueError):
            RatioTable(np.full(10, 1.5))

    def test_mean_and_frame(self):
        a = RatioTable(np.linspace(0.1, 1.0, 10))
        b = RatioTable(np.full(10, 0.5))
        mean = RatioTable.mean([a, b])
        assert mean.at(1.0) == pytest.approx(0.75)
        frame = mean.to_frame()
        assert list(frame.columns) == ["ratio", "accuracy"]
        assert frame["ratio"].tolist() == list(RATIOS)


class TestEvaluate:
    def setup_method(self):
        self.videos = make_dataset(0, m=3, per_class=4, n=9, dim=4)
        self.models = random_models(1, 4, 3)
        self.weights = FusionWeights(np.array([0.3, 0.2, 0.4, 0.1]))

    def test_ordering_invariance(self):
        table = evaluate(self.videos, self.models, self.weights)
        shuffled = [self.videos[i] for i in make_rng(2).permutation(len(self.videos))]
        np.testing.assert_array_equal(table.accuracy, evaluate(shuffled, self.models, self.weights).accuracy)

    def test_matches_sliced_prediction(self):
        table = evaluate(self.videos, self.models, self.weights)
        for i in (1, 5, NUM_RATIOS):
            correct = []
            for v in self.videos:
                part = slice_observation(v, i)
                p_star, _ = predict_sequence(self.models, self.weights, part, upto=part.n)
                correct.append(p_star == v.label)
            assert table.accuracy[i - 1] == pytest.approx(np.mean(correct))

    def test_predicted_labels_shape(self):
        p = predicted_labels(score_streams(self.models, self.videos[0]), self.weights)
        assert p.shape == (NUM_RATIOS,)
        assert set(p.tolist()) <= {1, 2, 3}

    def test_methods_and_frames(self):
        methods = {"fused": self.weights, "average": FusionWeights.uniform()}
        tables = evaluate_methods(self.videos, self.models, methods)
        np.testing.assert_array_equal(
            tables["average"].accuracy,
            evaluate(self.videos, self.models, FusionWeights.uniform()).accuracy,
        )
        wide = tables_frame(tables)
        assert list(wide.columns) == ["ratio", "fused", "average"]

        frame = predictions_frame(self.videos, self.models, self.weights)
        assert len(frame) == len(self.videos) * NUM_RATIOS
        at_full = frame[frame["ratio"] == 1.0]
        assert at_full["correct"].mean() == pytest.approx(tables["fused"].at(1.0))

    def test_empty_test_set(self):
        with pytest.raises(ValueError):
            evaluate([], self.models, self.weights)

    def test_uninformative_model_is_near_chance(self):
        videos = make_dataset(3, m=4, per_class=100, n=3, dim=4)
        models = random_models(4, 4, 4)
        acc = evaluate(videos, models, FusionWeights.selector("spatial")).at(1.0)
        assert 0.15 < acc < 0.35
