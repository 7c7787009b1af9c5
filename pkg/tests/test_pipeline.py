from __future__ import annotations

from dataclasses import replace

import numpy as np
import pytest

from conftest import make_dataset
from interpred.config.models import EvaluationConfig, FusionConfig
from interpred.context.regions import NUM_REGIONS
from interpred.models.classifiers import MODEL_ORDER
from interpred.pipeline.engine import (
    expected_arch,
    split_dataset,
    split_training,
    train_bundle,
    train_models,
    training_examples,
)


class TestSplits:
    def test_holdout_uses_highest_group(self, tiny_config):
        videos = make_dataset(0, m=3, per_class=8, groups=4, dim=4)
        split = split_dataset(videos, tiny_config)
        assert {v.group for v in split.test} == {3}
        ids = [v.id for v in split.train + split.validation + split.test]
        assert sorted(ids) == sorted(v.id for v in videos)
        assert len(set(ids)) == len(ids)

    def test_fusion_videos_are_stratified(self, tiny_config):
        videos = make_dataset(1, m=3, per_class=8, groups=4, dim=4)
        train, held = split_training(videos, tiny_config)
        for label in (1, 2, 3):
            assert sum(v.label == label for v in held) == 2
            assert sum(v.label == label for v in train) == 6
        again = split_training(videos, tiny_config)
        assert [v.id for v in again[1]] == [v.id for v in held]

    def test_train_pair_source_reuses_everything(self, tiny_config):
        cfg = replace(tiny_config, fusion=FusionConfig(pair_source="train"))
        videos = make_dataset(2, m=2, per_class=3, dim=4)
        train, held = split_training(videos, cfg)
        assert [v.id for v in train] == [v.id for v in held] == [v.id for v in videos]

    def test_explicit_and_bad_test_group(self, tiny_config):
        videos = make_dataset(3, m=2, per_class=6, groups=3, dim=4)
        cfg = replace(tiny_config, evaluation=EvaluationConfig(test_group=0))
        assert {v.group for v in split_dataset(videos, cfg).test} == {0}
        with pytest.raises(ValueError):
            split_dataset(videos, replace(tiny_config, evaluation=EvaluationConfig(test_group=7)))
        with pytest.raises(ValueError):
            split_dataset(make_dataset(3, m=2, per_class=3, groups=1, dim=4), tiny_config)


class TestTrainingExamples:
    def test_shapes(self):
        videos = make_dataset(4, m=2, per_class=2, n=6, dim=4)
        x, y = training_examples(videos, "spatial", 3)
        assert x.shape == (4 * 6, 4) and y.shape == (24,)
        x, _ = training_examples(videos, "spatial_structural", 3)
        assert x.shape == (24, NUM_REGIONS, 4)
        x, _ = training_examples(videos, "temporal_structural", 3)
        assert x.shape == (20, NUM_REGIONS, 4)
        x, y = training_examples(videos, "temporal", 3)
        assert x.shape == (4 * 3, 3, 4)
        np.testing.assert_array_equal(x[0], videos[0].flow_feats[0:3])

    def test_short_video_gives_one_padded_stack(self):
        videos = make_dataset(5, m=1, per_class=1, n=3, dim=4)
        x, _ = training_examples(videos, "temporal", 5)
        assert x.shape == (1, 5, 4)
        np.testing.assert_array_equal(x[0, -1], videos[0].flow_feats[-1])

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            training_examples(make_dataset(6, m=1, per_class=1, dim=4), "audio", 3)


class TestTrainBundle:
    def test_bundle_end_to_end(self, tiny_config):
        videos = make_dataset(7, m=3, per_class=8, dim=4, signal=2.0)
        bundle = train_bundle(videos, tiny_config)
        assert set(bundle.models) == set(MODEL_ORDER)
        for kind, model in bundle.models.items():
            assert model.arch() == expected_arch(kind, 4, 3, tiny_config.model)
        assert np.all(bundle.weights.w >= 0) and bundle.weights.w.sum() > 0
        methods = bundle.methods()
        assert {"fused", "average", *MODEL_ORDER} <= set(methods)

    def test_same_seed_same_models(self, tiny_config):
        videos = make_dataset(8, m=2, per_class=4, dim=4, signal=1.0)
        a = train_models(videos, tiny_config)
        b = train_models(videos, tiny_config)
        for kind in MODEL_ORDER:
            for name, arr in a[kind].params().items():
                np.testing.assert_array_equal(arr, b[kind].params()[name])

    def test_no_videos(self, tiny_config):
        with pytest.raises(ValueError):
            train_models([], tiny_config)
