from __future__ import annotations

from dataclasses import replace

import numpy as np
import pytest

from conftest import make_dataset
from interpred.evaluation.loso import loso_cv
from interpred.evaluation.protocol import RatioTable, evaluate
from interpred.fusion.ranking import FusionWeights
from interpred.pipeline.engine import Bundle
from test_prediction import random_models, zero_models


class _RecordingTrainer:
    def __init__(self, models):
        self.models = models
        self.calls: list[set[str]] = []

    def __call__(self, train):
        self.calls.append({v.id for v in train})
        return Bundle(models=self.models, weights=FusionWeights.uniform())


class TestLoso:
    def test_needs_two_groups(self):
        videos = make_dataset(0, m=2, per_class=3, groups=1, dim=4)
        with pytest.raises(ValueError, match="at least 2 groups"):
            loso_cv(videos, _RecordingTrainer(zero_models(4, 2)))

    def test_folds_never_train_on_the_test_group(self):
        videos = make_dataset(1, m=3, per_class=6, groups=3, dim=4)
        trainer = _RecordingTrainer(zero_models(4, 3))
        result = loso_cv(videos, trainer)
        assert [f.group for f in result.folds] == [0, 1, 2]
        for fold, seen in zip(result.folds, trainer.calls):
            held = {v.id for v in videos if v.group == fold.group}
            assert seen.isdisjoint(held)
            assert seen | held == {v.id for v in videos}
            assert set(fold.train_ids) == seen

    def test_average_of_fold_tables(self):
        videos = make_dataset(2, m=3, per_class=4, groups=2, dim=4, n=5)
        models = random_models(3, 4, 3)
        result = loso_cv(videos, _RecordingTrainer(models))
        per_group = [
            evaluate([v for v in videos if v.group == g], models, FusionWeights.uniform()) for g in (0, 1)
        ]
        np.testing.assert_allclose(result.table.accuracy, RatioTable.mean(per_group).accuracy)
        assert set(result.method_tables) >= {"fused", "average", "spatial", "temporal_structural"}

    def test_uniform_models_score_class_one_share(self):
        videos = make_dataset(4, m=3, per_class=4, groups=2, dim=4, n=5)
        result = loso_cv(videos, _RecordingTrainer(zero_models(4, 3)))
        np.testing.assert_allclose(result.table.accuracy, 1 / 3)
        frame = result.to_frame()
        assert len(frame) == 2 * len(result.folds[0].tables) * 10

    def test_group_ids_do_not_matter(self):
        videos = make_dataset(5, m=3, per_class=4, groups=2, dim=4, n=5)
        relabelled = [replace(v, group={0: 9, 1: 4}[v.group]) for v in videos]
        models = random_models(6, 4, 3)
        a = loso_cv(videos, _RecordingTrainer(models))
        b = loso_cv(relabelled, _RecordingTrainer(models))
        np.testing.assert_allclose(a.table.accuracy, b.table.accuracy)

    def test_single_group_class_warns(self):
        videos = make_dataset(7, m=2, per_class=4, groups=2, dim=4)
        videos = [v for v in videos if not (v.label == 2 and v.group == 1)]
        with pytest.warns(UserWarning, match="class 2"):
            loso_cv(videos, _RecordingTrainer(zero_models(4, 2)))
