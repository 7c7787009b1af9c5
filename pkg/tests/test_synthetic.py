from __future__ import annotations

import numpy as np
import pytest

from interpred.evaluation.synthetic import CLASS_SCRIPTS, MAX_CLASSES, generate_synthetic


def _left_dx(video) -> float:
    """Mean horizontal flow inside the left actor box over the video."""
    total = []
    for t in range(video.n - 1):
        box = video.boxes[t][0]
        total.append(video.flows[t, box.y_min : box.y_max, box.x_min : box.x_max, 0].mean())
    return float(np.mean(total))


class TestGenerateSynthetic:
    def test_same_seed_same_videos(self):
        a = generate_synthetic(3, 2, 6, seed=5, width=64, height=48)
        b = generate_synthetic(3, 2, 6, seed=5, width=64, height=48)
        for va, vb in zip(a, b):
            assert va.id == vb.id
            np.testing.assert_array_equal(va.frames, vb.frames)
            np.testing.assert_array_equal(va.flows, vb.flows)
        c = generate_synthetic(3, 2, 6, seed=6, width=64, height=48)
        assert not np.array_equal(a[0].frames, c[0].frames)

    def test_ids_labels_groups(self):
        videos = generate_synthetic(4, 5, 4, seed=0, groups=3, width=64, height=48)
        assert len(videos) == 20
        assert [v.label for v in videos[:5]] == [1] * 5
        assert videos[7].id == "c2_v002"
        assert [v.group for v in videos[:5]] == [0, 1, 2, 0, 1]

    def test_shapes_and_boxes_in_frame(self):
        for v in generate_synthetic(MAX_CLASSES, 1, 10, seed=1):
            assert v.frames.shape == (10, 64, 96, 3)
            assert v.flows.shape == (9, 64, 96, 2)
            assert len(v.boxes) == 10
            assert v.frames.min() >= 0 and v.frames.max() <= 255
            for left, right in v.boxes:
                for box in (left, right):
                    assert 0 <= box.x_min < box.x_max <= 96
                    assert 0 <= box.y_min < box.y_max <= 64

    def test_approach_and_depart_move_left_actor(self):
        videos = generate_synthetic(2, 4, 12, seed=2)
        approach = [v for v in videos if v.label == CLASS_SCRIPTS.index("approach") + 1]
        depart = [v for v in videos if v.label == CLASS_SCRIPTS.index("depart") + 1]
        assert all(_left_dx(v) > 0 for v in approach)
        assert all(_left_dx(v) < 0 for v in depart)

    def test_bad_arguments(self):
        with pytest.raises(ValueError):
            generate_synthetic(0, 1, 4, seed=0)
        with pytest.raises(ValueError):
            generate_synthetic(MAX_CLASSES + 1, 1, 4, seed=0)
        with pytest.raises(ValueError):
            generate_synthetic(2, 1, 1, seed=0)
