from __future__ import annotations

import matplotlib.pyplot as plt
import numpy as np
import pytest

from conftest import make_record
from interpred.evaluation.protocol import RatioTable
from interpred.fusion.ranking import FusionWeights
from interpred.numerics.random import make_rng
from interpred.prediction.sequence import predict_sequence
from interpred.viz.heatmaps import plot_score_heatmap
from interpred.viz.plots import plot_ratio_curves
from test_prediction import random_models


def test_ratio_curves_draw_one_line_per_method():
    tables = {
        "fused": RatioTable(np.linspace(0.3, 0.9, 10)),
        "average": RatioTable(np.linspace(0.2, 0.8, 10)),
        "spatial": RatioTable(np.full(10, 0.5)),
    }
    fig = plot_ratio_curves(tables)
    ax = fig.axes[0]
    assert [line.get_label() for line in ax.get_lines()] == list(tables)
    assert ax.get_lines()[0].get_linestyle() == "-"
    assert ax.get_lines()[1].get_linestyle() == "--"
    plt.close(fig)


def test_score_heatmap(tmp_path):
    video = make_record(make_rng(0), "v", 2, n=6, dim=4)
    _, decisions = predict_sequence(random_models(1, 4, 3), FusionWeights.uniform(), video, upto=6)
    fig = plot_score_heatmap(decisions, "v")
    image = fig.axes[0].get_images()[0].get_array()
    assert image.shape == (3, 6)
    fig.savefig(tmp_path / "h.png")
    assert (tmp_path / "h.png").stat().st_size > 0
    plt.close(fig)
    with pytest.raises(ValueError):
        plot_score_heatmap([])
