from __future__ import annotations

from typing import Sequence
import matplotlib.pyplot as plt
import numpy as np

from interpred.prediction.sequence import TimestepDecision


def plot_score_heatmap(decisions: Sequence[TimestepDecision], title: str = "Fused scores"):
    """Classes x steps image of c_t, with each step's argmax marked."""
    if not decisions:
        raise ValueError("no decisions to plot")
    scores = np.stack([d.c_t for d in decisions], axis=1)
    steps = [d.t for d in decisions]
    fig, ax = plt.subplots(figsize=(max(6, 0.35 * len(steps)), 4))
    im = ax.imshow(scores, origin="lower", aspect="auto")
    ax.scatter(range(len(steps)), [d.p_t - 1 for d in decisions], marker="x", color="white", s=18)
    ax.set_xticks(range(len(steps)))
    ax.set_xticklabels(steps, fontsize="small")
    ax.set_yticks(range(scores.shape[0]))
    ax.set_yticklabels(range(1, scores.shape[0] + 1))
    ax.set_xlabel("step")
    ax.set_ylabel("class")
    ax.set_title(title)
    fig.colorbar(im, ax=ax)
    fig.tight_layout()
    return fig
