from __future__ import annotations

from typing import Mapping
import matplotlib.pyplot as plt

from interpred.evaluation.protocol import RATIOS, RatioTable


def plot_ratio_curves(tables: Mapping[str, RatioTable], title: str = "Accuracy vs observation ratio"):
    fig, ax = plt.subplots(figsize=(8, 5))
    for name, table in tables.items():
        style = "-" if name == "fused" else "--"
        ax.plot(RATIOS, table.accuracy, style, marker="o", label=name)
    ax.set_xticks(RATIOS)
    ax.set_xlim(0.05, 1.05)
    ax.set_ylim(0.0, 1.02)
    ax.set_xlabel("Observation ratio")
    ax.set_ylabel("Accuracy")
    ax.set_title(title)
    ax.grid(alpha=0.3)
    ax.legend(fontsize="small")
    fig.tight_layout()
    return fig
