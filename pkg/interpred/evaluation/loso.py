from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence
import logging
import warnings

import pandas as pd

from interpred.data.features import VideoRecord
from interpred.evaluation.protocol import RATIOS, RatioTable, evaluate_methods
from interpred.fusion.ranking import FusionWeights
from interpred.pipeline.engine import Bundle

logger = logging.getLogger(__name__)

TrainFn = Callable[[list[VideoRecord]], Bundle]


@dataclass(frozen=True)
class FoldResult:
    group: int
    train_ids: tuple[str, ...]
    weights: FusionWeights
    tables: dict[str, RatioTable]


@dataclass(frozen=True)
class LosoResult:
    """Fold tables and their order-fixed averages; `table` is the fused-method mean."""

    folds: list[FoldResult]
    method_tables: dict[str, RatioTable]

    @property
    def table(self) -> RatioTable:
        return self.method_tables["fused"]

    def to_frame(self) -> pd.DataFrame:
        rows = []
        for fold in self.folds:
            for method, table in fold.tables.items():
                for ratio, acc in zip(RATIOS, table.accuracy):
                    rows.append({"group": fold.group, "method": method, "ratio": ratio, "accuracy": acc})
        return pd.DataFrame(rows)


def warn_single_group_classes(dataset: Sequence[VideoRecord]) -> None:
    for label in sorted({v.label for v in dataset}):
        groups = {v.group for v in dataset if v.label == label}
        if len(groups) == 1:
            warnings.warn(
                f"every instance of class {label} is in group {groups.pop()}; "
                "that fold trains without the class",
                stacklevel=3,
            )


def loso_cv(dataset: Sequence[VideoRecord], train_fn: TrainFn) -> LosoResult:
    """
    Leave one actor group out: for each group, train on all the other groups,
    test on the held-out group, then average the tables in ascending group order.
    """
    groups = sorted({v.group for v in dataset})
    if len(groups) < 2:
        raise ValueError(f"loso_cv needs at least 2 groups, got {len(groups)}")
    warn_single_group_classes(dataset)

    folds = []
    for group in groups:
        train = [v for v in dataset if v.group != group]
        test = [v for v in dataset if v.group == group]
        logger.info("fold %d: %d train videos, %d test videos", group, len(train), len(test))
        bundle = train_fn(train)
        tables = evaluate_methods(test, bundle.models, bundle.methods())
        folds.append(
            FoldResult(
                group=group,
                train_ids=tuple(v.id for v in train),
                weights=bundle.weights,
                tables=tables,
            )
        )

    methods = [name for name in folds[0].tables if all(name in f.tables for f in folds)]
    averaged = {name: RatioTable.mean([f.tables[name] for f in folds]) for name in methods}
    return LosoResult(folds=folds, method_tables=averaged)
