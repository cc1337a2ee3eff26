"""Confusion counting and change-detection benchmark metrics.

Ground-truth annotations use the changedetection.net label encoding:
0 static background, 50 hard shadow (counted as background), 85 outside
the region of interest and 170 unknown motion (both excluded from every
count), 255 moving foreground.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

LABEL_STATIC = 0
LABEL_SHADOW = 50
LABEL_OUTSIDE_ROI = 85
LABEL_UNKNOWN = 170
LABEL_MOTION = 255


@dataclass
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0
    excluded: int = 0

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(
            self.tp + other.tp,
            self.fp + other.fp,
            self.tn + other.tn,
            self.fn + other.fn,
            self.excluded + other.excluded,
        )

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn + self.excluded


@dataclass
class MetricsReport:
    recall: float
    specificity: float
    fpr: float
    fnr: float
    pbc: float
    precision: float
    f_measure: float

    def as_dict(self) -> dict:
        return {
            "recall": self.recall,
            "specificity": self.specificity,
            "fpr": self.fpr,
            "fnr": self.fnr,
            "pbc": self.pbc,
            "precision": self.precision,
            "f_measure": self.f_measure,
        }


def accumulate_confusion(pred: np.ndarray, gt: np.ndarray) -> ConfusionCounts:
    """Per-pixel confusion of a boolean mask against a labeled image.

    Labels other than the five known values are treated as excluded.
    """
    p = np.asarray(pred, dtype=bool)
    g = np.asarray(gt)
    if p.shape != g.shape:
        raise ValueError("mask shape %s does not match ground truth %s"
                         % (p.shape, g.shape))
    fg = g == LABEL_MOTION
    bg = (g == LABEL_STATIC) | (g == LABEL_SHADOW)
    counted = fg | bg
    return ConfusionCounts(
        tp=int(np.count_nonzero(p & fg)),
        fp=int(np.count_nonzero(p & bg)),
        tn=int(np.count_nonzero(~p & bg)),
        fn=int(np.count_nonzero(~p & fg)),
        excluded=int(np.count_nonzero(~counted)),
    )


def _ratio(num: int, den: int) -> float:
    return num / den if den > 0 else 0.0


def compute_metrics(c: ConfusionCounts) -> MetricsReport:
    """The seven benchmark metrics; zero-denominator metrics report 0."""
    recall = _ratio(c.tp, c.tp + c.fn)
    specificity = _ratio(c.tn, c.tn + c.fp)
    fpr = _ratio(c.fp, c.fp + c.tn)
    fnr = _ratio(c.fn, c.tp + c.fn)
    pbc = 100.0 * _ratio(c.fn + c.fp, c.tp + c.fn + c.fp + c.tn)
    precision = _ratio(c.tp, c.tp + c.fp)
    f_measure = (
        2.0 * precision * recall / (precision + recall)
        if precision + recall > 0
        else 0.0
    )
    return MetricsReport(recall, specificity, fpr, fnr, pbc, precision, f_measure)


def format_report(counts: ConfusionCounts, report: MetricsReport,
                  extra: dict | None = None) -> str:
    """Flat key-value text with the seven metrics and the raw counts."""
    lines = []
    for key, value in (extra or {}).items():
        lines.append("%s %s" % (key, value))
    for key, value in (("tp", counts.tp), ("fp", counts.fp), ("tn", counts.tn),
                       ("fn", counts.fn), ("excluded", counts.excluded)):
        lines.append("%s %d" % (key, value))
    for key, value in report.as_dict().items():
        lines.append("%s %.6f" % (key, value))
    return "\n".join(lines) + "\n"
