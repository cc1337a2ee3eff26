import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bgsvd.metrics import (
    ConfusionCounts,
    accumulate_confusion,
    compute_metrics,
    format_report,
)


def confusion_oracle(pred, gt):
    """Scalar per-pixel loop."""
    c = ConfusionCounts()
    for p, g in zip(pred.ravel(), gt.ravel()):
        if g in (85, 170):
            c.excluded += 1
        elif g == 255:
            if p:
                c.tp += 1
            else:
                c.fn += 1
        elif g in (0, 50):
            if p:
                c.fp += 1
            else:
                c.tn += 1
        else:
            c.excluded += 1
    return c


class TestAccumulate:
    def test_perfect_binary_prediction(self):
        gt = np.zeros((6, 6), dtype=np.uint8)
        gt[2:4, 2:4] = 255
        pred = gt == 255
        c = accumulate_confusion(pred, gt)
        assert c.fp == 0 and c.fn == 0
        assert c.tp == 4 and c.tn == 32

    def test_empty_prediction_all_foreground(self):
        gt = np.full((4, 5), 255, dtype=np.uint8)
        c = accumulate_confusion(np.zeros((4, 5), bool), gt)
        assert c.fn == 20 and c.tp == 0

    def test_matches_loop_oracle(self):
        rng = np.random.default_rng(0)
        gt = rng.choice([0, 50, 85, 170, 255], size=(13, 11)).astype(np.uint8)
        pred = rng.random((13, 11)) > 0.5
        got = accumulate_confusion(pred, gt)
        assert got == confusion_oracle(pred, gt)

    def test_shadow_counts_as_background(self):
        gt = np.full((2, 2), 50, dtype=np.uint8)
        c = accumulate_confusion(np.array([[True, False], [False, False]]), gt)
        assert c.fp == 1 and c.tn == 3

    def test_pixel_budget(self):
        rng = np.random.default_rng(1)
        gt = rng.choice([0, 50, 85, 170, 255], size=(9, 9)).astype(np.uint8)
        c = accumulate_confusion(rng.random((9, 9)) > 0.3, gt)
        assert c.total == 81

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            accumulate_confusion(np.zeros((2, 2), bool), np.zeros((3, 2), np.uint8))

    def test_addition(self):
        a = ConfusionCounts(1, 2, 3, 4, 5)
        b = ConfusionCounts(10, 20, 30, 40, 50)
        assert a + b == ConfusionCounts(11, 22, 33, 44, 55)


class TestMetrics:
    def test_perfect(self):
        r = compute_metrics(ConfusionCounts(tp=10, tn=90))
        assert r.recall == 1.0 and r.precision == 1.0 and r.f_measure == 1.0
        assert r.pbc == 0.0 and r.fpr == 0.0 and r.fnr == 0.0

    def test_reference_row(self):
        # recall 0.936 and precision 0.973 combine to an F-measure of 0.954
        counts = ConfusionCounts(tp=936000, fn=64000, fp=25973, tn=10**7)
        r = compute_metrics(counts)
        assert abs(r.recall - 0.936) < 5e-4
        assert abs(r.precision - 0.973) < 5e-4
        assert abs(r.f_measure - 0.954) < 5e-4

    def test_uniform_counts(self):
        r = compute_metrics(ConfusionCounts(tp=1, fp=1, tn=1, fn=1))
        assert r.recall == 0.5 and r.precision == 0.5 and r.f_measure == 0.5
        assert r.pbc == 50.0

    def test_zero_denominators_flagged_as_zero(self):
        r = compute_metrics(ConfusionCounts())
        assert r.recall == 0.0 and r.precision == 0.0 and r.f_measure == 0.0

    @given(
        tp=st.integers(0, 10**6), fp=st.integers(0, 10**6),
        tn=st.integers(0, 10**6), fn=st.integers(0, 10**6),
    )
    @settings(max_examples=200, deadline=None)
    def test_consistency_identities(self, tp, fp, tn, fn):
        r = compute_metrics(ConfusionCounts(tp, fp, tn, fn))
        if fp + tn > 0:
            assert abs(r.fpr + r.specificity - 1.0) < 1e-12
        if tp + fn > 0:
            assert abs(r.fnr + r.recall - 1.0) < 1e-12
        assert 0.0 <= r.pbc <= 100.0
        for value in (r.recall, r.specificity, r.fpr, r.fnr, r.precision, r.f_measure):
            assert 0.0 <= value <= 1.0


def test_format_report_layout():
    counts = ConfusionCounts(tp=3, fp=1, tn=5, fn=1, excluded=2)
    text = format_report(counts, compute_metrics(counts), extra={"sequence": "x"})
    lines = dict(l.split(" ", 1) for l in text.strip().splitlines())
    assert lines["sequence"] == "x"
    assert lines["tp"] == "3" and lines["excluded"] == "2"
    assert float(lines["recall"]) == pytest.approx(0.75)
    for key in ("recall", "specificity", "fpr", "fnr", "pbc", "precision", "f_measure"):
        assert key in lines
