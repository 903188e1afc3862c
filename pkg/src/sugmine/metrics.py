"""Precision/recall/F1 metrics and the paired significance test.

Class 1 (suggestive) is the positive class throughout. Undefined precision,
recall, or F1 (zero denominator) is reported as 0.0; "macro" metrics are the
unweighted mean over both classes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import stats as scipy_stats


class MetricsError(ValueError):
    """Mismatched or empty metric inputs."""


def _safe_div(num: float, den: float) -> float:
    return num / den if den > 0 else 0.0


def _f1(precision: float, recall: float) -> float:
    return _safe_div(2 * precision * recall, precision + recall)


@dataclass(frozen=True)
class ClassMetrics:
    tp: int
    fp: int
    fn: int
    tn: int
    precision_pos: float
    recall_pos: float
    f1_pos: float
    precision_neg: float
    recall_neg: float
    f1_neg: float
    macro_precision: float
    macro_recall: float
    macro_f1: float

    @classmethod
    def from_counts(cls, tp: int, fp: int, fn: int, tn: int) -> "ClassMetrics":
        p_pos = _safe_div(tp, tp + fp)
        r_pos = _safe_div(tp, tp + fn)
        p_neg = _safe_div(tn, tn + fn)
        r_neg = _safe_div(tn, tn + fp)
        f_pos = _f1(p_pos, r_pos)
        f_neg = _f1(p_neg, r_neg)
        return cls(
            tp=tp, fp=fp, fn=fn, tn=tn,
            precision_pos=p_pos, recall_pos=r_pos, f1_pos=f_pos,
            precision_neg=p_neg, recall_neg=r_neg, f1_neg=f_neg,
            macro_precision=(p_pos + p_neg) / 2,
            macro_recall=(r_pos + r_neg) / 2,
            macro_f1=(f_pos + f_neg) / 2,
        )

    @property
    def n(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    def confusion(self) -> np.ndarray:
        """2x2 matrix, rows = gold (1, 0), columns = predicted (1, 0)."""
        return np.array([[self.tp, self.fn], [self.fp, self.tn]], dtype=np.int64)

    def as_dict(self) -> dict:
        return {
            "confusion": {"tp": self.tp, "fp": self.fp, "fn": self.fn, "tn": self.tn},
            "positive": {"precision": self.precision_pos, "recall": self.recall_pos, "f1": self.f1_pos},
            "negative": {"precision": self.precision_neg, "recall": self.recall_neg, "f1": self.f1_neg},
            "macro": {"precision": self.macro_precision, "recall": self.macro_recall, "f1": self.macro_f1},
        }


def prf_metrics(predictions: Sequence[int], gold: Sequence[int]) -> ClassMetrics:
    """Counts-based metrics for binary predictions against gold labels."""
    if len(predictions) != len(gold):
        raise MetricsError(f"length mismatch: {len(predictions)} predictions vs {len(gold)} gold")
    if len(gold) == 0:
        raise MetricsError("cannot compute metrics on an empty evaluation set")
    tp = fp = fn = tn = 0
    for pred, true in zip(predictions, gold):
        if pred not in (0, 1) or true not in (0, 1):
            raise MetricsError(f"labels must be binary, got pred={pred!r} gold={true!r}")
        if true == 1 and pred == 1:
            tp += 1
        elif true == 0 and pred == 1:
            fp += 1
        elif true == 1 and pred == 0:
            fn += 1
        else:
            tn += 1
    return ClassMetrics.from_counts(tp=tp, fp=fp, fn=fn, tn=tn)


@dataclass(frozen=True)
class TTestResult:
    t_statistic: float
    p_value: float
    mean_difference: float
    degenerate: bool  # zero variance of the paired differences

    def significant(self, alpha: float = 0.05) -> bool:
        return not self.degenerate and self.p_value < alpha


def significance_test(per_fold_a: Sequence[float], per_fold_b: Sequence[float]) -> TTestResult:
    """Paired two-sided t-test on fold-level scores.

    When every paired difference is identical the variance is zero and the
    statistic is undefined; the result is flagged degenerate (t and p are
    NaN) instead of dividing by zero.
    """
    if len(per_fold_a) != len(per_fold_b):
        raise MetricsError("paired samples must have equal length")
    n = len(per_fold_a)
    if n < 2:
        raise MetricsError("need at least two folds for a paired t-test")
    diffs = np.asarray(per_fold_a, dtype=np.float64) - np.asarray(per_fold_b, dtype=np.float64)
    mean = float(diffs.mean())
    sd = float(diffs.std(ddof=1))
    if sd == 0.0:
        return TTestResult(t_statistic=math.nan, p_value=math.nan, mean_difference=mean, degenerate=True)
    t = mean / (sd / math.sqrt(n))
    p = 2.0 * float(scipy_stats.t.sf(abs(t), df=n - 1))
    return TTestResult(t_statistic=t, p_value=p, mean_difference=mean, degenerate=False)
