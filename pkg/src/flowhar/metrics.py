"""Confusion matrices, accuracy, and support-weighted F1."""

from __future__ import annotations

import numpy as np

from .errors import InvalidInputError


def confusion(preds, labels, k):
    """k x k count matrix indexed [true][pred]."""
    preds = np.asarray(preds, dtype=int)
    labels = np.asarray(labels, dtype=int)
    if preds.shape != labels.shape:
        raise InvalidInputError("prediction and label lengths differ")
    if len(preds) and (min(preds.min(), labels.min()) < 0 or max(preds.max(), labels.max()) >= k):
        raise InvalidInputError("class index out of range")
    cm = np.zeros((k, k), dtype=np.int64)
    np.add.at(cm, (labels, preds), 1)
    return cm


def accuracy(cm):
    """Fraction of correctly classified windows: trace / total."""
    cm = np.asarray(cm)
    total = cm.sum()
    if total == 0:
        raise InvalidInputError("empty confusion matrix")
    return float(np.trace(cm)) / float(total)


def weighted_f1(cm):
    """Per-class F1 weighted by class support.

    F1 = sum_i w_i * 2 TP_i / (2 TP_i + FP_i + FN_i), with w_i the fraction
    of evaluated windows whose true class is i.  Classes with a zero
    denominator contribute zero.
    """
    cm = np.asarray(cm, dtype=float)
    total = cm.sum()
    if total == 0:
        raise InvalidInputError("empty confusion matrix")
    tp = np.diag(cm)
    fn = cm.sum(axis=1) - tp
    fp = cm.sum(axis=0) - tp
    denom = 2 * tp + fp + fn
    support = cm.sum(axis=1)
    w = support / total
    score = 0.0
    for i in range(cm.shape[0]):
        if denom[i] > 0:
            score += w[i] * 2 * tp[i] / denom[i]
    return float(score)
