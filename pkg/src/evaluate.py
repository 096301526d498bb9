#!/usr/bin/env python3
"""
Scoring of unsupervised labels against simulation ground truth

Clusters are matched to classes by exhaustive search over permutations of the
cluster indices; the permutation with the best macro-F1 wins (first in
lexicographic order on ties). When there are more clusters than classes the
surplus clusters land on reject columns that only count as misses of the
true class.
"""

import itertools
import logging
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
from sklearn import metrics

try:
    from .config import MAX_PERMUTATION_CLUSTERS
    from .errors import InvalidPermutation, LengthMismatch, TooManyClusters, ValidationError
except ImportError:
    from config import MAX_PERMUTATION_CLUSTERS
    from errors import InvalidPermutation, LengthMismatch, TooManyClusters, ValidationError

logger = logging.getLogger(__name__)

# Macro-F1 gains below this are treated as ties
_SCORE_TIE = 1e-12


@dataclass(frozen=True, eq=False)
class EvalReport:
    """Scores of the best cluster-to-class matching"""

    confusion: np.ndarray
    permutation: Tuple[int, ...]
    precision: float
    recall: float
    f1: float
    per_class: List[Tuple[float, float, float]]
    accuracy: float = 0.0
    nmi: float = 0.0
    ari: float = 0.0
    n_classes: int = 0
    n_clusters: int = 0

    def to_dict(self) -> dict:
        return {
            'confusion': self.confusion.tolist(),
            'permutation': list(self.permutation),
            'precision': self.precision,
            'recall': self.recall,
            'f1': self.f1,
            'per_class': [list(scores) for scores in self.per_class],
            'accuracy': self.accuracy,
            'nmi': self.nmi,
            'ari': self.ari,
            'n_classes': self.n_classes,
            'n_clusters': self.n_clusters,
        }


def _as_labels(labels, name: str) -> np.ndarray:
    labels = np.asarray(labels)
    if labels.ndim != 1:
        raise ValidationError(f"{name} must be one-dimensional, got shape {labels.shape}")
    if labels.size and not np.issubdtype(labels.dtype, np.integer):
        if not np.all(np.equal(np.mod(labels, 1), 0)):
            raise ValidationError(f"{name} must be integers")
    labels = labels.astype(int)
    if labels.size and labels.min() < 0:
        raise ValidationError(f"{name} must be non-negative")
    return labels


def _check_lengths(true_labels, pred_labels) -> Tuple[np.ndarray, np.ndarray]:
    true_labels = _as_labels(true_labels, "true labels")
    pred_labels = _as_labels(pred_labels, "predicted labels")
    if true_labels.size != pred_labels.size:
        raise LengthMismatch(f"{true_labels.size} true labels vs {pred_labels.size} predicted labels")
    if true_labels.size == 0:
        raise ValidationError("no labels to score")
    return true_labels, pred_labels


def _check_permutation(permutation, n_clusters: int) -> np.ndarray:
    perm = np.asarray(permutation, dtype=int).reshape(-1)
    if perm.size < n_clusters:
        raise InvalidPermutation(f"permutation covers {perm.size} clusters, labels use {n_clusters}")
    if not np.array_equal(np.sort(perm), np.arange(perm.size)):
        raise InvalidPermutation(f"{perm.tolist()} is not a bijection of 0..{perm.size - 1}")
    return perm


def confusion_matrix(true_labels, pred_labels, permutation) -> np.ndarray:
    """
    Entry (i, j) counts cells of true class i whose cluster maps to j

    The matrix is square of size max(number of classes, len(permutation)).
    """
    true_labels, pred_labels = _check_lengths(true_labels, pred_labels)
    perm = _check_permutation(permutation, int(pred_labels.max()) + 1)
    size = max(int(true_labels.max()) + 1, perm.size)
    return metrics.confusion_matrix(true_labels, perm[pred_labels], labels=np.arange(size))


def _macro_f1(confusion: np.ndarray, n_classes: int) -> float:
    tp = np.diag(confusion)[:n_classes].astype(float)
    predicted = confusion.sum(axis=0)[:n_classes]
    actual = confusion.sum(axis=1)[:n_classes]
    precision = np.divide(tp, predicted, out=np.zeros(n_classes), where=predicted > 0)
    recall = np.divide(tp, actual, out=np.zeros(n_classes), where=actual > 0)
    denom = precision + recall
    f1 = np.divide(2 * precision * recall, denom, out=np.zeros(n_classes), where=denom > 0)
    return float(f1.mean())


def best_permutation_score(true_labels, pred_labels) -> EvalReport:
    """
    Best macro-F1 over all permutations of the cluster indices

    Raises:
        TooManyClusters: more than MAX_PERMUTATION_CLUSTERS clusters or classes
        LengthMismatch: label sequences differ in length
    """
    true_labels, pred_labels = _check_lengths(true_labels, pred_labels)
    n_classes = int(true_labels.max()) + 1
    n_clusters = int(pred_labels.max()) + 1
    size = max(n_classes, n_clusters)
    if size > MAX_PERMUTATION_CLUSTERS:
        raise TooManyClusters(f"{size} labels exceed the exhaustive search bound {MAX_PERMUTATION_CLUSTERS}")

    base = metrics.confusion_matrix(true_labels, pred_labels, labels=np.arange(size))
    best_perm, best_score = None, -1.0
    for perm in itertools.permutations(range(size)):
        # column c of the base matrix moves to column perm[c]
        mapped = np.empty_like(base)
        mapped[:, list(perm)] = base
        score = _macro_f1(mapped, n_classes)
        if score > best_score + _SCORE_TIE:
            best_perm, best_score = perm, score

    mapped_pred = np.asarray(best_perm)[pred_labels]
    precision, recall, f1, _ = metrics.precision_recall_fscore_support(
        true_labels, mapped_pred, labels=np.arange(n_classes), average=None, zero_division=0)
    logger.debug(f"Best permutation {best_perm}: macro-F1 {best_score:.4f}")

    return EvalReport(
        confusion=metrics.confusion_matrix(true_labels, mapped_pred, labels=np.arange(size)),
        permutation=tuple(int(c) for c in best_perm),
        precision=float(np.mean(precision)),
        recall=float(np.mean(recall)),
        f1=float(np.mean(f1)),
        per_class=[(float(p), float(r), float(s)) for p, r, s in zip(precision, recall, f1)],
        accuracy=float(metrics.accuracy_score(true_labels, mapped_pred)),
        nmi=float(metrics.normalized_mutual_info_score(true_labels, pred_labels)),
        ari=float(metrics.adjusted_rand_score(true_labels, pred_labels)),
        n_classes=n_classes,
        n_clusters=n_clusters,
    )
