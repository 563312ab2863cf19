"""Classical saliency metrics evaluated over an arbitrary pixel region.

A *region* is one of:

* ``None`` for the whole image,
* a :class:`~sieval.partition.Frame` (its bounding box),
* a tuple of slices,
* a boolean mask with the image's shape,
* a 1-D array of flat pixel indices.

Threshold sweeps use ``threshold_count`` levels ``t_j = j / (threshold_count - 1)``
and call a pixel positive iff ``pred > t_j``.
"""

from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .exceptions import EmptyRegionError, UndefinedAUCError
from .partition import Frame

DEFAULT_BETA2 = 0.3
DEFAULT_THRESHOLD_COUNT = 256


def region_values(pred, gt, region=None):
    """Return the flat prediction and ground-truth values selected by ``region``."""
    pred = np.asarray(pred, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    if region is None:
        p, g = pred.ravel(), gt.ravel()
    elif isinstance(region, Frame):
        p, g = pred[region.slices].ravel(), gt[region.slices].ravel()
    elif isinstance(region, tuple):
        p, g = pred[region].ravel(), gt[region].ravel()
    else:
        region = np.asarray(region)
        if region.dtype == bool:
            p, g = pred[region], gt[region]
        else:
            p, g = pred.ravel()[region], gt.ravel()[region]
    if p.size == 0:
        raise EmptyRegionError("region contains no pixels")
    return p, g


def region_mae(pred, gt, region=None):
    p, g = region_values(pred, gt, region)
    return float(np.abs(p - g).sum() / p.size)


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self):
        return self.tp + self.fp + self.tn + self.fn

    def __add__(self, other):
        return ConfusionCounts(
            self.tp + other.tp, self.fp + other.fp, self.tn + other.tn, self.fn + other.fn
        )


def f_beta(counts, beta2=DEFAULT_BETA2):
    """F-beta from confusion counts; 0 when the denominator vanishes."""
    if beta2 <= 0:
        raise ValueError("beta2 must be positive")
    num = (1.0 + beta2) * counts.tp
    den = num + beta2 * counts.fn + counts.fp
    return num / den if den > 0 else 0.0


@dataclass(frozen=True)
class ThresholdSweep:
    thresholds: np.ndarray
    tp: np.ndarray
    fp: np.ndarray
    tn: np.ndarray
    fn: np.ndarray
    beta2: float = DEFAULT_BETA2

    def counts(self, j):
        return ConfusionCounts(int(self.tp[j]), int(self.fp[j]), int(self.tn[j]), int(self.fn[j]))

    @property
    def positives(self):
        return int(self.tp[0] + self.fn[0])

    @property
    def negatives(self):
        return int(self.fp[0] + self.tn[0])

    @property
    def precision(self):
        den = self.tp + self.fp
        return np.divide(self.tp, den, out=np.zeros(len(den)), where=den > 0)

    @property
    def recall(self):
        den = self.tp + self.fn
        return np.divide(self.tp, den, out=np.zeros(len(den)), where=den > 0)

    @property
    def f_beta(self):
        num = (1.0 + self.beta2) * self.tp
        den = num + self.beta2 * self.fn + self.fp
        return np.divide(num, den, out=np.zeros(len(den)), where=den > 0)


def threshold_levels(threshold_count=DEFAULT_THRESHOLD_COUNT):
    if threshold_count < 2:
        raise ValueError("threshold_count must be >= 2")
    return np.arange(threshold_count) / (threshold_count - 1)


def _levels_below(p, threshold_count):
    """Number of thresholds strictly below each value in ``p``.

    Equivalent to ``(p[:, None] > thresholds).sum(1)`` without the n x T matrix.
    """
    step = threshold_count - 1
    c = np.clip(np.ceil(p * step), 0, threshold_count).astype(np.int64)
    # float rounding in p * step can land one level off; fix against the exact thresholds
    lower = np.maximum(c - 1, 0)
    c = np.where((c >= 1) & (lower / step >= p), c - 1, c)
    upper = np.minimum(c, step)
    c = np.where((c < threshold_count) & (upper / step < p), c + 1, c)
    return c


def sweep(pred, gt, region=None, beta2=DEFAULT_BETA2, threshold_count=DEFAULT_THRESHOLD_COUNT):
    """Exact per-threshold confusion counts over ``region``."""
    p, g = region_values(pred, gt, region)
    thresholds = threshold_levels(threshold_count)
    c = _levels_below(p, threshold_count)
    pos = g > 0.5
    # hist[c]: pixels positive at thresholds 0..c-1
    pos_hist = np.bincount(c[pos], minlength=threshold_count + 1)
    neg_hist = np.bincount(c[~pos], minlength=threshold_count + 1)
    tp = np.cumsum(pos_hist[::-1])[::-1][1:]
    fp = np.cumsum(neg_hist[::-1])[::-1][1:]
    n_pos = int(pos.sum())
    n_neg = int(p.size - n_pos)
    return ThresholdSweep(
        thresholds=thresholds,
        tp=tp,
        fp=fp,
        tn=n_neg - fp,
        fn=n_pos - tp,
        beta2=beta2,
    )


def mean_f(sw):
    return float(sw.f_beta.mean())


def max_f(sw):
    return float(sw.f_beta.max())


def auc_rank(pred, gt, region=None):
    """Rank-statistic AUC with half credit for ties (Mann-Whitney U / n+ n-)."""
    p, g = region_values(pred, gt, region)
    pos = g > 0.5
    n_pos = int(pos.sum())
    n_neg = p.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise UndefinedAUCError("AUC needs at least one positive and one negative pixel")
    ranks = rankdata(p, method="average")
    u = ranks[pos].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def auc_trapezoid(sw):
    """Trapezoidal area under the ROC points of a threshold sweep.

    The curve runs from (0, 0) through every threshold (highest first) to (1, 1).
    """
    n_pos, n_neg = sw.positives, sw.negatives
    if n_pos == 0 or n_neg == 0:
        raise UndefinedAUCError("AUC needs at least one positive and one negative pixel")
    tpr = np.concatenate(([0.0], sw.tp[::-1] / n_pos, [1.0]))
    fpr = np.concatenate(([0.0], sw.fp[::-1] / n_neg, [1.0]))
    return float(np.sum(np.diff(fpr) * (tpr[1:] + tpr[:-1])) / 2.0)


def adaptive_binarize(pred):
    """Foreground iff ``pred >= min(2 * mean(pred), 1)`` and ``pred > 0``."""
    pred = np.asarray(pred, dtype=np.float64)
    threshold = min(2.0 * float(pred.mean()), 1.0)
    return (pred >= threshold) & (pred > 0)


def e_measure(pred, gt):
    """Enhanced-alignment measure of the adaptively binarized prediction."""
    pred = np.asarray(pred, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    fm = adaptive_binarize(pred).astype(np.float64)
    gt_mean = float(gt.mean())
    if gt_mean == 0.0:
        enhanced = 1.0 - fm
    elif gt_mean == 1.0:
        enhanced = fm
    else:
        phi_gt = gt - gt_mean
        phi_fm = fm - fm.mean()
        den = phi_gt * phi_gt + phi_fm * phi_fm
        xi = np.divide(2.0 * phi_gt * phi_fm, den, out=np.zeros_like(den), where=den != 0)
        enhanced = 0.25 * (1.0 + xi) ** 2
    return float(enhanced.mean())
