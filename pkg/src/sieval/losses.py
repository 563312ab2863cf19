"""Reference values and per-pixel weight maps for the size-invariant training objective.

The objective sums a base loss over every foreground frame and adds the
background frame's loss scaled by ``alpha``.  For pixel-separable losses that
is the same as a weighted per-pixel mean, and :func:`weight_map` materializes
those weights (normalized to unit mass) for external trainers.
"""

import enum
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .exceptions import DegeneratePartitionWarning
from .kernels import region_values
from .validation import check_pair

BCE_EPS = 1e-7


class LossKind(str, enum.Enum):
    BCE = "bce"
    MSE = "mse"
    L1 = "l1"
    DICE = "dice"
    IOU = "iou"

    @property
    def separable(self):
        return self in (LossKind.BCE, LossKind.MSE, LossKind.L1)


def pixel_loss(pred, gt, kind):
    """Elementwise loss for the separable kinds."""
    kind = LossKind(kind)
    pred = np.asarray(pred, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    if kind is LossKind.BCE:
        p = np.clip(pred, BCE_EPS, 1.0 - BCE_EPS)
        return -(gt * np.log(p) + (1.0 - gt) * np.log1p(-p))
    if kind is LossKind.MSE:
        return (pred - gt) ** 2
    if kind is LossKind.L1:
        return np.abs(pred - gt)
    raise ValueError(f"{kind.value} is not a per-pixel loss")


def frame_loss(pred, gt, region, kind):
    """Base loss over one region.

    Separable kinds average the pixel loss over the region.  Dice uses
    ``1 - 2 sum(pg) / (sum(p^2) + sum(g^2))`` and IOU uses
    ``1 - sum(pg) / (sum(p + g) - sum(pg))``; both are 0 when their
    denominator is 0 (nothing predicted, nothing labelled).
    """
    kind = LossKind(kind)
    p, g = region_values(pred, gt, region)
    if kind.separable:
        return float(pixel_loss(p, g, kind).mean())
    inter = float(np.dot(p, g))
    if kind is LossKind.DICE:
        den = float(np.dot(p, p) + np.dot(g, g))
        return 1.0 - 2.0 * inter / den if den > 0 else 0.0
    den = float(p.sum() + g.sum()) - inter
    return 1.0 - inter / den if den > 0 else 0.0


def si_loss(pred, gt, partition, kind, alpha=None):
    """Unnormalized size-invariant loss: sum of frame losses plus ``alpha`` x background loss.

    ``alpha`` defaults to the partition's separable ratio for bce/mse/l1 and
    to 0 for dice/iou.  With K = 0 the whole-image loss is returned and a
    :class:`DegeneratePartitionWarning` is emitted.
    """
    kind = LossKind(kind)
    pred, gt = check_pair(pred, gt)
    if partition.degenerate:
        warnings.warn("no salient component; using whole-image loss", DegeneratePartitionWarning, stacklevel=2)
        return frame_loss(pred, gt, None, kind)
    if alpha is None:
        alpha = partition.separable_alpha if kind.separable else 0.0
    total = sum(frame_loss(pred, gt, f, kind) for f in partition.frames)
    if alpha and partition.background_area > 0:
        total += alpha * frame_loss(pred, gt, partition.background_mask(), kind)
    return float(total)


@dataclass(frozen=True)
class WeightMap:
    values: np.ndarray
    partition: object
    image: Optional[str] = None

    @property
    def degenerate(self):
        return self.partition.degenerate

    @property
    def alpha_mode(self):
        return self.partition.alpha_mode

    @property
    def mass(self):
        return float(self.values.sum(dtype=np.float64))

    def manifest(self):
        return self.partition.manifest(image=self.image)


def weight_map(partition, image=None):
    """Per-pixel weights of the normalized size-invariant objective.

    A pixel gets ``1 / ((K + alpha) * S_k)`` from every box ``k`` containing it
    and background pixels get ``alpha / ((K + alpha) * S_back)``.  A K = 0
    partition yields the uniform ``1 / S`` map.
    """
    shape = partition.shape
    if partition.degenerate:
        return WeightMap(np.full(shape, 1.0 / (shape[0] * shape[1])), partition, image)
    alpha = partition.alpha if partition.alpha is not None else partition.separable_alpha
    norm = partition.K + alpha
    values = np.zeros(shape, dtype=np.float64)
    for f in partition.frames:
        values[f.slices] += 1.0 / (norm * f.box_area)
    if partition.background_area > 0 and alpha > 0:
        values[partition.background_mask()] = alpha / (norm * partition.background_area)
    return WeightMap(values, partition, image)
