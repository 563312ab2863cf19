"""Size-invariant metrics built from per-frame kernel values.

Every foreground frame contributes with the same constant weight, so a small
object counts as much as a large one.  SI-MAE also adds the background frame
with weight ``alpha``; SI-F and SI-AUC average over foreground frames only.
"""

from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import kernels
from .exceptions import UndefinedAUCError
from .partition import AlphaMode, partition_mask
from .validation import check_pair

ALL_METRICS = ("mae", "si_mae", "auc", "si_auc", "f_mean", "si_f_mean", "f_max", "si_f_max", "e_m")


@dataclass(frozen=True)
class MetricConfig:
    beta2: float = kernels.DEFAULT_BETA2
    threshold_count: int = kernels.DEFAULT_THRESHOLD_COUNT
    connectivity: int = 8
    binarize_threshold: int = 128
    alpha_mode: str = "separable"
    min_area: int = 0
    metrics: tuple = ALL_METRICS

    def __post_init__(self):
        if self.beta2 <= 0:
            raise ValueError("beta2 must be positive")
        if self.threshold_count < 2:
            raise ValueError("threshold_count must be >= 2")
        if self.connectivity not in (4, 8):
            raise ValueError("connectivity must be 4 or 8")
        unknown = set(self.metrics) - set(ALL_METRICS)
        if unknown:
            raise ValueError(f"unknown metrics: {sorted(unknown)}")
        # normalizes e.g. 'FIXED:1' and validates the value
        object.__setattr__(self, "alpha_mode", str(AlphaMode.parse(self.alpha_mode)))
        object.__setattr__(self, "metrics", tuple(m for m in ALL_METRICS if m in self.metrics))

    def to_dict(self):
        d = asdict(self)
        d["metrics"] = list(self.metrics)
        return d


@dataclass
class FrameMetrics:
    id: int
    box_area: int
    object_pixels: int
    mae: float
    f_mean: float
    f_max: float
    auc: Optional[float]


@dataclass
class ImageMetrics:
    image: Optional[str] = None
    width: int = 0
    height: int = 0
    K: int = 0
    alpha: Optional[float] = None
    mae: Optional[float] = None
    si_mae: Optional[float] = None
    auc: Optional[float] = None
    si_auc: Optional[float] = None
    f_mean: Optional[float] = None
    si_f_mean: Optional[float] = None
    f_max: Optional[float] = None
    si_f_max: Optional[float] = None
    e_m: Optional[float] = None
    excluded_frames_auc: int = 0
    degenerate: list = field(default_factory=list)
    frames: list = field(default_factory=list)

    def to_dict(self):
        return asdict(self)


def frame_metrics(pred, gt, partition, beta2=kernels.DEFAULT_BETA2,
                  threshold_count=kernels.DEFAULT_THRESHOLD_COUNT):
    """Per-frame MAE, mean/max F and AUC (``None`` for single-class boxes)."""
    out = []
    for frame in partition.frames:
        p, g = kernels.region_values(pred, gt, frame)
        sw = kernels.sweep(p, g, beta2=beta2, threshold_count=threshold_count)
        try:
            auc = kernels.auc_rank(p, g)
        except UndefinedAUCError:
            auc = None
        out.append(
            FrameMetrics(
                id=frame.id,
                box_area=frame.box_area,
                object_pixels=frame.object_pixels,
                mae=kernels.region_mae(p, g),
                f_mean=kernels.mean_f(sw),
                f_max=kernels.max_f(sw),
                auc=auc,
            )
        )
    return out


def _combine_mae(frame_maes, background_mae, partition):
    alpha = partition.alpha
    total = sum(frame_maes)
    if partition.background_area > 0 and alpha:
        total += alpha * background_mae
    return total / (partition.K + alpha)


def si_mae(pred, gt, partition):
    """Size-invariant MAE; falls back to whole-image MAE when K = 0."""
    pred, gt = check_pair(pred, gt)
    if partition.degenerate:
        return kernels.region_mae(pred, gt)
    maes = [kernels.region_mae(pred, gt, f) for f in partition.frames]
    bg = kernels.region_mae(pred, gt, partition.background_mask()) if partition.background_area else 0.0
    return _combine_mae(maes, bg, partition)


def si_f(pred, gt, partition, variant="mean", beta2=kernels.DEFAULT_BETA2,
         threshold_count=kernels.DEFAULT_THRESHOLD_COUNT):
    """Mean over foreground frames of the per-frame mean or max F; ``None`` when K = 0."""
    if variant not in ("mean", "max"):
        raise ValueError("variant must be 'mean' or 'max'")
    pred, gt = check_pair(pred, gt)
    if partition.degenerate:
        return None
    reduce = kernels.mean_f if variant == "mean" else kernels.max_f
    values = [
        reduce(kernels.sweep(pred, gt, f, beta2=beta2, threshold_count=threshold_count))
        for f in partition.frames
    ]
    return float(np.mean(values))


def si_auc(pred, gt, partition):
    """Mean frame AUC over frames holding both classes.

    Returns ``(value, excluded)``; ``value`` is ``None`` if every frame was excluded.
    """
    pred, gt = check_pair(pred, gt)
    values, excluded = [], 0
    for f in partition.frames:
        try:
            values.append(kernels.auc_rank(pred, gt, f))
        except UndefinedAUCError:
            excluded += 1
    return (float(np.mean(values)) if values else None), excluded


def global_metrics(pred, gt, beta2=kernels.DEFAULT_BETA2, threshold_count=kernels.DEFAULT_THRESHOLD_COUNT):
    """Whole-image MAE, mean/max F, AUC (``None`` if single-class) and E-measure."""
    pred, gt = check_pair(pred, gt)
    sw = kernels.sweep(pred, gt, beta2=beta2, threshold_count=threshold_count)
    try:
        auc = kernels.auc_rank(pred, gt)
    except UndefinedAUCError:
        auc = None
    return {
        "mae": kernels.region_mae(pred, gt),
        "f_mean": kernels.mean_f(sw),
        "f_max": kernels.max_f(sw),
        "auc": auc,
        "e_m": kernels.e_measure(pred, gt),
    }


def evaluate_image(pred, gt, config=None, image=None):
    """Compute the configured metric record for one prediction/ground-truth pair."""
    config = config or MetricConfig()
    pred, gt = check_pair(pred, gt)
    wanted = set(config.metrics)
    partition = partition_mask(gt, config.connectivity, config.alpha_mode, config.min_area)
    rec = ImageMetrics(image=image, width=gt.shape[1], height=gt.shape[0],
                       K=partition.K, alpha=partition.alpha)

    if wanted & {"f_mean", "f_max"}:
        sw = kernels.sweep(pred, gt, beta2=config.beta2, threshold_count=config.threshold_count)
        rec.f_mean = kernels.mean_f(sw) if "f_mean" in wanted else None
        rec.f_max = kernels.max_f(sw) if "f_max" in wanted else None
    if "mae" in wanted:
        rec.mae = kernels.region_mae(pred, gt)
    if "auc" in wanted:
        try:
            rec.auc = kernels.auc_rank(pred, gt)
        except UndefinedAUCError:
            rec.degenerate.append("single_class_image")
    if "e_m" in wanted:
        rec.e_m = kernels.e_measure(pred, gt)

    if partition.degenerate:
        rec.degenerate.append("no_components")
        if "si_mae" in wanted:
            rec.si_mae = kernels.region_mae(pred, gt)
        return rec

    frames = frame_metrics(pred, gt, partition, config.beta2, config.threshold_count)
    rec.frames = [asdict(f) for f in frames]
    if "si_mae" in wanted:
        bg = kernels.region_mae(pred, gt, partition.background_mask()) if partition.background_area else 0.0
        rec.si_mae = _combine_mae([f.mae for f in frames], bg, partition)
    if "si_f_mean" in wanted:
        rec.si_f_mean = float(np.mean([f.f_mean for f in frames]))
    if "si_f_max" in wanted:
        rec.si_f_max = float(np.mean([f.f_max for f in frames]))
    aucs = [f.auc for f in frames if f.auc is not None]
    rec.excluded_frames_auc = len(frames) - len(aucs)
    if "si_auc" in wanted and aucs:
        rec.si_auc = float(np.mean(aucs))
    return rec


def verify_decompositions(pred, gt, regions, beta2=kernels.DEFAULT_BETA2,
                          threshold_count=kernels.DEFAULT_THRESHOLD_COUNT):
    """Largest residual of the size-weighted MAE and summed-count F identities.

    ``regions`` must be boolean masks that are pairwise disjoint and cover the image.
    """
    pred, gt = check_pair(pred, gt)
    masks = [np.asarray(r, dtype=bool) for r in regions]
    cover = np.zeros(gt.shape, dtype=np.int64)
    for m in masks:
        if m.shape != gt.shape:
            raise ValueError("region mask shape does not match the image")
        cover += m
    if np.any(cover != 1):
        raise ValueError("regions must be disjoint and cover the image")

    size = gt.size
    mae_parts = sum((m.sum() / size) * kernels.region_mae(pred, gt, m) for m in masks if m.any())
    residual = abs(kernels.region_mae(pred, gt) - mae_parts)

    whole = kernels.sweep(pred, gt, beta2=beta2, threshold_count=threshold_count)
    parts = [kernels.sweep(pred, gt, m, beta2=beta2, threshold_count=threshold_count) for m in masks if m.any()]
    for j in range(threshold_count):
        summed = parts[0].counts(j)
        for sw in parts[1:]:
            summed = summed + sw.counts(j)
        residual = max(residual, abs(kernels.f_beta(summed, beta2) - kernels.f_beta(whole.counts(j), beta2)))
    return float(residual)
