"""Size-invariant evaluation and loss weighting for salient object detection."""

from .estimators import SaliencyEvaluator, SizeInvariantWeighter
from .kernels import (
    ConfusionCounts,
    ThresholdSweep,
    auc_rank,
    auc_trapezoid,
    e_measure,
    f_beta,
    max_f,
    mean_f,
    region_mae,
    sweep,
)
from .losses import LossKind, WeightMap, frame_loss, si_loss, weight_map
from .partition import (
    AlphaMode,
    ComponentLabeling,
    Frame,
    Partition,
    background_pixels,
    build_partition,
    frame_pixels,
    label_components,
    partition_mask,
)
from .raster_io import load_ground_truth, load_prediction, read_pfm, write_pfm, write_weight_map
from .si_metrics import (
    ImageMetrics,
    MetricConfig,
    evaluate_image,
    global_metrics,
    si_auc,
    si_f,
    si_mae,
    verify_decompositions,
)

__version__ = "0.1.0"
