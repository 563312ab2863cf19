"""Input validation helpers shared by the functional API and the estimators."""

import numpy as np

from .exceptions import DimensionMismatchError


def _as_2d_float(arr, name):
    arr = np.asarray(arr, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D (height, width), got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{name} must have at least one pixel, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def check_saliency_map(pred):
    """Return ``pred`` as a float64 array, checking it is 2-D with values in [0, 1]."""
    pred = _as_2d_float(pred, "saliency map")
    if pred.min() < 0.0 or pred.max() > 1.0:
        raise ValueError("saliency map values must lie in [0, 1]")
    return pred


def check_binary_mask(gt):
    """Return ``gt`` as a float64 array of exact 0.0/1.0 values.

    Boolean input is accepted and converted.
    """
    gt = np.asarray(gt)
    if gt.dtype == bool:
        gt = gt.astype(np.float64)
    gt = _as_2d_float(gt, "binary mask")
    if not np.all((gt == 0.0) | (gt == 1.0)):
        raise ValueError("binary mask values must be exactly 0 or 1")
    return gt


def check_pair(pred, gt):
    pred = check_saliency_map(pred)
    gt = check_binary_mask(gt)
    if pred.shape != gt.shape:
        raise DimensionMismatchError(
            f"prediction shape {pred.shape} != ground truth shape {gt.shape}"
        )
    return pred, gt


def check_stack(X, name="X"):
    """Normalize a single 2-D raster or a sequence of rasters to a list of arrays."""
    if isinstance(X, np.ndarray) and X.ndim == 2:
        return [X]
    if isinstance(X, np.ndarray) and X.ndim == 3:
        return list(X)
    if isinstance(X, (list, tuple)):
        return list(X)
    raise ValueError(f"{name} must be a 2-D raster, a 3-D stack or a sequence of rasters")
