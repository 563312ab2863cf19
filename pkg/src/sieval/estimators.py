"""scikit-learn style wrappers around the functional API."""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .evaluate import aggregate_records
from .losses import weight_map
from .partition import AlphaMode, partition_mask
from .si_metrics import ALL_METRICS, MetricConfig, evaluate_image
from .validation import check_binary_mask, check_stack

ERROR_METRICS = ("mae", "si_mae")


def _stack_or_list(arrays):
    if arrays and all(a.shape == arrays[0].shape for a in arrays):
        return np.stack(arrays)
    return arrays


class SizeInvariantWeighter(TransformerMixin, BaseEstimator):
    """Transform ground-truth masks into unit-mass size-invariant loss weight maps.

    Parameters
    ----------
    connectivity : {4, 8}, default=8
        Pixel adjacency used to split salient pixels into objects.
    alpha_mode : str or float, default="separable"
        ``"separable"``, ``"composite"``, ``"fixed:V"`` or a number.
    min_area : int, default=0
        Components smaller than this many pixels are ignored.

    The transformer is stateless; ``fit`` only validates parameters.
    """

    def __init__(self, connectivity=8, alpha_mode="separable", min_area=0):
        self.connectivity = connectivity
        self.alpha_mode = alpha_mode
        self.min_area = min_area

    def fit(self, X, y=None):
        if self.connectivity not in (4, 8):
            raise ValueError("connectivity must be 4 or 8")
        self.alpha_mode_ = AlphaMode.parse(self.alpha_mode)
        return self

    def partitions(self, X):
        check_is_fitted(self, "alpha_mode_")
        return [
            partition_mask(check_binary_mask(m), self.connectivity, self.alpha_mode_, self.min_area)
            for m in check_stack(X)
        ]

    def transform(self, X):
        """Return weight maps, stacked to ``(n, h, w)`` when all masks share a shape."""
        return _stack_or_list([weight_map(p).values for p in self.partitions(X)])


class SaliencyEvaluator(BaseEstimator):
    """Evaluate saliency maps against ground-truth masks.

    ``fit(X, y)`` takes predictions ``X`` and masks ``y`` and stores per-image
    records in ``records_`` and dataset means in ``aggregate_``.  ``score``
    returns the ``scoring`` metric's mean, negated for error metrics so that
    larger is always better.
    """

    def __init__(self, beta2=0.3, threshold_count=256, connectivity=8, alpha_mode="separable",
                 min_area=0, metrics=None, scoring="si_f_max"):
        self.beta2 = beta2
        self.threshold_count = threshold_count
        self.connectivity = connectivity
        self.alpha_mode = alpha_mode
        self.min_area = min_area
        self.metrics = metrics
        self.scoring = scoring

    def _config(self):
        return MetricConfig(
            beta2=self.beta2,
            threshold_count=self.threshold_count,
            connectivity=self.connectivity,
            alpha_mode=self.alpha_mode,
            min_area=self.min_area,
            metrics=tuple(self.metrics) if self.metrics is not None else ALL_METRICS,
        )

    def _evaluate(self, X, y):
        preds, gts = check_stack(X, "X"), check_stack(y, "y")
        if len(preds) != len(gts):
            raise ValueError(f"got {len(preds)} predictions for {len(gts)} masks")
        config = self._config()
        records = [evaluate_image(p, g, config, image=str(i)).to_dict() for i, (p, g) in enumerate(zip(preds, gts))]
        return records, aggregate_records(records, config.metrics)

    def fit(self, X, y):
        self.records_, self.aggregate_ = self._evaluate(X, y)
        return self

    def score(self, X, y):
        if self.scoring not in ALL_METRICS:
            raise ValueError(f"unknown scoring metric {self.scoring!r}")
        _, aggregate = self._evaluate(X, y)
        value = aggregate.get(self.scoring)
        if value is None:
            return float("nan")
        return -value if self.scoring in ERROR_METRICS else value
