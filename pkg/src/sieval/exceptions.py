class RasterFormatError(ValueError):
    """Raised when an image file cannot be decoded into a single-channel raster."""


class DimensionMismatchError(ValueError):
    """Raised when prediction and ground truth do not share a shape."""


class EmptyRegionError(ValueError):
    """Raised when a metric is asked to evaluate zero pixels."""


class UndefinedAUCError(ValueError):
    """Raised when a region holds only positives or only negatives."""


class DegeneratePartitionWarning(UserWarning):
    """Emitted when an image has no salient component (K = 0)."""
