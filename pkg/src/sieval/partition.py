"""Connected-component labeling and the foreground/background frame partition.

Each connected salient component gets its minimal axis-aligned bounding box (a
*foreground frame*); every pixel outside the union of those boxes forms the
*background frame*.  The balance ratio ``alpha`` weights the background term.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import ndimage

from .validation import check_binary_mask

_STRUCTURES = {
    4: ndimage.generate_binary_structure(2, 1),
    8: ndimage.generate_binary_structure(2, 2),
}


@dataclass(frozen=True)
class AlphaMode:
    """How the background weight is chosen.

    ``separable`` uses background area over summed box areas, ``composite``
    uses 0, ``fixed`` uses ``value``.
    """

    kind: str = "separable"
    value: Optional[float] = None

    def __post_init__(self):
        if self.kind not in ("separable", "composite", "fixed"):
            raise ValueError(f"unknown alpha mode {self.kind!r}")
        if self.kind == "fixed":
            if self.value is None or not np.isfinite(self.value) or self.value < 0:
                raise ValueError("fixed alpha needs a finite value >= 0")

    @classmethod
    def parse(cls, mode):
        """Accept an ``AlphaMode``, a number, or ``'separable' | 'composite' | 'fixed:V'``."""
        if isinstance(mode, AlphaMode):
            return mode
        if isinstance(mode, (int, float)) and not isinstance(mode, bool):
            return cls("fixed", float(mode))
        text = str(mode).strip().lower()
        if text.startswith("fixed:"):
            try:
                return cls("fixed", float(text.split(":", 1)[1]))
            except ValueError:
                raise ValueError(f"bad fixed alpha {mode!r}") from None
        return cls(text)

    def __str__(self):
        if self.kind == "fixed":
            return f"fixed:{self.value:g}"
        return self.kind


@dataclass(frozen=True)
class ComponentLabeling:
    labels: np.ndarray
    count: int
    sizes: tuple

    @property
    def shape(self):
        return self.labels.shape


@dataclass(frozen=True)
class Frame:
    """Minimal bounding box of one component; coordinates are inclusive."""

    id: int
    row_min: int
    row_max: int
    col_min: int
    col_max: int
    box_area: int
    object_pixels: int

    @property
    def slices(self):
        return (slice(self.row_min, self.row_max + 1), slice(self.col_min, self.col_max + 1))

    def to_dict(self):
        return {
            "id": self.id,
            "row_min": self.row_min,
            "row_max": self.row_max,
            "col_min": self.col_min,
            "col_max": self.col_max,
            "box_area": self.box_area,
            "object_pixels": self.object_pixels,
        }


@dataclass(frozen=True)
class Partition:
    frames: tuple
    background_area: int
    alpha: Optional[float]
    shape: tuple
    alpha_mode: AlphaMode = field(default_factory=AlphaMode)

    @property
    def K(self):
        return len(self.frames)

    @property
    def image_area(self):
        return self.shape[0] * self.shape[1]

    @property
    def degenerate(self):
        return self.K == 0

    @property
    def foreground_area_sum(self):
        return sum(f.box_area for f in self.frames)

    @property
    def separable_alpha(self):
        """Background area over the summed (not unioned) box areas; ``None`` when K = 0."""
        total = self.foreground_area_sum
        if total == 0:
            return None
        return self.background_area / total

    def background_mask(self):
        mask = np.ones(self.shape, dtype=bool)
        for f in self.frames:
            mask[f.slices] = False
        return mask

    def manifest(self, image=None):
        height, width = self.shape
        return {
            "image": image,
            "width": width,
            "height": height,
            "K": self.K,
            "alpha": self.alpha,
            "alpha_mode": str(self.alpha_mode),
            "frames": [f.to_dict() for f in self.frames],
            "background_area": self.background_area,
        }


def label_components(mask, connectivity=8, min_area=0):
    """Label connected salient components.

    Components are numbered 1..K in raster-scan order of their first pixel.
    Components smaller than ``min_area`` pixels are dropped (their pixels get
    label 0) and the rest renumbered.
    """
    mask = check_binary_mask(mask)
    if connectivity not in _STRUCTURES:
        raise ValueError("connectivity must be 4 or 8")
    labels, count = ndimage.label(mask > 0, structure=_STRUCTURES[connectivity])
    labels = labels.astype(np.int32, copy=False)
    sizes = np.bincount(labels.ravel(), minlength=count + 1)[1:]
    if min_area > 0 and count:
        keep = sizes >= min_area
        remap = np.zeros(count + 1, dtype=np.int32)
        remap[1:][keep] = np.arange(1, int(keep.sum()) + 1, dtype=np.int32)
        labels = remap[labels]
        sizes = sizes[keep]
        count = int(keep.sum())
    return ComponentLabeling(labels=labels, count=int(count), sizes=tuple(int(s) for s in sizes))


def build_partition(labeling, alpha_mode="separable"):
    """Build one frame per component plus the background frame and resolve ``alpha``.

    For the separable mode with K = 0 the partition is degenerate and ``alpha``
    is ``None``.
    """
    mode = AlphaMode.parse(alpha_mode)
    labels = labeling.labels
    frames = []
    covered = np.zeros(labels.shape, dtype=bool)
    for idx, sl in enumerate(ndimage.find_objects(labels, max_label=labeling.count)):
        rows, cols = sl
        box_area = (rows.stop - rows.start) * (cols.stop - cols.start)
        frames.append(
            Frame(
                id=idx + 1,
                row_min=rows.start,
                row_max=rows.stop - 1,
                col_min=cols.start,
                col_max=cols.stop - 1,
                box_area=int(box_area),
                object_pixels=labeling.sizes[idx],
            )
        )
        covered[sl] = True
    background_area = int(covered.size - np.count_nonzero(covered))

    if mode.kind == "composite":
        alpha = 0.0
    elif mode.kind == "fixed":
        alpha = float(mode.value)
    elif frames:
        alpha = background_area / sum(f.box_area for f in frames)
    else:
        alpha = None
    return Partition(
        frames=tuple(frames),
        background_area=background_area,
        alpha=alpha,
        shape=tuple(labels.shape),
        alpha_mode=mode,
    )


def partition_mask(mask, connectivity=8, alpha_mode="separable", min_area=0):
    """Label ``mask`` and build its partition in one call."""
    return build_partition(label_components(mask, connectivity, min_area), alpha_mode)


def frame_pixels(frame, shape):
    """Yield the flat (row-major) indices of every pixel inside ``frame``'s box."""
    width = shape[1]
    for r in range(frame.row_min, frame.row_max + 1):
        base = r * width
        yield from range(base + frame.col_min, base + frame.col_max + 1)


def background_pixels(partition, shape=None):
    """Yield the flat indices of every pixel outside all foreground boxes."""
    if shape is not None and tuple(shape) != partition.shape:
        raise ValueError(f"shape {shape} does not match partition shape {partition.shape}")
    yield from (int(i) for i in np.flatnonzero(partition.background_mask()))
