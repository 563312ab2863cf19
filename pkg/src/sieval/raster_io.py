"""Reading ground-truth masks and predictions, and the PFM/JSON weight-map interchange.

Rasters are plain ``numpy`` arrays of shape ``(height, width)``.  Ground truth is
float64 with values exactly 0.0 or 1.0; predictions are float64 on the
``k / 255`` grid.  Weight maps are written as single-channel little-endian PFM.
"""

import json
import os

import numpy as np
from PIL import Image, UnidentifiedImageError

from .exceptions import RasterFormatError

DEFAULT_BINARIZE_THRESHOLD = 128


def read_gray8(path):
    """Decode an 8-bit single-channel image into a ``uint8`` array.

    Multi-channel images are accepted only when every colour channel is
    identical and any alpha channel is fully opaque, i.e. when the grayscale
    reduction is unambiguous.  Anything else raises :class:`RasterFormatError`.
    """
    try:
        with Image.open(path) as img:
            img.load()
            mode = img.mode
            if mode == "1":
                arr = np.asarray(img.convert("L"))
            elif mode == "L":
                arr = np.asarray(img)
            elif mode == "P":
                arr = _reduce_channels(np.asarray(img.convert("RGBA")), path)
            elif mode in ("LA", "RGB", "RGBA"):
                arr = _reduce_channels(np.asarray(img), path)
            else:
                raise RasterFormatError(f"{path}: unsupported image mode {mode!r} (need 8-bit grayscale)")
    except (OSError, UnidentifiedImageError) as exc:
        raise RasterFormatError(f"{path}: cannot decode image ({exc})") from exc
    if arr.size == 0:
        raise RasterFormatError(f"{path}: zero-sized image")
    return np.ascontiguousarray(arr, dtype=np.uint8)


def _reduce_channels(arr, path):
    if arr.ndim == 2:
        return arr
    n = arr.shape[2]
    has_alpha = n in (2, 4)
    color = arr[..., : n - 1] if has_alpha else arr
    if has_alpha and np.any(arr[..., -1] != 255):
        raise RasterFormatError(f"{path}: image has a non-opaque alpha channel")
    first = color[..., 0]
    for c in range(1, color.shape[2]):
        if np.any(color[..., c] != first):
            raise RasterFormatError(
                f"{path}: multi-channel image with differing channels has no deterministic grayscale reduction"
            )
    return first


def load_ground_truth(path, binarize_threshold=DEFAULT_BINARIZE_THRESHOLD):
    """Load a mask; a pixel is salient iff its stored byte is >= ``binarize_threshold``."""
    if not 0 <= int(binarize_threshold) <= 256:
        raise ValueError("binarize_threshold must be an 8-bit level")
    raw = read_gray8(path)
    return (raw >= int(binarize_threshold)).astype(np.float64)


def load_prediction(path):
    """Load a saliency map normalized to ``byte / 255``."""
    return read_gray8(path).astype(np.float64) / 255.0


def save_gray8(arr, path):
    """Write a ``uint8``-compatible raster as an 8-bit grayscale PNG or PGM."""
    arr = np.asarray(arr)
    if arr.dtype != np.uint8:
        arr = np.clip(np.rint(arr), 0, 255).astype(np.uint8)
    Image.fromarray(arr, mode="L").save(path)


def save_mask(mask, path):
    save_gray8(np.where(np.asarray(mask) > 0, 255, 0).astype(np.uint8), path)


def save_prediction(pred, path):
    save_gray8(np.rint(np.asarray(pred, dtype=np.float64) * 255.0), path)


# --------------------------------------------------------------------------
# PFM


def write_pfm(values, path):
    """Write a 2-D raster as a single-channel little-endian PFM (rows bottom-to-top)."""
    values = np.asarray(values)
    if values.ndim != 2:
        raise ValueError("PFM raster must be 2-D")
    data = values.astype("<f4")
    if not np.all(np.isfinite(data)):
        raise ValueError("PFM raster contains non-finite values")
    height, width = data.shape
    with open(path, "wb") as fh:
        fh.write(f"Pf\n{width} {height}\n-1.0\n".encode("ascii"))
        fh.write(np.ascontiguousarray(data[::-1]).tobytes())


def read_pfm(path):
    """Read a single-channel PFM into a float32 array of shape ``(height, width)``."""
    with open(path, "rb") as fh:
        tag = fh.readline().strip()
        if tag != b"Pf":
            raise RasterFormatError(f"{path}: not a single-channel PFM (tag {tag!r})")
        dims = fh.readline().split()
        scale = float(fh.readline().strip())
        payload = fh.read()
    if len(dims) != 2:
        raise RasterFormatError(f"{path}: malformed PFM dimensions line")
    width, height = int(dims[0]), int(dims[1])
    dtype = "<f4" if scale < 0 else ">f4"
    expected = width * height * 4
    if len(payload) != expected:
        raise RasterFormatError(f"{path}: expected {expected} payload bytes, found {len(payload)}")
    data = np.frombuffer(payload, dtype=dtype).reshape(height, width)
    return data[::-1].astype(np.float32)


def write_weight_map(weight_map, raster_path, manifest_path):
    """Write ``weight_map.values`` as PFM and its partition manifest as JSON."""
    write_pfm(weight_map.values, raster_path)
    manifest = weight_map.manifest()
    tmp = f"{manifest_path}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    os.replace(tmp, manifest_path)


def read_manifest(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)
