import json
import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from PIL import Image

from sieval.exceptions import RasterFormatError
from sieval.losses import weight_map
from sieval.partition import partition_mask
from sieval.raster_io import (
    load_ground_truth,
    load_prediction,
    read_manifest,
    read_pfm,
    save_mask,
    write_pfm,
    write_weight_map,
)
from synth import make_p1


def _write_gray(path, arr):
    Image.fromarray(np.asarray(arr, dtype=np.uint8), mode="L").save(path)


def test_ground_truth_extremes_and_threshold_boundary(tmp_path):
    path = tmp_path / "gt.png"
    _write_gray(path, [[255, 0, 128, 127]])
    np.testing.assert_array_equal(load_ground_truth(path), [[1.0, 0.0, 1.0, 0.0]])


def test_ground_truth_custom_threshold(tmp_path):
    path = tmp_path / "gt.png"
    _write_gray(path, [[200, 100]])
    np.testing.assert_array_equal(load_ground_truth(path, binarize_threshold=50), [[1.0, 1.0]])


def test_p1_pgm_byte_count(tmp_path):
    path = tmp_path / "p1.pgm"
    raw = (make_p1() * 255).astype(np.uint8)
    _write_gray(path, raw)
    mask = load_ground_truth(path)
    assert mask.shape == (6, 6)
    # P1 has four salient pixels; its two boxes cover five
    assert mask.sum() == np.count_nonzero(raw == 255) == 4


def test_plain_ascii_pgm(tmp_path):
    path = tmp_path / "plain.pgm"
    path.write_text("P2\n3 1\n255\n0 51 255\n")
    np.testing.assert_array_equal(load_prediction(path), [[0.0, 0.2, 1.0]])


def test_prediction_normalization(tmp_path):
    path = tmp_path / "pred.png"
    _write_gray(path, [[255, 51, 0]])
    pred = load_prediction(path)
    assert pred[0, 0] == 1.0
    assert pred[0, 1] == pytest.approx(0.2, abs=1e-15)
    assert pred[0, 2] == 0.0


def test_all_zero_prediction(tmp_path):
    path = tmp_path / "zero.png"
    _write_gray(path, np.zeros((3, 4)))
    assert not load_prediction(path).any()


def test_prediction_on_255_grid(tmp_path, rng):
    path = tmp_path / "pred.png"
    raw = rng.integers(0, 256, size=(7, 9))
    _write_gray(path, raw)
    pred = load_prediction(path)
    np.testing.assert_array_equal(np.rint(pred * 255), raw)
    np.testing.assert_array_equal(pred, raw / 255.0)


def test_rejects_color_image(tmp_path):
    path = tmp_path / "rgb.png"
    arr = np.zeros((2, 2, 3), dtype=np.uint8)
    arr[0, 0] = (255, 0, 0)
    Image.fromarray(arr, mode="RGB").save(path)
    with pytest.raises(RasterFormatError, match="deterministic"):
        load_ground_truth(path)


def test_accepts_gray_encoded_as_rgb(tmp_path):
    path = tmp_path / "rgb.png"
    arr = np.zeros((2, 2, 3), dtype=np.uint8)
    arr[1, 1] = 200
    Image.fromarray(arr, mode="RGB").save(path)
    np.testing.assert_array_equal(load_ground_truth(path), [[0, 0], [0, 1]])


def test_rejects_16_bit(tmp_path):
    path = tmp_path / "deep.png"
    Image.fromarray(np.full((2, 2), 1000, dtype=np.uint16)).save(path)
    with pytest.raises(RasterFormatError):
        load_prediction(path)


def test_unreadable_file(tmp_path):
    path = tmp_path / "junk.png"
    path.write_bytes(b"not an image")
    with pytest.raises(RasterFormatError):
        load_ground_truth(path)
    with pytest.raises(RasterFormatError):
        load_ground_truth(tmp_path / "missing.png")


def test_mask_reencode_idempotent(tmp_path, rng):
    first = tmp_path / "a.png"
    second = tmp_path / "b.png"
    _write_gray(first, rng.integers(0, 256, size=(8, 8)))
    mask = load_ground_truth(first)
    save_mask(mask, second)
    np.testing.assert_array_equal(load_ground_truth(second), mask)


def test_pfm_payload_of_quarter_map(tmp_path):
    path = tmp_path / "w.pfm"
    write_pfm(np.full((2, 2), 0.25), path)
    data = path.read_bytes()
    header = b"Pf\n2 2\n-1.0\n"
    assert data.startswith(header)
    payload = data[len(header):]
    assert payload == bytes.fromhex("0000803e") * 4
    assert struct.unpack("<I", payload[:4])[0] == 0x3E800000


def test_pfm_rows_bottom_to_top(tmp_path):
    path = tmp_path / "w.pfm"
    write_pfm(np.array([[1.0, 2.0], [3.0, 4.0]]), path)
    payload = path.read_bytes()[len(b"Pf\n2 2\n-1.0\n"):]
    assert struct.unpack("<4f", payload) == (3.0, 4.0, 1.0, 2.0)


def test_pfm_rejects_non_finite(tmp_path):
    with pytest.raises(ValueError):
        write_pfm(np.array([[np.inf]]), tmp_path / "bad.pfm")


@settings(max_examples=50, deadline=None)
@given(arrays(np.float32, st.tuples(st.integers(1, 6), st.integers(1, 6)),
              elements=st.floats(allow_nan=False, allow_infinity=False, width=32)))
def test_pfm_roundtrip_bit_exact(tmp_path_factory, values):
    path = tmp_path_factory.mktemp("pfm") / "x.pfm"
    write_pfm(values, path)
    back = read_pfm(path)
    assert back.dtype == np.float32
    np.testing.assert_array_equal(back.view(np.uint32), values.view(np.uint32))


def test_weight_map_files_for_p1(tmp_path):
    wm = weight_map(partition_mask(make_p1()), image="p1")
    write_weight_map(wm, tmp_path / "p1.pfm", tmp_path / "p1.json")
    manifest = read_manifest(tmp_path / "p1.json")
    assert manifest["K"] == 2
    assert manifest["alpha"] == pytest.approx(6.2, abs=1e-12)
    assert manifest["background_area"] == 31
    assert manifest["width"] == 6 and manifest["height"] == 6
    assert manifest["alpha_mode"] == "separable"
    assert manifest["image"] == "p1"
    assert manifest["frames"][0] == {
        "id": 1, "row_min": 1, "row_max": 2, "col_min": 1, "col_max": 2, "box_area": 4, "object_pixels": 3,
    }
    assert set(manifest) == {"image", "width", "height", "K", "alpha", "alpha_mode", "frames", "background_area"}
    np.testing.assert_array_equal(read_pfm(tmp_path / "p1.pfm"), wm.values.astype(np.float32))
    json.dumps(manifest)
