import json
import os

import numpy as np
import pytest

from sieval.buckets import bucket_report, size_bucket, size_bucket_label
from sieval.evaluate import aggregate_records, evaluate_dataset, evaluate_pair, pair_directories
from sieval.exceptions import DimensionMismatchError
from sieval.raster_io import save_mask, save_prediction
from sieval.si_metrics import MetricConfig
from synth import make_p1, random_blobs, random_quantized


def _dataset(root, rng, n=6, shape=(24, 24)):
    pred_dir, gt_dir = root / "pred", root / "gt"
    pred_dir.mkdir()
    gt_dir.mkdir()
    for i in range(n):
        gt = random_blobs(rng, shape, int(rng.integers(0, 4)))
        save_mask(gt, gt_dir / f"img{i:02d}.png")
        save_prediction(random_quantized(rng, shape), pred_dir / f"img{i:02d}.png")
    return pred_dir, gt_dir


class TestEvaluatePair:
    def test_identical_files(self, tmp_path):
        save_mask(make_p1(), tmp_path / "a.png")
        rec = evaluate_pair(tmp_path / "a.png", tmp_path / "a.png")
        assert rec.mae == 0 and rec.f_max == 1
        assert rec.image == "a"

    def test_p1_zero_prediction(self, tmp_path):
        save_mask(make_p1(), tmp_path / "gt.png")
        save_prediction(np.zeros((6, 6)), tmp_path / "pred.png")
        rec = evaluate_pair(tmp_path / "pred.png", tmp_path / "gt.png")
        assert rec.si_mae == pytest.approx(0.213415, abs=1e-6)

    def test_dimension_mismatch(self, tmp_path):
        save_mask(make_p1(), tmp_path / "gt.png")
        save_prediction(np.zeros((5, 6)), tmp_path / "pred.png")
        with pytest.raises(DimensionMismatchError):
            evaluate_pair(tmp_path / "pred.png", tmp_path / "gt.png")


class TestDataset:
    def test_pairing_by_stem(self, tmp_path):
        (tmp_path / "p").mkdir()
        (tmp_path / "g").mkdir()
        for name in ("a.png", "b.png", "c.png"):
            save_prediction(np.zeros((2, 2)), tmp_path / "p" / name)
        for name in ("a.pgm", "b.png", "d.png", "notes.txt"):
            (tmp_path / "g" / name).write_bytes(b"")
        pairs, unmatched = pair_directories(tmp_path / "p", tmp_path / "g")
        assert [p[0] for p in pairs] == ["a", "b"]
        assert unmatched["pred_only"] == ["c"] and unmatched["gt_only"] == ["d"]

    def test_single_image_aggregate(self, tmp_path, rng):
        pred_dir, gt_dir = _dataset(tmp_path, rng, n=1)
        report = evaluate_dataset(pred_dir, gt_dir)
        rec = report.images[0]
        for key, value in report.aggregate.items():
            assert value == rec[key]

    def test_duplicated_images_same_aggregate(self, tmp_path, rng):
        pred_dir, gt_dir = _dataset(tmp_path, rng, n=4)
        base = evaluate_dataset(pred_dir, gt_dir)
        for name in os.listdir(gt_dir):
            stem = name[:-4]
            (gt_dir / f"{stem}_dup.png").write_bytes((gt_dir / name).read_bytes())
            (pred_dir / f"{stem}_dup.png").write_bytes((pred_dir / name).read_bytes())
        doubled = evaluate_dataset(pred_dir, gt_dir)
        for key, value in base.aggregate.items():
            if value is None:
                assert doubled.aggregate[key] is None
            else:
                assert doubled.aggregate[key] == pytest.approx(value, abs=1e-12)

    def test_deterministic_across_listing_order_and_jobs(self, tmp_path, rng, monkeypatch):
        pred_dir, gt_dir = _dataset(tmp_path, rng, n=6)
        first = evaluate_dataset(pred_dir, gt_dir).to_json()
        real_listdir = os.listdir
        monkeypatch.setattr(os, "listdir", lambda d: list(reversed(sorted(real_listdir(d)))))
        shuffled = evaluate_dataset(pred_dir, gt_dir).to_json()
        monkeypatch.undo()
        parallel = evaluate_dataset(pred_dir, gt_dir, jobs=2).to_json()
        assert first == shuffled == parallel

    def test_errors_reported_and_run_continues(self, tmp_path, rng):
        pred_dir, gt_dir = _dataset(tmp_path, rng, n=3)
        save_prediction(np.zeros((5, 5)), pred_dir / "img01.png")
        (pred_dir / "img02.png").write_bytes(b"garbage")
        report = evaluate_dataset(pred_dir, gt_dir)
        assert report.counts["images"] == 1
        assert [e["image"] for e in report.errors] == ["img01", "img02"]
        assert "DimensionMismatchError" in report.errors[0]["error"]

    def test_empty_pairing_fatal(self, tmp_path):
        (tmp_path / "p").mkdir()
        (tmp_path / "g").mkdir()
        with pytest.raises(ValueError):
            evaluate_dataset(tmp_path / "p", tmp_path / "g")

    def test_split_halves(self, tmp_path, rng):
        pred_dir, gt_dir = _dataset(tmp_path, rng, n=6)
        report = evaluate_dataset(pred_dir, gt_dir)
        first, second = report.images[:3], report.images[3:]
        a, b = aggregate_records(first), aggregate_records(second)
        for key in ("mae", "si_mae", "e_m", "f_max"):
            combined = (a[key] * len(first) + b[key] * len(second)) / len(report.images)
            assert combined == pytest.approx(report.aggregate[key], abs=1e-12)

    def test_csv(self, tmp_path, rng):
        pred_dir, gt_dir = _dataset(tmp_path, rng, n=3)
        report = evaluate_dataset(pred_dir, gt_dir, MetricConfig(metrics=("mae", "si_mae")))
        path = tmp_path / "r.csv"
        report.write_csv(path)
        lines = path.read_text().splitlines()
        assert lines[0] == "image,width,height,K,alpha,mae,si_mae,excluded_frames_auc"
        assert len(lines) == 4
        mae_field = lines[1].split(",")[5]
        assert len(mae_field.split(".")[1]) == 6

    def test_json_report_shape(self, tmp_path, rng):
        pred_dir, gt_dir = _dataset(tmp_path, rng, n=2)
        report = json.loads(evaluate_dataset(pred_dir, gt_dir).to_json())
        assert {"config", "images", "aggregate", "counts"} <= set(report)
        assert report["config"]["beta2"] == 0.3


class TestBuckets:
    def test_boundaries(self):
        assert size_bucket(5, 100) == 0
        assert size_bucket(10, 100) == 1
        assert size_bucket(100, 100) == 9
        assert size_bucket(99, 100) == 9
        assert size_bucket_label(0) == "[0%,10%)"
        assert size_bucket_label(9) == "[90%,100%]"

    def _record(self, frames, width=10, height=10):
        return {"width": width, "height": height, "K": len(frames), "mae": 0.1, "si_mae": 0.2, "frames": frames}

    def test_same_bucket_mean(self):
        frames = [
            {"box_area": 5, "object_pixels": 3, "mae": 0.2, "f_mean": 0.5, "f_max": 0.6, "auc": None},
            {"box_area": 8, "object_pixels": 8, "mae": 0.4, "f_mean": 0.7, "f_max": 0.8, "auc": 0.9},
        ]
        out = bucket_report([self._record(frames)], by="size")
        first = out["buckets"][0]
        assert first["frame_count"] == 2
        assert first["frame_means"]["mae"] == pytest.approx(0.3)
        assert first["frame_means"]["auc"] == 0.9
        assert out["total_frames"] == 2

    def test_size_basis_object(self):
        frames = [{"box_area": 30, "object_pixels": 5, "mae": 0.2, "f_mean": 0, "f_max": 0, "auc": None}]
        by_box = bucket_report([self._record(frames)], by="size", size_basis="box")
        by_obj = bucket_report([self._record(frames)], by="size", size_basis="object")
        assert by_box["buckets"][3]["frame_count"] == 1
        assert by_obj["buckets"][0]["frame_count"] == 1

    def test_conservation_on_real_report(self, tmp_path, rng):
        pred_dir, gt_dir = _dataset(tmp_path, rng, n=6)
        report = evaluate_dataset(pred_dir, gt_dir)
        sizes = bucket_report(report.images, by="size")
        assert sum(b["frame_count"] for b in sizes["buckets"]) == report.counts["frames"]
        counts = bucket_report(report.images, by="count")
        assert sum(b["frame_count"] for b in counts["buckets"]) == report.counts["frames"]
        assert sum(b["image_count"] for b in counts["buckets"]) == len(report.images)

    def test_empty(self):
        out = bucket_report([], by="size")
        assert out["total_frames"] == 0
        assert bucket_report([], by="count")["buckets"] == []
