"""Batch evaluation of prediction/ground-truth directories."""

import csv
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .exceptions import DimensionMismatchError, RasterFormatError
from .raster_io import load_ground_truth, load_prediction
from .si_metrics import ALL_METRICS, MetricConfig, evaluate_image

log = logging.getLogger(__name__)

IMAGE_EXTENSIONS = {".png", ".pgm", ".pnm", ".bmp", ".jpg", ".jpeg", ".tif", ".tiff"}


def evaluate_pair(pred_path, gt_path, config=None, image=None):
    config = config or MetricConfig()
    pred = load_prediction(pred_path)
    gt = load_ground_truth(gt_path, config.binarize_threshold)
    if pred.shape != gt.shape:
        raise DimensionMismatchError(
            f"prediction {pred.shape[1]}x{pred.shape[0]} != ground truth {gt.shape[1]}x{gt.shape[0]}"
        )
    if image is None:
        image = os.path.splitext(os.path.basename(gt_path))[0]
    return evaluate_image(pred, gt, config, image=image)


def _stem_index(directory):
    index, duplicates = {}, set()
    for name in sorted(os.listdir(directory)):
        path = os.path.join(directory, name)
        stem, ext = os.path.splitext(name)
        if name.startswith(".") or ext.lower() not in IMAGE_EXTENSIONS or not os.path.isfile(path):
            continue
        if stem in index:
            duplicates.add(stem)
        else:
            index[stem] = path
    return index, duplicates


def pair_directories(pred_dir, gt_dir):
    """Match files by stem, ignoring extensions.

    Returns ``(pairs, unmatched)`` where ``pairs`` is sorted by stem.
    """
    preds, pred_dups = _stem_index(pred_dir)
    gts, gt_dups = _stem_index(gt_dir)
    ambiguous = pred_dups | gt_dups
    common = sorted((set(preds) & set(gts)) - ambiguous)
    unmatched = {
        "pred_only": sorted(set(preds) - set(gts)),
        "gt_only": sorted(set(gts) - set(preds)),
        "ambiguous": sorted(ambiguous),
    }
    return [(stem, preds[stem], gts[stem]) for stem in common], unmatched


def _task(args):
    stem, pred_path, gt_path, config = args
    try:
        return evaluate_pair(pred_path, gt_path, config, image=stem).to_dict(), None
    except (RasterFormatError, DimensionMismatchError, OSError, ValueError) as exc:
        return None, f"{type(exc).__name__}: {exc}"


@dataclass
class DatasetReport:
    config: dict
    images: list
    aggregate: dict
    counts: dict
    errors: list = field(default_factory=list)
    unmatched: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "config": self.config,
            "images": self.images,
            "aggregate": self.aggregate,
            "counts": self.counts,
            "errors": self.errors,
            "unmatched": self.unmatched,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def write_json(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json())

    def write_csv(self, path):
        metrics = [m for m in ALL_METRICS if m in self.config["metrics"]]
        header = ["image", "width", "height", "K", "alpha"] + metrics + ["excluded_frames_auc"]
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for rec in self.images:
                row = []
                for key in header:
                    value = rec.get(key)
                    if isinstance(value, float):
                        row.append(f"{value:.6f}")
                    else:
                        row.append("" if value is None else value)
                writer.writerow(row)


def aggregate_records(records, metrics=ALL_METRICS):
    """Unweighted mean of each metric over the records that have it, folded in list order."""
    out = {}
    for m in metrics:
        total, n = 0.0, 0
        for rec in records:
            value = rec.get(m)
            if value is not None:
                total += value
                n += 1
        out[m] = total / n if n else None
    return out


def evaluate_dataset(pred_dir, gt_dir, config=None, jobs=1):
    """Evaluate every stem-matched pair; results are identical for any ``jobs``."""
    config = config or MetricConfig()
    pairs, unmatched = pair_directories(pred_dir, gt_dir)
    if not pairs:
        raise ValueError(f"no prediction/ground-truth pairs found in {pred_dir!r} and {gt_dir!r}")
    tasks = [(stem, p, g, config) for stem, p, g in pairs]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_task, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        results = [_task(t) for t in tasks]

    images, errors = [], []
    for (stem, _, _), (rec, err) in zip(pairs, results):
        if err is not None:
            log.warning("%s: %s", stem, err)
            errors.append({"image": stem, "error": err})
        else:
            images.append(rec)
    counts = {
        "pairs": len(pairs),
        "images": len(images),
        "errors": len(errors),
        "k0_images": sum(1 for r in images if r["K"] == 0),
        "frames": sum(r["K"] for r in images),
        "excluded_frames_auc": sum(r["excluded_frames_auc"] for r in images),
        "unmatched": sum(len(v) for v in unmatched.values()),
    }
    return DatasetReport(
        config=config.to_dict(),
        images=images,
        aggregate=aggregate_records(images, config.metrics),
        counts=counts,
        errors=errors,
        unmatched=unmatched,
    )
