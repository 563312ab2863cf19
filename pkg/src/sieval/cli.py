import argparse
import json
import logging
import os
import sys

from .buckets import bucket_report
from .evaluate import IMAGE_EXTENSIONS, evaluate_dataset
from .exceptions import RasterFormatError
from .losses import weight_map
from .partition import AlphaMode, partition_mask
from .raster_io import load_ground_truth, write_weight_map
from .si_metrics import ALL_METRICS, MetricConfig

log = logging.getLogger("sieval")


def _alpha_mode(text):
    try:
        return str(AlphaMode.parse(text))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _metric_list(text):
    names = tuple(m.strip() for m in text.split(",") if m.strip())
    unknown = set(names) - set(ALL_METRICS)
    if unknown:
        raise argparse.ArgumentTypeError(f"unknown metrics {sorted(unknown)}; choose from {','.join(ALL_METRICS)}")
    return names


def _add_partition_args(p):
    p.add_argument("--connectivity", type=int, choices=(4, 8), default=8)
    p.add_argument("--binarize", type=int, default=128, help="GT byte level counted as salient (>=)")
    p.add_argument("--min-area", type=int, default=0, help="drop components smaller than this")


def build_parser():
    parser = argparse.ArgumentParser(prog="sieval", description="Size-invariant saliency evaluation")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="evaluate a prediction directory against ground truth")
    p.add_argument("--pred", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--out", required=True, help="JSON report path")
    p.add_argument("--csv")
    p.add_argument("--metrics", type=_metric_list, default=ALL_METRICS)
    p.add_argument("--beta2", type=float, default=0.3)
    p.add_argument("--alpha-mode", type=_alpha_mode, default="separable")
    p.add_argument("--jobs", type=int, default=1)
    _add_partition_args(p)

    p = sub.add_parser("partition", help="print the frame partition of one mask as JSON")
    p.add_argument("--gt", required=True)
    p.add_argument("--alpha-mode", type=_alpha_mode, default="separable")
    _add_partition_args(p)

    p = sub.add_parser("weights", help="write <stem>.pfm + <stem>.json weight maps")
    p.add_argument("--gt", required=True, help="mask directory or single mask file")
    p.add_argument("--out", required=True)
    p.add_argument("--mode", type=_alpha_mode, default="separable")
    _add_partition_args(p)

    p = sub.add_parser("buckets", help="size/object-count breakdown of an eval report")
    p.add_argument("--report", required=True)
    p.add_argument("--by", choices=("size", "count"), default="size")
    p.add_argument("--size-basis", choices=("box", "object"), default="box")
    p.add_argument("--out", required=True)
    return parser


def cmd_eval(args):
    config = MetricConfig(
        beta2=args.beta2,
        connectivity=args.connectivity,
        binarize_threshold=args.binarize,
        alpha_mode=args.alpha_mode,
        min_area=args.min_area,
        metrics=args.metrics,
    )
    try:
        report = evaluate_dataset(args.pred, args.gt, config, jobs=max(1, args.jobs))
    except (ValueError, OSError) as exc:
        log.error("%s", exc)
        return 2
    report.write_json(args.out)
    if args.csv:
        report.write_csv(args.csv)
    print(json.dumps(report.aggregate, indent=2))
    return 1 if report.errors else 0


def cmd_partition(args):
    gt = load_ground_truth(args.gt, args.binarize)
    part = partition_mask(gt, args.connectivity, args.alpha_mode, args.min_area)
    stem = os.path.splitext(os.path.basename(args.gt))[0]
    print(json.dumps(part.manifest(image=stem), indent=2))
    return 0


def cmd_weights(args):
    if os.path.isdir(args.gt):
        paths = [
            os.path.join(args.gt, n)
            for n in sorted(os.listdir(args.gt))
            if os.path.splitext(n)[1].lower() in IMAGE_EXTENSIONS
        ]
    else:
        paths = [args.gt]
    os.makedirs(args.out, exist_ok=True)
    failed = 0
    for path in paths:
        stem = os.path.splitext(os.path.basename(path))[0]
        try:
            gt = load_ground_truth(path, args.binarize)
        except RasterFormatError as exc:
            log.error("%s", exc)
            failed += 1
            continue
        wm = weight_map(partition_mask(gt, args.connectivity, args.mode, args.min_area), image=stem)
        if wm.degenerate:
            log.warning("%s: no salient component, wrote uniform weights", stem)
        write_weight_map(wm, os.path.join(args.out, f"{stem}.pfm"), os.path.join(args.out, f"{stem}.json"))
    return 1 if failed else 0


def cmd_buckets(args):
    with open(args.report, encoding="utf-8") as fh:
        report = json.load(fh)
    result = bucket_report(report["images"], by=args.by, size_basis=args.size_basis)
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(result, fh, indent=2)
        fh.write("\n")
    return 0


COMMANDS = {"eval": cmd_eval, "partition": cmd_partition, "weights": cmd_weights, "buckets": cmd_buckets}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except RasterFormatError as exc:
        log.error("%s", exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
