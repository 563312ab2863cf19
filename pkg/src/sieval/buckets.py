"""Fine-grained breakdowns of a dataset report by object size or object count."""

FRAME_METRICS = ("mae", "f_mean", "f_max", "auc")
IMAGE_METRICS = ("mae", "si_mae", "auc", "si_auc", "f_mean", "si_f_mean", "f_max", "si_f_max", "e_m")
N_SIZE_BUCKETS = 10


def size_bucket(area, image_area):
    """Decile index of ``area / image_area`` with left-closed intervals (last one closed).

    Integer arithmetic keeps ratios such as exactly 10% on the right side of the boundary.
    """
    if image_area <= 0 or not 0 <= area <= image_area:
        raise ValueError("area must lie in [0, image_area]")
    return min(N_SIZE_BUCKETS * area // image_area, N_SIZE_BUCKETS - 1)


def size_bucket_label(idx):
    lo, hi = 10 * idx, 10 * (idx + 1)
    close = "]" if idx == N_SIZE_BUCKETS - 1 else ")"
    return f"[{lo}%,{hi}%{close}"


def _means(rows, keys):
    out = {}
    for k in keys:
        vals = [r[k] for r in rows if r.get(k) is not None]
        out[k] = sum(vals) / len(vals) if vals else None
    return out


def _frames(records, size_basis):
    for rec in records:
        image_area = rec["width"] * rec["height"]
        for fr in rec.get("frames", []):
            area = fr["box_area"] if size_basis == "box" else fr["object_pixels"]
            yield rec, fr, area, image_area


def bucket_report(records, by="size", size_basis="box"):
    """Group foreground frames by size decile (``by='size'``) or by per-image K (``by='count'``).

    ``records`` are per-image dicts as stored in a dataset report.
    """
    if size_basis not in ("box", "object"):
        raise ValueError("size_basis must be 'box' or 'object'")
    if by == "size":
        groups = {i: [] for i in range(N_SIZE_BUCKETS)}
        for _, fr, area, image_area in _frames(records, size_basis):
            groups[size_bucket(area, image_area)].append(fr)
        buckets = [
            {
                "key": size_bucket_label(i),
                "lower": i / N_SIZE_BUCKETS,
                "upper": (i + 1) / N_SIZE_BUCKETS,
                "frame_count": len(rows),
                "frame_means": _means(rows, FRAME_METRICS),
            }
            for i, rows in groups.items()
        ]
        return {"by": "size", "size_basis": size_basis, "total_frames": sum(len(g) for g in groups.values()),
                "buckets": buckets}
    if by == "count":
        groups = {}
        for rec in records:
            groups.setdefault(rec["K"], []).append(rec)
        buckets = []
        for k in sorted(groups):
            recs = groups[k]
            frames = [fr for r in recs for fr in r.get("frames", [])]
            buckets.append(
                {
                    "key": k,
                    "image_count": len(recs),
                    "frame_count": len(frames),
                    "frame_means": _means(frames, FRAME_METRICS),
                    "image_means": _means(recs, IMAGE_METRICS),
                }
            )
        return {"by": "count", "total_frames": sum(b["frame_count"] for b in buckets), "buckets": buckets}
    raise ValueError("by must be 'size' or 'count'")
