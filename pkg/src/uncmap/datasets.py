"""CSV pose/scan dataset layout shared by the CLI stages.

A dataset directory holds three files:

* ``poses.csv``    one row per pose: x, y, theta
* ``scans.csv``    long format, one row per ray: pose_index, ray_index,
                   x_scan (raw laser), y_true (ground-truth distance)
* ``meta.json``    schema version, seed, ray count, ranges, checksums

Floats are written with 17 significant digits so reading a dataset back
reproduces the arrays bit for bit.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .errors import DataError
from .world import Pose2D

DATASET_SCHEMA = 1

_FMT = "%.17g"


def write_dataset(out_dir, poses, x_scans, y_trues, meta: dict):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if not (len(poses) == len(x_scans) == len(y_trues)):
        raise DataError("poses, x_scans and y_trues must have equal lengths")
    with open(out_dir / "poses.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["x", "y", "theta"])
        for p in poses:
            w.writerow([_FMT % p.x, _FMT % p.y, _FMT % p.theta])
    with open(out_dir / "scans.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["pose_index", "ray_index", "x_scan", "y_true"])
        for i, (xs, ys) in enumerate(zip(x_scans, y_trues)):
            for r, (xv, yv) in enumerate(zip(xs, ys)):
                w.writerow([i, r, _FMT % xv, _FMT % yv])
    with open(out_dir / "meta.json", "w") as f:
        json.dump({"schema": DATASET_SCHEMA, **meta}, f, indent=2, sort_keys=True)
        f.write("\n")


def read_dataset(in_dir):
    """Returns (poses, x_scans, y_trues, meta)."""
    in_dir = Path(in_dir)
    for name in ("poses.csv", "scans.csv", "meta.json"):
        if not (in_dir / name).exists():
            raise DataError(f"dataset file missing: {in_dir / name}")
    with open(in_dir / "meta.json") as f:
        meta = json.load(f)
    if meta.get("schema") != DATASET_SCHEMA:
        raise DataError(f"unsupported dataset schema {meta.get('schema')!r}")
    poses = []
    with open(in_dir / "poses.csv", newline="") as f:
        for row in csv.DictReader(f):
            poses.append(Pose2D(float(row["x"]), float(row["y"]), float(row["theta"])))
    per_pose: dict[int, list] = {}
    with open(in_dir / "scans.csv", newline="") as f:
        for row in csv.DictReader(f):
            per_pose.setdefault(int(row["pose_index"]), []).append(
                (int(row["ray_index"]), float(row["x_scan"]), float(row["y_true"])))
    x_scans, y_trues = [], []
    for i in range(len(poses)):
        rays = sorted(per_pose.get(i, []))
        if not rays:
            raise DataError(f"no scan rows for pose {i}")
        x_scans.append(np.asarray([v[1] for v in rays]))
        y_trues.append(np.asarray([v[2] for v in rays]))
    return poses, x_scans, y_trues, meta
