"""Command-line entry point: reproducible simulation-to-navigation pipelines.

Subcommands: simulate, derive-spline, train-uncertainty, build-map,
eval-loglik, plan, nav-experiment, pipeline. All randomness derives
from one --seed through named sub-streams, so stages can be re-run
independently; every stage writes deterministic bytes, and `pipeline`
reruns with the same manifest reproduce every output checksum.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numeric
failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import shutil
import sys
from pathlib import Path

import numpy as np

from . import datasets
from .errors import ConfigError, DataError, UncmapError
from .estimators import (ErrorModel, OracleEstimator, load_estimator_artifact,
                         save_estimator_artifact, train_uncertainty_head)
from .grid import GridGeometry
from .mapper import (build_uncertainty_map, read_probability_csv, write_pgm,
                     write_probability_csv)
from .planner import make_costmap, nav_experiment, plan as plan_path
from .sensor_models import derive_spline, load_spline, loglik, save_spline
from .scenarios import poses_along, random_free_poses
from .util import sha256_file, substream, substream_seed
from .world import build_world, load_scenario, simulate_scan, true_distance_profile

MANIFEST_SCHEMA = 1
MAP_META_SCHEMA = 1


def _write_json(path, obj):
    with open(path, "w") as f:
        json.dump(obj, f, indent=2, sort_keys=True)
        f.write("\n")


def _parse_waypoints(text: str):
    try:
        pts = [tuple(float(v) for v in part.split(",")) for part in text.split(";") if part]
        if any(len(p) != 2 for p in pts):
            raise ValueError
        return pts
    except ValueError:
        raise ConfigError(f"cannot parse waypoints {text!r}; expected 'x,y;x,y;...'")


def _simulate_dataset(config, world, out_dir, seed, n_poses, noise_sigma,
                      mode, waypoints, spacing, clearance, scenario_path):
    if mode == "waypoints":
        if not waypoints:
            raise ConfigError("waypoint mode requires waypoints")
        poses = poses_along(waypoints, spacing)
    else:
        poses = random_free_poses(world, n_poses, substream(seed, "poses"), clearance)
    noise_rng = substream(seed, "scan-noise")
    xs, ys = [], []
    for p in poses:
        xs.append(simulate_scan(world, p, noise_sigma, noise_rng))
        ys.append(true_distance_profile(world, p))
    meta = {
        "seed": seed,
        "n_poses": len(poses),
        "n_rays": config.n_rays,
        "fov": config.fov,
        "max_range": config.max_range,
        "resolution": config.resolution,
        "scan_height": config.scan_height,
        "robot_height": config.robot_height,
        "noise_sigma": noise_sigma,
        "pose_mode": mode,
        "scenario_sha256": sha256_file(scenario_path),
    }
    datasets.write_dataset(out_dir, poses, xs, ys, meta)
    return poses, xs, ys, meta


def cmd_simulate(args) -> int:
    config = load_scenario(args.scenario)
    world = build_world(config)
    waypoints = _parse_waypoints(args.waypoints) if args.waypoints else None
    _simulate_dataset(config, world, args.out, args.seed, args.n_poses,
                      args.noise_sigma, args.mode, waypoints, args.spacing,
                      args.clearance, args.scenario)
    print(f"wrote dataset to {args.out}")
    return 0


def cmd_derive_spline(args) -> int:
    model = derive_spline(args.segments, args.fit_samples)
    save_spline(model, args.out)
    print(f"wrote spline artifact to {args.out}")
    return 0


def _oracle_spec(error_model: ErrorModel, seed: int) -> dict:
    return {
        "schema": 1,
        "type": "oracle",
        "error_model": {
            "kind": error_model.kind,
            "scale_visible": error_model.scale_visible,
            "scale_hidden": error_model.scale_hidden,
            "hidden_margin": error_model.hidden_margin,
        },
        "seed": seed,
    }


def _train_head(world, poses, xs, ys, kind, error_model, seed, epochs, lr, batch,
                window, hidden, max_range):
    oracle = OracleEstimator(world, error_model, substream(seed, "train-yhat"))
    triples = []
    for p, x, y in zip(poses, xs, ys):
        out = oracle(x, p)
        triples.append((x, out.y_hat, y))
    head = train_uncertainty_head(triples, kind=kind, epochs=epochs, lr=lr, batch=batch,
                                  seed=substream_seed(seed, "train"),
                                  window_radius=window, hidden=hidden, max_range=max_range)
    return head


def cmd_train_uncertainty(args) -> int:
    config = load_scenario(args.scenario)
    world = build_world(config)
    poses, xs, ys, meta = datasets.read_dataset(args.dataset)
    if not poses:
        raise DataError("empty dataset")
    error_model = ErrorModel(kind=args.error_kind, scale_visible=args.scale_visible,
                             scale_hidden=args.scale_hidden, hidden_margin=args.hidden_margin)
    hidden = tuple(int(v) for v in args.hidden.split(","))
    head = _train_head(world, poses, xs, ys, args.kind, error_model, args.seed,
                       args.epochs, args.lr, args.batch, args.window, hidden,
                       config.max_range)
    artifact = head.to_json()
    artifact["train_seed"] = args.seed
    artifact["base"] = _oracle_spec(error_model, substream_seed(args.seed, "map-yhat"))
    save_estimator_artifact(artifact, args.out)
    loss_csv = args.loss_csv or str(Path(args.out).with_suffix(".loss.csv"))
    with open(loss_csv, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["epoch", "loss"])
        for i, v in enumerate(head.history):
            w.writerow([i, "%.17g" % v])
    print(f"wrote estimator artifact to {args.out} (loss log: {loss_csv})")
    return 0


def _write_map(prob, geometry, prefix: str, extra_meta: dict):
    prefix = str(prefix)
    write_probability_csv(prob, prefix + ".csv")
    write_pgm(prob, geometry, prefix + ".pgm")
    _write_json(prefix + ".meta.json", {
        "schema": MAP_META_SCHEMA,
        "nx": geometry.nx, "ny": geometry.ny,
        "resolution": geometry.resolution,
        "ox": geometry.ox, "oy": geometry.oy,
        **extra_meta,
    })


def _read_map(path):
    path = Path(path)
    meta_path = Path(str(path)[:-4] + ".meta.json") if str(path).endswith(".csv") \
        else Path(str(path) + ".meta.json")
    if not meta_path.exists():
        raise DataError(f"map metadata sidecar missing: {meta_path}")
    with open(meta_path) as f:
        meta = json.load(f)
    if meta.get("schema") != MAP_META_SCHEMA:
        raise DataError(f"unsupported map metadata schema {meta.get('schema')!r}")
    geometry = GridGeometry(nx=int(meta["nx"]), ny=int(meta["ny"]),
                            resolution=float(meta["resolution"]),
                            ox=float(meta["ox"]), oy=float(meta["oy"]))
    prob = read_probability_csv(path)
    if prob.shape != (geometry.ny, geometry.nx):
        raise DataError(f"map {path} shape {prob.shape} does not match its metadata")
    return prob, geometry, meta


def cmd_build_map(args) -> int:
    config = load_scenario(args.scenario)
    world = build_world(config)
    poses, xs, ys, meta = datasets.read_dataset(args.dataset)
    spline = load_spline(args.spline)
    estimator = load_estimator_artifact(args.estimator, world)
    resolution = args.resolution or config.resolution
    geometry = GridGeometry.from_extent(config.width, config.height, resolution)
    prob = build_uncertainty_map(poses, xs, estimator, spline, geometry,
                                 alpha=args.alpha, fov=config.fov,
                                 max_range=config.max_range)
    _write_map(prob, geometry, args.out, {
        "alpha": args.alpha,
        "seed": meta.get("seed"),
        "scenario_sha256": sha256_file(args.scenario),
        "estimator_sha256": sha256_file(args.estimator),
        "spline_sha256": sha256_file(args.spline),
    })
    print(f"wrote map to {args.out}.csv / .pgm")
    return 0


def cmd_eval_loglik(args) -> int:
    config = load_scenario(args.scenario)
    world = build_world(config)
    poses, xs, ys, meta = datasets.read_dataset(args.dataset)
    if not poses:
        raise DataError("empty dataset: nothing to evaluate")
    if int(meta.get("n_rays", config.n_rays)) != config.n_rays:
        raise DataError(f"dataset ray count {meta.get('n_rays')} does not match "
                        f"scenario n_rays {config.n_rays}")
    models = args.models.split(",") if args.models else None
    rows = []
    for artifact_path in args.estimators:
        with open(artifact_path) as f:
            native_kind = json.load(f).get("model_kind", "gaussian")
        estimator = load_estimator_artifact(artifact_path, world)
        y_hat_all, u_all, y_all = [], [], []
        for p, x, y in zip(poses, xs, ys):
            out = estimator(x, p)
            y_hat_all.append(out.y_hat)
            u_all.append(out.u_hat.values)
            y_all.append(y)
        y_hat_all = np.concatenate(y_hat_all)
        u_all = np.concatenate(u_all)
        y_all = np.concatenate(y_all)
        name = Path(artifact_path).stem
        for kind in models or [native_kind]:
            avg = loglik(kind, y_hat_all, y_all, u_all, average=True)
            rows.append((name, kind, avg, y_all.size))
    lines = ["estimator,model,avg_loglik,rays"]
    for name, kind, avg, n in rows:
        lines.append(f"{name},{kind},{avg:.9f},{n}")
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as f:
            f.write(text)
    print(text, end="")
    return 0


def cmd_plan(args) -> int:
    prob, geometry, meta = _read_map(args.map)
    costmap = make_costmap(prob, geometry, lethal_threshold=args.lethal_threshold,
                           robot_radius=args.robot_radius,
                           inflation_radius=args.inflation_radius, lam=args.lam)
    start = tuple(float(v) for v in args.start.split(","))
    goal = tuple(float(v) for v in args.goal.split(","))
    try:
        result = plan_path(costmap, start, goal)
    except ValueError as exc:
        raise ConfigError(str(exc))
    print(f"status: {result.status}")
    if result.found:
        print(f"cost: {result.total_cost:.6f}  waypoints: {len(result.waypoints)}")
    if args.out:
        with open(args.out, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["x", "y"])
            for x, y in result.waypoints:
                w.writerow(["%.17g" % x, "%.17g" % y])
    return 0


def _run_nav(world, named_maps, geometry, nav_params, seed, keep_paths=False):
    return nav_experiment(
        world, named_maps, geometry,
        keep_paths=keep_paths,
        n_goals=nav_params.get("n_goals", 15),
        n_trajectories=nav_params.get("n_trajectories", 400),
        seed=substream_seed(seed, "goals"),
        robot_radius=nav_params.get("robot_radius", 0.3),
        lethal_threshold=nav_params.get("lethal_threshold", 0.65),
        inflation_radius=nav_params.get("inflation_radius", 0.5),
        lam=nav_params.get("lam", 5.0),
        inflation_margin=nav_params.get("inflation_margin", 0.15),
        goal_clearance=nav_params.get("goal_clearance", 0.6),
        goal_min_separation=nav_params.get("min_separation", 1.0),
    )


def _write_nav_report(report, out_dir):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_json(out_dir / "nav_meta.json", {
        "schema": 1,
        "seed": report.seed,
        "n_trajectories": len(report.pairs),
        "goals": [list(g) for g in report.goals],
    })
    with open(out_dir / "nav_report.csv", "w") as f:
        f.write(report.to_csv())
    with open(out_dir / "nav_report.txt", "w") as f:
        f.write(report.format_table() + "\n")
    with open(out_dir / "nav_collisions.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["variant", "pair_index", "x", "y", "obstacles", "laser_invisible"])
        for v in report.variants:
            for k, loc, obstacles in v.details:
                names = ";".join(ob["name"] for ob in obstacles)
                invisible = int(any(not ob["laser_visible"] for ob in obstacles))
                w.writerow([v.name, k, "%.17g" % loc[0], "%.17g" % loc[1],
                            names, invisible])


def cmd_nav_experiment(args) -> int:
    config = load_scenario(args.scenario)
    world = build_world(config)
    named_maps = {}
    geometry = None
    for item in args.maps:
        if "=" not in item:
            raise ConfigError(f"--maps entries look like name=path.csv, got {item!r}")
        name, path = item.split("=", 1)
        prob, geom, _ = _read_map(path)
        if geometry is None:
            geometry = geom
        elif geom != geometry:
            raise DataError("all maps must share one geometry")
        named_maps[name] = prob
    if not named_maps:
        raise ConfigError("no maps given")
    nav_params = {
        "n_goals": args.n_goals, "n_trajectories": args.n_trajectories,
        "robot_radius": args.robot_radius, "lethal_threshold": args.lethal_threshold,
        "inflation_radius": args.inflation_radius, "lam": args.lam,
        "inflation_margin": args.inflation_margin, "goal_clearance": args.goal_clearance,
        "min_separation": args.min_separation,
    }
    report = _run_nav(world, named_maps, geometry, nav_params, args.seed,
                      keep_paths=args.overlay)
    _write_nav_report(report, args.out)
    if args.overlay:
        from .planner import render_paths_pgm
        for v in report.variants:
            render_paths_pgm(named_maps[v.name], geometry, v.paths,
                             Path(args.out) / f"overlay_{v.name}.pgm")
    print(report.format_table())
    return 0


# -- pipeline -------------------------------------------------------------------

_PIPELINE_DEFAULTS = {
    "alpha": 0.01,
    "noise_sigma": 0.01,
    "pose_mode": "random",
    "n_poses": 200,
    "pose_clearance": 0.4,
    "spacing": 0.1,
    "waypoints": None,
    "map_resolution": None,
    "spline": None,
    "spline_segments": 16,
    "spline_fit_samples": 512,
    "raw_u": 0.05,
    "error_model": {"kind": "laplace", "scale_visible": 0.04,
                    "scale_hidden": 0.08, "hidden_margin": 0.2},
    "train": {"epochs": 300, "lr": 1e-3, "batch": 256, "window": 4, "hidden": [32, 32]},
    "variants": ["slam", "laplace"],
    "nav": {},
}


def load_manifest(path) -> dict:
    with open(path) as f:
        manifest = json.load(f)
    if manifest.get("schema") != MANIFEST_SCHEMA:
        raise ConfigError(f"unsupported manifest schema {manifest.get('schema')!r}")
    for key in ("scenario", "seed", "out_dir"):
        if key not in manifest:
            raise ConfigError(f"manifest missing required field {key!r}")
    resolved = dict(_PIPELINE_DEFAULTS)
    for k, v in manifest.items():
        if isinstance(v, dict) and isinstance(resolved.get(k), dict):
            resolved[k] = {**resolved[k], **v}
        else:
            resolved[k] = v
    return resolved


class _Stage:
    """Context manager that reports which pipeline stage failed."""

    def __init__(self, name, checksums):
        self.name = name
        self.checksums = checksums

    def __enter__(self):
        self.checksums[self.name] = {}
        return self

    def add_input(self, path):
        self.checksums[self.name][str(Path(path).name)] = sha256_file(path)

    def __exit__(self, exc_type, exc, tb):
        if exc is not None and not isinstance(exc, UncmapError):
            raise DataError(f"stage {self.name!r} failed: {exc}") from exc
        if isinstance(exc, UncmapError):
            exc.args = (f"stage {self.name!r} failed: {exc}",)
        return False


def cmd_pipeline(args) -> int:
    manifest = load_manifest(args.manifest)
    out_dir = Path(args.out or manifest["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    seed = int(manifest["seed"])
    scenario_path = manifest["scenario"]
    checksums: dict = {}
    resolved_extras = {}

    shutil.copyfile(args.manifest, out_dir / "manifest.json")

    with _Stage("simulate", checksums) as st:
        st.add_input(scenario_path)
        config = load_scenario(scenario_path)
        world = build_world(config)
        waypoints = manifest["waypoints"]
        poses, xs, ys, ds_meta = _simulate_dataset(
            config, world, out_dir / "dataset", seed, manifest["n_poses"],
            manifest["noise_sigma"], manifest["pose_mode"], waypoints,
            manifest["spacing"], manifest["pose_clearance"], scenario_path)

    with _Stage("derive-spline", checksums) as st:
        if manifest["spline"]:
            st.add_input(manifest["spline"])
            shutil.copyfile(manifest["spline"], out_dir / "spline.json")
        else:
            save_spline(derive_spline(manifest["spline_segments"],
                                      manifest["spline_fit_samples"]),
                        out_dir / "spline.json")
        resolved_extras["spline"] = "spline.json"
        spline = load_spline(out_dir / "spline.json")

    em_cfg = manifest["error_model"]
    error_model = ErrorModel(kind=em_cfg["kind"], scale_visible=em_cfg["scale_visible"],
                             scale_hidden=em_cfg.get("scale_hidden"),
                             hidden_margin=em_cfg.get("hidden_margin", 0.1))
    train_cfg = manifest["train"]
    variants = list(manifest["variants"])

    artifacts = {}
    with _Stage("train", checksums) as st:
        for kind in ("laplace", "gaussian"):
            if kind not in variants:
                continue
            if not poses:
                raise DataError("cannot train on an empty dataset")
            head = _train_head(world, poses, xs, ys, kind, error_model, seed,
                               train_cfg["epochs"], train_cfg["lr"], train_cfg["batch"],
                               train_cfg["window"], tuple(train_cfg["hidden"]),
                               config.max_range)
            artifact = head.to_json()
            artifact["train_seed"] = seed
            artifact["base"] = _oracle_spec(error_model, substream_seed(seed, f"map-yhat-{kind}"))
            path = out_dir / f"estimator_{kind}.json"
            save_estimator_artifact(artifact, path)
            with open(out_dir / f"estimator_{kind}.loss.csv", "w", newline="") as f:
                w = csv.writer(f)
                w.writerow(["epoch", "loss"])
                for i, v in enumerate(head.history):
                    w.writerow([i, "%.17g" % v])
            artifacts[kind] = path
        if "slam" in variants:
            path = out_dir / "estimator_slam.json"
            save_estimator_artifact({"type": "raw_scan", "u_const": manifest["raw_u"],
                                     "model_kind": "laplace",
                                     "max_range": config.max_range}, path)
            artifacts["slam"] = path
        if "oracle" in variants:
            path = out_dir / "estimator_oracle.json"
            save_estimator_artifact(_oracle_spec(error_model,
                                                 substream_seed(seed, "map-yhat-oracle")),
                                    path)
            artifacts["oracle"] = path

    map_res = manifest["map_resolution"] or config.resolution
    geometry = GridGeometry.from_extent(config.width, config.height, map_res)
    named_maps = {}
    with _Stage("build-map", checksums) as st:
        for variant in variants:
            st.add_input(artifacts[variant])
            estimator = load_estimator_artifact(artifacts[variant], world)
            prob = build_uncertainty_map(poses, xs, estimator, spline, geometry,
                                         alpha=manifest["alpha"], fov=config.fov,
                                         max_range=config.max_range)
            _write_map(prob, geometry, out_dir / f"map_{variant}", {
                "alpha": manifest["alpha"], "seed": seed, "variant": variant,
                "estimator_sha256": sha256_file(artifacts[variant]),
            })
            named_maps[variant] = prob

    with _Stage("eval-loglik", checksums) as st:
        rows = []
        for variant in variants:
            estimator = load_estimator_artifact(artifacts[variant], world)
            y_hat_all, u_all, y_all = [], [], []
            for p, x, y in zip(poses, xs, ys):
                out = estimator(x, p)
                y_hat_all.append(out.y_hat)
                u_all.append(out.u_hat.values)
                y_all.append(y)
            if not y_all:
                raise DataError("empty dataset: nothing to evaluate")
            y_hat_all = np.concatenate(y_hat_all)
            u_all = np.concatenate(u_all)
            y_all = np.concatenate(y_all)
            for kind in ("gaussian", "laplace"):
                rows.append((variant, kind,
                             loglik(kind, y_hat_all, y_all, u_all, average=True),
                             y_all.size))
        with open(out_dir / "loglik.csv", "w") as f:
            f.write("estimator,model,avg_loglik,rays\n")
            for name, kind, avg, n in rows:
                f.write(f"{name},{kind},{avg:.9f},{n}\n")

    with _Stage("nav-experiment", checksums) as st:
        report = _run_nav(world, named_maps, geometry, manifest["nav"], seed)
        _write_nav_report(report, out_dir)

    _write_json(out_dir / "checksums.json", checksums)
    _write_json(out_dir / "resolved.json",
                {"schema": MANIFEST_SCHEMA, "seed": seed, **resolved_extras})
    print(report.format_table())
    print(f"pipeline outputs under {out_dir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="uncmap",
                                description="uncertainty-aware occupancy mapping pipelines")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="generate a pose/scan dataset from a scenario")
    s.add_argument("--scenario", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--n-poses", type=int, default=100)
    s.add_argument("--noise-sigma", type=float, default=0.01)
    s.add_argument("--mode", choices=("random", "waypoints"), default="random")
    s.add_argument("--waypoints", default=None, help="'x,y;x,y;...' polyline")
    s.add_argument("--spacing", type=float, default=0.1)
    s.add_argument("--clearance", type=float, default=0.4)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("derive-spline", help="fit the inverse sensor model spline")
    s.add_argument("--segments", type=int, default=16)
    s.add_argument("--fit-samples", type=int, default=512)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_derive_spline)

    s = sub.add_parser("train-uncertainty", help="train an uncertainty head on a dataset")
    s.add_argument("--scenario", required=True)
    s.add_argument("--dataset", required=True)
    s.add_argument("--kind", choices=("laplace", "gaussian"), default="laplace")
    s.add_argument("--epochs", type=int, default=2000)
    s.add_argument("--lr", type=float, default=1e-4)
    s.add_argument("--batch", type=int, default=32)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--window", type=int, default=4)
    s.add_argument("--hidden", default="32,32")
    s.add_argument("--error-kind", choices=("laplace", "gaussian"), default="laplace")
    s.add_argument("--scale-visible", type=float, default=0.04)
    s.add_argument("--scale-hidden", type=float, default=0.08)
    s.add_argument("--hidden-margin", type=float, default=0.2)
    s.add_argument("--out", required=True)
    s.add_argument("--loss-csv", default=None)
    s.set_defaults(func=cmd_train_uncertainty)

    s = sub.add_parser("build-map", help="build an uncertainty occupancy map")
    s.add_argument("--scenario", required=True)
    s.add_argument("--dataset", required=True)
    s.add_argument("--spline", required=True)
    s.add_argument("--estimator", required=True)
    s.add_argument("--alpha", type=float, default=0.01)
    s.add_argument("--resolution", type=float, default=None)
    s.add_argument("--out", required=True, help="output prefix (writes .csv/.pgm/.yaml)")
    s.set_defaults(func=cmd_build_map)

    s = sub.add_parser("eval-loglik", help="average log-likelihood report")
    s.add_argument("--scenario", required=True)
    s.add_argument("--dataset", required=True)
    s.add_argument("--estimators", nargs="+", required=True)
    s.add_argument("--models", default=None, help="comma list, e.g. gaussian,laplace")
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_eval_loglik)

    s = sub.add_parser("plan", help="plan a path on an exported map")
    s.add_argument("--map", required=True, help="probability CSV from build-map")
    s.add_argument("--start", required=True, help="x,y")
    s.add_argument("--goal", required=True, help="x,y")
    s.add_argument("--lethal-threshold", type=float, default=0.65)
    s.add_argument("--robot-radius", type=float, default=0.3)
    s.add_argument("--inflation-radius", type=float, default=0.5)
    s.add_argument("--lam", type=float, default=5.0)
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_plan)

    s = sub.add_parser("nav-experiment", help="collision-counting navigation experiment")
    s.add_argument("--scenario", required=True)
    s.add_argument("--maps", nargs="+", required=True, help="name=map.csv entries")
    s.add_argument("--n-goals", type=int, default=15)
    s.add_argument("--n-trajectories", type=int, default=400)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--robot-radius", type=float, default=0.3)
    s.add_argument("--lethal-threshold", type=float, default=0.65)
    s.add_argument("--inflation-radius", type=float, default=0.5)
    s.add_argument("--lam", type=float, default=5.0)
    s.add_argument("--inflation-margin", type=float, default=0.15)
    s.add_argument("--goal-clearance", type=float, default=0.6)
    s.add_argument("--min-separation", type=float, default=1.0)
    s.add_argument("--overlay", action="store_true",
                   help="also write per-variant PGM images with the paths drawn")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_nav_experiment)

    s = sub.add_parser("pipeline", help="run every stage from one manifest")
    s.add_argument("--manifest", required=True)
    s.add_argument("--out", default=None, help="override the manifest's out_dir")
    s.set_defaults(func=cmd_pipeline)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UncmapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DataError.exit_code


if __name__ == "__main__":
    sys.exit(main())
