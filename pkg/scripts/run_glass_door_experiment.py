#!/usr/bin/env python3
"""End-to-end navigation experiment in the glass-door world.

Writes the scenario and a pipeline manifest into the output directory,
then runs every stage (simulate, spline, training, map building,
likelihood report, navigation experiment) through the CLI. The final
table counts collisions with laser-invisible structure per map variant.
"""

import argparse
import json
import sys
from pathlib import Path

from uncmap.cli import main as uncmap_main
from uncmap.scenarios import glass_door_scenario
from uncmap.world import save_scenario


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="runs/glass_door", help="output directory")
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--spacing", type=float, default=0.1,
                    help="patrol pose spacing in meters")
    ap.add_argument("--n-goals", type=int, default=15)
    ap.add_argument("--n-trajectories", type=int, default=400)
    ap.add_argument("--variants", default="slam,laplace,gaussian",
                    help="comma list of map variants to build and compare")
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    config, info = glass_door_scenario(pose_spacing=args.spacing)
    scenario_path = out / "scenario.json"
    save_scenario(config, scenario_path)

    em = info["error_model"]
    manifest = {
        "schema": 1,
        "scenario": str(scenario_path),
        "seed": args.seed,
        "out_dir": str(out / "run"),
        "pose_mode": "waypoints",
        "waypoints": [list(p) for p in info["waypoints"]],
        "spacing": args.spacing,
        "map_resolution": 0.1,
        "error_model": {"kind": em.kind, "scale_visible": em.scale_visible,
                        "scale_hidden": em.scale_hidden,
                        "hidden_margin": em.hidden_margin},
        "train": {"epochs": 300, "lr": 1e-3, "batch": 256,
                  "window": 4, "hidden": [32, 32]},
        "variants": args.variants.split(","),
        "nav": {"n_goals": args.n_goals, "n_trajectories": args.n_trajectories},
    }
    manifest_path = out / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return uncmap_main(["pipeline", "--manifest", str(manifest_path)])


if __name__ == "__main__":
    sys.exit(main())
