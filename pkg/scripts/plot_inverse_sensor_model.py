#!/usr/bin/env python3
"""Plot the fitted truncated-Laplace spline and its occupancy curve.

Needs matplotlib (the 'plots' extra).
"""

import argparse
import sys

import numpy as np

from uncmap.sensor_models import derive_spline, laplace_pdf, occupancy_h


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--segments", type=int, default=16)
    ap.add_argument("--out", default="inverse_sensor_model.png")
    args = ap.parse_args()

    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    model = derive_spline(args.segments, max(512, 10 * args.segments))

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.2))
    t = np.linspace(-5, 5, 1200)
    ax1.plot(t, model.pdf(t), label="spline fit")
    ax1.plot(t, laplace_pdf(t), "--", label="Laplace(0, 1)")
    ax1.set_xlabel("normalized distance t")
    ax1.set_ylabel("density")
    ax1.legend()

    ts = np.linspace(-5, 10, 2400)
    ax2.plot(ts, occupancy_h(model, ts))
    ax2.axhline(0.5, color="gray", lw=0.5)
    ax2.set_xlabel("normalized distance behind surface")
    ax2.set_ylabel("occupancy probability")

    fig.tight_layout()
    fig.savefig(args.out, dpi=150)
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
