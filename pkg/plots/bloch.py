#!/usr/bin/env python3
"""Render a Bloch-vector trajectory CSV (t_ps,x,y,z) on the Bloch sphere.

    python3 plots/bloch.py --in results/bloch_sigma_plus.csv --out bloch.png

Left panel: 3D path on a wireframe sphere, colored by time. Right panel:
the three components against time.
"""

from __future__ import annotations

import argparse
import sys

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from _common import read_csv


def build_figure(header, data):
    expected = ["t_ps", "x", "y", "z"]
    if header != expected:
        raise ValueError(f"expected columns {expected}, got {header}")
    t, x, y, z = data.T
    fig = plt.figure(figsize=(8.0, 3.6), constrained_layout=True)
    ax3 = fig.add_subplot(1, 2, 1, projection="3d")
    u = np.linspace(0.0, 2.0 * np.pi, 25)
    v = np.linspace(0.0, np.pi, 13)
    ax3.plot_wireframe(np.outer(np.cos(u), np.sin(v)),
                       np.outer(np.sin(u), np.sin(v)),
                       np.outer(np.ones_like(u), np.cos(v)),
                       color="0.85", linewidth=0.4)
    pts = ax3.scatter(x, y, z, c=t, s=4, cmap="plasma")
    fig.colorbar(pts, ax=ax3, shrink=0.7, label="t (ps)")
    ax3.set_box_aspect((1, 1, 1))
    ax3.set_xlabel("x")
    ax3.set_ylabel("y")
    ax3.set_zlabel("z")

    ax2 = fig.add_subplot(1, 2, 2)
    for comp, lab in zip((x, y, z), ("x", "y", "z")):
        ax2.plot(t, comp, lw=1.0, label=lab)
    ax2.set_xlabel("t (ps)")
    ax2.set_ylabel("Bloch component")
    ax2.set_ylim(-1.05, 1.05)
    ax2.legend(fontsize=8)
    return fig, (ax3, ax2)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--in", dest="infile", required=True,
                        help="Bloch trajectory CSV (t_ps,x,y,z)")
    parser.add_argument("--out", dest="outfile", required=True,
                        help="output image (png/svg/pdf)")
    args = parser.parse_args(argv)
    header, data = read_csv(args.infile)
    fig, _ = build_figure(header, data)
    fig.savefig(args.outfile, dpi=150)
    plt.close(fig)
    return 0


if __name__ == "__main__":
    sys.exit(main())
