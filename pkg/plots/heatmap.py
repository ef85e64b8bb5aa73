#!/usr/bin/env python3
"""Render a two-axis sweep result JSON as a heatmap.

    python3 plots/heatmap.py --in results/figS1a_<hash>.json --out figS1a.png

The first sweep axis maps to y, the second to x; axis limits equal the
swept ranges exactly. Infidelity-like observables get a log color scale.
"""

from __future__ import annotations

import argparse
import sys

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.colors import LogNorm  # noqa: E402
import numpy as np  # noqa: E402

from _common import axis_label, read_sweep_json


def build_figure(axes, observable, values, provenance):
    if len(axes) != 2:
        raise ValueError(f"heatmap needs a two-axis sweep, got {len(axes)}")
    (ypath, yvals), (xpath, xvals) = axes
    fig, ax = plt.subplots(figsize=(5.2, 4.0), constrained_layout=True)
    norm = None
    plot_vals = values
    if observable == "infidelity":
        floor = 1e-12
        plot_vals = np.clip(values, floor, None)
        norm = LogNorm(vmin=max(np.nanmin(plot_vals), floor),
                       vmax=max(np.nanmax(plot_vals), 10 * floor))
    mesh = ax.pcolormesh(xvals, yvals, plot_vals, shading="nearest",
                         cmap="viridis", norm=norm)
    fig.colorbar(mesh, ax=ax, label=observable)
    ax.set_xlim(float(xvals[0]), float(xvals[-1]))
    ax.set_ylim(float(yvals[0]), float(yvals[-1]))
    ax.set_xlabel(axis_label(xpath))
    ax.set_ylabel(axis_label(ypath))
    name = provenance.get("name", "sweep")
    ax.set_title(f"{name}: {observable}")
    return fig, ax


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--in", dest="infile", required=True,
                        help="sweep result JSON")
    parser.add_argument("--out", dest="outfile", required=True,
                        help="output image (png/svg/pdf)")
    args = parser.parse_args(argv)
    axes, observable, values, _, prov = read_sweep_json(args.infile)
    fig, _ = build_figure(axes, observable, values, prov)
    fig.savefig(args.outfile, dpi=150)
    plt.close(fig)
    return 0


if __name__ == "__main__":
    sys.exit(main())
