#!/usr/bin/env python3
"""Render a sweep result JSON as a family of curves.

    python3 plots/lines.py --in results/figS1b_<hash>.json --out figS1b.png

The last sweep axis is the abscissa; with two axes, each value of the first
axis becomes one labeled curve. Infidelity-like observables get a log
ordinate.
"""

from __future__ import annotations

import argparse
import sys

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from _common import axis_label, read_sweep_json


def build_figure(axes, observable, values, provenance):
    xpath, xvals = axes[-1]
    fig, ax = plt.subplots(figsize=(5.2, 3.6), constrained_layout=True)
    if len(axes) == 2:
        cpath, cvals = axes[0]
        leaf = cpath.split(".")[-1]
        for row, cval in zip(values, cvals):
            ax.plot(xvals, row, marker=".", ms=4,
                    label=f"{leaf}={cval:.4g}")
        ax.legend(fontsize=8)
    else:
        ax.plot(xvals, values[0], marker=".", ms=4)
    if observable == "infidelity" and np.nanmin(values) > 0.0:
        ax.set_yscale("log")
    ax.set_xlim(float(xvals[0]), float(xvals[-1]))
    ax.set_xlabel(axis_label(xpath))
    ax.set_ylabel(observable)
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
