#!/usr/bin/env python3
"""Scatter a two-column fringe/Ramsey CSV with an optional fitted overlay.

    python3 plots/fringe.py --in results/ramsey.csv \
        --fit results/ramsey_fit.json --out ramsey.png

The overlay curve is evaluated from the parameters in the fit JSON (fringe
or Ramsey model, auto-detected), so the plot shows exactly what the fit
claims.
"""

from __future__ import annotations

import argparse
import sys

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from _common import evaluate_fit, read_csv, read_fit_json

OVERLAY_POINTS = 400


def build_figure(header, data, fit=None):
    x, y = data[:, 0], data[:, 1]
    fig, ax = plt.subplots(figsize=(5.2, 3.6), constrained_layout=True)
    ax.plot(x, y, "o", ms=4, label="data")
    if fit is not None:
        model, params, _ = fit
        xs = np.linspace(float(np.min(x)), float(np.max(x)), OVERLAY_POINTS)
        ax.plot(xs, evaluate_fit(model, params, xs), "-", lw=1.2,
                label=f"{model} fit")
        ax.legend(fontsize=8)
    ax.set_xlabel(header[0])
    ax.set_ylabel(header[1])
    return fig, ax


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--in", dest="infile", required=True,
                        help="two-column CSV (x, probability)")
    parser.add_argument("--fit", dest="fitfile",
                        help="fit JSON to overlay")
    parser.add_argument("--out", dest="outfile", required=True,
                        help="output image (png/svg/pdf)")
    args = parser.parse_args(argv)
    header, data = read_csv(args.infile)
    fit = read_fit_json(args.fitfile) if args.fitfile else None
    fig, _ = build_figure(header, data, fit)
    fig.savefig(args.outfile, dpi=150)
    plt.close(fig)
    return 0


if __name__ == "__main__":
    sys.exit(main())
