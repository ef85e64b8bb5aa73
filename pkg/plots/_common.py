"""Shared readers for the plot scripts.

The scripts consume only the documented output files of the simulation
package (see docs/formats.md): provenance-headed numeric CSV and the
sweep/fit JSON formats. They deliberately do not import the package, so a
results directory can be plotted anywhere.
"""

from __future__ import annotations

import json
import math

import numpy as np


def read_csv(path):
    """Read a '#'-commented numeric CSV.

    Returns (column_names, data) where data has one row per non-comment
    line; empty fields become NaN.
    """
    header, rows = None, []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if header is None:
                header = line.split(",")
                continue
            rows.append([float(v) if v else math.nan
                         for v in line.split(",")])
    if header is None or not rows:
        raise ValueError(f"{path}: no data rows")
    return header, np.asarray(rows, dtype=float)


def read_sweep_json(path):
    """Sweep result JSON -> (axes, observable, values, status, provenance).

    ``axes`` is a list of (parameter_path, value_array); ``values`` is
    always 2D (a one-axis sweep becomes a single row) with JSON null
    mapped to NaN.
    """
    with open(path) as fh:
        data = json.load(fh)
    axes = [(a["path"], np.asarray(a["values"], dtype=float))
            for a in data["axes"]]
    raw = data["values"]
    if raw and not isinstance(raw[0], list):
        raw = [raw]
        status = [data["status"]]
    else:
        status = data["status"]
    values = np.array([[math.nan if v is None else float(v) for v in row]
                       for row in raw])
    return axes, data["observable"], values, status, data.get("provenance", {})


def read_fit_json(path):
    """Fit JSON -> (model_name, params dict, full payload).

    ``model`` falls back to guessing from the parameter names when the file
    came from the ramsey subcommand (which writes no model field).
    """
    with open(path) as fh:
        data = json.load(fh)
    model = data.get("model")
    if model is None:
        model = "ramsey" if "f_r" in data.get("params", {}) else "fringe"
    return model, data["params"], data


def evaluate_fit(model, params, x):
    """Evaluate a fitted fringe or Ramsey model at x."""
    x = np.asarray(x, dtype=float)
    if model == "fringe":
        return params["gamma"] * np.sin(x + params["dtheta"]) ** 2 \
            + params["delta"]
    if model == "ramsey":
        return params["gamma_r"] * np.cos(
            math.pi * params["f_r"] * x + params["phi_r"]) ** 2 \
            + params["delta_r"]
    raise ValueError(f"unknown fit model {model!r}")


def axis_label(path):
    """Human-readable axis label from a dotted config path."""
    leaf = path.split(".")[-1]
    names = {
        "spectral_width_thz": "spectral width (THz)",
        "chirp_ps2": "chirp (ps$^2$)",
        "area_pi": "pulse area ($\\pi$)",
        "tau_ps": "intra-pair delay (ps)",
        "alpha": "amplitude imbalance",
        "detuning_radps": "detuning (rad/ps)",
        "relative_phase_rad": "relative phase (rad)",
        "ellipticity": "ellipticity",
    }
    return names.get(leaf, leaf.replace("_", " "))
