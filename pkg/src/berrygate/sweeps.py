"""Parameter-sweep harness with presets regenerating the fidelity and
robustness panels (infidelity maps and curves over spectral width, chirp,
pulse area, delay, imbalance, detuning and relative phase).

Grid points are embarrassingly parallel; results are assembled in
deterministic grid order regardless of completion order, so serial and
parallel runs produce identical files.
"""

from __future__ import annotations

import copy
import datetime
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__, gates
from .analysis import fit_fringe, fringe_simulation
from .dynamics import pathway_phases, propagate_schrodinger
from .errors import BerrygateError, ParameterError
from .scenario import (build_model, build_propagation, config_hash,
                       default_scenario, get_by_path, set_by_path)

__all__ = [
    "OBSERVABLES",
    "SweepSpec",
    "SweepResult",
    "evaluate_observable",
    "run_sweep",
    "preset",
    "preset_figS1a",
    "preset_figS1b",
    "preset_figS1c",
    "preset_figS1d",
    "PRESET_NAMES",
    "write_result",
    "read_result_json",
    "result_filename",
]

OBSERVABLES = ("fidelity", "infidelity", "transfer", "relative_phase",
               "fitted_theta", "fitted_dtheta")


@dataclass
class SweepSpec:
    """One or two swept axes over a base scenario.

    ``axes`` is a list of (parameter path, values); ``decay`` overrides the
    base scenario's model.include_decay for the sweep.
    """

    base: dict
    axes: list
    observable: str = "fidelity"
    decay: bool | None = None
    name: str = "sweep"

    def __post_init__(self):
        if self.observable not in OBSERVABLES:
            raise ParameterError(
                f"unknown observable {self.observable!r}; "
                f"choose from {OBSERVABLES}")
        if not 1 <= len(self.axes) <= 2:
            raise ParameterError("sweeps take one or two axes")
        for path, values in self.axes:
            vals = np.asarray(values, dtype=float)
            if vals.size == 0 or not np.all(np.isfinite(vals)):
                raise ParameterError(f"axis {path!r} values must be finite "
                                     "and nonempty")
            get_by_path(self.base, path)  # path must resolve

    def grid_shape(self) -> tuple:
        return tuple(len(v) for _, v in self.axes)

    def point_config(self, idx: tuple) -> dict:
        cfg = copy.deepcopy(self.base)
        for (path, values), k in zip(self.axes, idx):
            set_by_path(cfg, path, float(values[k]))
        if self.decay is not None:
            cfg["model"]["include_decay"] = bool(self.decay)
        return cfg


@dataclass
class SweepResult:
    """Dense observable grid with per-point status and provenance."""

    axes: list
    observable: str
    values: np.ndarray
    status: np.ndarray
    provenance: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "axes": [{"path": p, "values": list(map(float, v))}
                     for p, v in self.axes],
            "observable": self.observable,
            "values": np.where(np.isfinite(self.values), self.values,
                               None).tolist(),
            "status": self.status.tolist(),
            "provenance": self.provenance,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "SweepResult":
        values = np.array([[np.nan if v is None else v for v in row]
                           if isinstance(row, list) else
                           (np.nan if row is None else row)
                           for row in data["values"]], dtype=float)
        return cls(
            axes=[(a["path"], np.asarray(a["values"], dtype=float))
                  for a in data["axes"]],
            observable=data["observable"],
            values=values,
            status=np.asarray(data["status"], dtype=object),
            provenance=dict(data["provenance"]))


def evaluate_observable(config: dict, observable: str) -> float:
    """Scalar observable of one scenario point."""
    prop = build_propagation(config)
    if observable == "fitted_dtheta":
        return float(fit_fringe(fringe_simulation(config)).params["dtheta"])
    model = build_model(config)
    if observable in ("fidelity", "infidelity"):
        theta = config["pulse"]["theta2_rad"] - config["pulse"]["theta1_rad"]
        ideal = gates.mf_manifold_gate(config["model"]["m_f"],
                                       gates.geometric_phase(0.0, theta))
        f = gates.average_fidelity(model, ideal, prop)
        return float(f) if observable == "fidelity" else float(1.0 - f)
    if observable == "transfer":
        psi0 = np.zeros(model.dim, dtype=complex)
        psi0[model.ground_index(-0.5)] = 1.0
        psi_f, _ = propagate_schrodinger(model, psi0, prop)
        excited = [i for i, s in enumerate(model.basis)
                   if s.level.l == 1]
        return float(np.sum(np.abs(psi_f[excited]) ** 2))
    if observable == "relative_phase":
        return float(pathway_phases(model, prop).relative)
    if observable == "fitted_theta":
        out = gates.extract_gate(model, prop)
        return float(gates.rotation_angle(out))
    raise ParameterError(f"unknown observable {observable!r}")


def _eval_point(args):
    config, observable = args
    try:
        return evaluate_observable(config, observable), "ok"
    except BerrygateError as exc:
        return math.nan, f"error:{type(exc).__name__}"
    except np.linalg.LinAlgError:
        return math.nan, "error:LinAlgError"


def run_sweep(spec: SweepSpec, workers: int = 1) -> SweepResult:
    """Evaluate the observable at every grid point.

    Failed points carry an error status and NaN value; more than 50% failed
    points raises. ``workers`` > 1 fans points out to a process pool.
    """
    shape = spec.grid_shape()
    indices = list(np.ndindex(*shape))
    jobs = [(spec.point_config(idx), spec.observable) for idx in indices]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_eval_point, jobs, chunksize=1))
    else:
        outcomes = [_eval_point(j) for j in jobs]
    values = np.full(shape, np.nan)
    status = np.full(shape, "ok", dtype=object)
    failed = 0
    for idx, (val, st) in zip(indices, outcomes):
        values[idx] = val
        status[idx] = st
        failed += st != "ok"
    if failed > 0.5 * len(indices):
        raise BerrygateError(
            f"sweep failed at {failed}/{len(indices)} points; "
            f"first statuses: {sorted(set(status.ravel()) - {'ok'})}")
    prov = {
        "config_hash": config_hash(spec.base),
        "version": __version__,
        "observable": spec.observable,
        "name": spec.name,
        "decay": spec.decay,
        "timestamp": datetime.datetime.now(datetime.timezone.utc)
        .isoformat(timespec="seconds"),
    }
    return SweepResult(axes=[(p, np.asarray(v, dtype=float))
                             for p, v in spec.axes],
                       observable=spec.observable, values=values,
                       status=status, provenance=prov)


# -- presets ---------------------------------------------------------------

_TWO_PI = 2.0 * math.pi


def _preset_base() -> dict:
    base = default_scenario()
    # Sweep workloads tolerate looser stepping than single-shot runs; the
    # observables asserted on are at the 1e-3 level.
    base["propagation"]["rel_tol"] = 1e-8
    base["propagation"]["abs_tol"] = 1e-10
    return base


def preset_figS1a(grid: int = 41) -> SweepSpec:
    """Infidelity map over (spectral width, chirp) at otherwise default
    parameters; the delay follows tau = 4 dt_p per point."""
    return SweepSpec(
        base=_preset_base(),
        axes=[("pulse.spectral_width_thz", np.linspace(2.0, 6.0, grid)),
              ("pulse.chirp_ps2", np.linspace(0.02, 0.15, grid))],
        observable="infidelity", name="figS1a")


def preset_figS1b(grid: int = 41) -> SweepSpec:
    """Infidelity vs pulse area for four absolute intra-pair delays."""
    base = _preset_base()
    base["pulse"]["tau_ps"] = 18.2
    return SweepSpec(
        base=base,
        axes=[("pulse.tau_ps", np.array([18.2, 11.0, 3.8, 2.36])),
              ("pulse.area_pi", np.linspace(1.0, 14.0, grid))],
        observable="infidelity", name="figS1b")


def preset_figS1c(grid: int = 41) -> SweepSpec:
    """Infidelity vs amplitude imbalance for three pulse areas."""
    return SweepSpec(
        base=_preset_base(),
        axes=[("pulse.area_pi", np.array([6.0, 9.0, 12.0])),
              ("pulse.alpha", np.linspace(-0.75, 0.75, grid))],
        observable="infidelity", name="figS1c")


def preset_figS1d(grid: int = 41) -> SweepSpec:
    """Fidelity vs detuning for four relative phases between the pulses."""
    width = _TWO_PI * 4.0
    return SweepSpec(
        base=_preset_base(),
        axes=[("pulse.relative_phase_rad",
               np.array([0.0, 0.5 * math.pi, math.pi, 1.5 * math.pi])),
              ("pulse.detuning_radps",
               np.linspace(-1.5 * width, 1.5 * width, grid))],
        observable="fidelity", name="figS1d")


_PRESETS = {
    "figS1a": preset_figS1a,
    "figS1b": preset_figS1b,
    "figS1c": preset_figS1c,
    "figS1d": preset_figS1d,
}
PRESET_NAMES = tuple(_PRESETS)


def preset(name: str, grid: int = 41) -> SweepSpec:
    if name not in _PRESETS:
        raise ParameterError(
            f"unknown preset {name!r}; choose from {PRESET_NAMES}")
    return _PRESETS[name](grid)


# -- output ----------------------------------------------------------------

def result_filename(result: SweepResult, fmt: str = "csv") -> str:
    return f"{result.provenance.get('name', 'sweep')}_" \
           f"{result.provenance.get('config_hash', 'nohash')}.{fmt}"


def write_result(result: SweepResult, path, fmt: str = "csv") -> None:
    """Write CSV long format (axis columns, value, status) with a provenance
    header block, or a JSON mirror of the full result."""
    if fmt == "json":
        with open(path, "w") as fh:
            json.dump(result.to_json_dict(), fh, indent=1)
            fh.write("\n")
        return
    if fmt != "csv":
        raise ParameterError(f"unknown output format {fmt!r}")
    with open(path, "w") as fh:
        for key, val in result.provenance.items():
            fh.write(f"# {key}={val}\n")
        cols = [p for p, _ in result.axes] + [result.observable, "status"]
        fh.write(",".join(cols) + "\n")
        for idx in np.ndindex(*result.values.shape):
            coords = [f"{result.axes[d][1][k]:.9g}"
                      for d, k in enumerate(idx)]
            val = result.values[idx]
            sval = f"{val:.9g}" if np.isfinite(val) else ""
            fh.write(",".join(coords + [sval, str(result.status[idx])]) + "\n")


def read_result_json(path) -> SweepResult:
    with open(path) as fh:
        return SweepResult.from_json_dict(json.load(fh))
