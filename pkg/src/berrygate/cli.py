"""Command-line interface: binds JSON scenario configs to simulations,
sweeps, and fits.

Exit codes: 0 success, 2 configuration error, 3 numerical failure, 4 I/O
error. Every command is deterministic given its config; all outputs carry
provenance headers (config hash, package version).
"""

from __future__ import annotations

import argparse
import cmath
import json
import math
import os
import sys

import numpy as np

from . import __version__, gates
from .analysis import bloch_trajectory, fit_fringe, fit_ramsey
from .dynamics import (adiabaticity, propagate_schrodinger,
                       write_trajectory_csv)
from .errors import BerrygateError, ConfigError, FitError, IntegrationError
from .scenario import (build_atom, build_model, build_propagation,
                       config_hash, default_scenario, load_config)
from .sweeps import (PRESET_NAMES, SweepSpec, preset, result_filename,
                     run_sweep, write_result)

__all__ = ["main"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


def _load(args) -> dict:
    if args.config:
        cfg = load_config(args.config)
    else:
        cfg = default_scenario()
    if getattr(args, "decay", None) is not None:
        cfg["model"]["include_decay"] = args.decay == "on"
    return cfg


def _provenance(cfg: dict) -> dict:
    return {"config_hash": config_hash(cfg), "version": __version__}


def _header_lines(cfg: dict) -> list:
    return [f"{k}={v}" for k, v in _provenance(cfg).items()]


def _write_json(path, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")


def _outdir(args) -> str:
    out = args.out or "."
    os.makedirs(out, exist_ok=True)
    return out


def cmd_rap(args) -> int:
    """Single-pulse rapid-adiabatic-passage run: trajectory CSV plus a
    summary JSON (transfer probability, adiabaticity maximum, phases)."""
    cfg = _load(args)
    cfg["pulse"]["count"] = 1
    if args.dry_run:
        json.dump(cfg, sys.stdout, indent=1)
        print()
        return EXIT_OK
    cfg["model"]["include_decay"] = False
    model = build_model(cfg)
    prop = build_propagation(cfg)
    psi0 = np.zeros(model.dim, dtype=complex)
    psi0[model.ground_index(-0.5)] = 1.0
    psi_f, record = propagate_schrodinger(model, psi0, prop, record=True)
    excited = [i for i, s in enumerate(model.basis) if s.level.l == 1]
    transfer = float(np.sum(np.abs(psi_f[excited]) ** 2))
    pulse = model.sequence.pulses[0]
    tgrid = np.linspace(*model.window(prop.window_multiplier), 400)
    eta = adiabaticity(pulse, tgrid)
    out = _outdir(args)
    write_trajectory_csv(record, os.path.join(out, "rap_trajectory.csv"),
                         header_lines=_header_lines(cfg))
    summary = {
        "transfer_probability": transfer,
        "adiabaticity_max": float(np.max(eta)),
        "ground_amplitude_phase_rad":
            cmath.phase(complex(psi_f[model.ground_index(-0.5)])),
        "excited_phase_rad": cmath.phase(complex(psi_f[excited[0]]))
            if excited else 0.0,
        "provenance": _provenance(cfg),
    }
    _write_json(os.path.join(out, "rap_summary.json"), summary)
    print(f"rap: transfer={transfer:.6f} "
          f"eta_max={summary['adiabaticity_max']:.4f}")
    return EXIT_OK


def cmd_gate(args) -> int:
    """Extract the effective qubit gate of the configured pulse pair and
    write its JSON report plus Bloch trajectories of both pathways."""
    cfg = _load(args)
    if args.dry_run:
        json.dump(cfg, sys.stdout, indent=1)
        print()
        return EXIT_OK
    model = build_model(cfg)
    prop = build_propagation(cfg)
    theta = cfg["pulse"]["theta2_rad"] - cfg["pulse"]["theta1_rad"]
    angle = gates.geometric_phase(0.0, theta)
    ideal = gates.mf_manifold_gate(cfg["model"]["m_f"], angle)
    outcome = gates.extract_gate(model, prop, ideal)
    out = _outdir(args)
    payload = outcome.to_json_dict()
    payload["ideal_rotation_angle_rad"] = float(angle)
    payload["provenance"] = _provenance(cfg)
    _write_json(os.path.join(out, "gate.json"), payload)

    # Bloch path of each fine-structure pathway (ground vs its P1/2 partner).
    for m_j, tag in ((-0.5, "sigma_plus"), (0.5, "sigma_minus")):
        try:
            gi = model.ground_index(m_j)
        except BerrygateError:
            continue
        partner = [i for i, s in enumerate(model.basis)
                   if s.level.l == 1 and s.m_i == model.basis[gi].m_i]
        if not partner:
            continue
        psi0 = np.zeros(model.dim, dtype=complex)
        psi0[gi] = 1.0
        _, record = propagate_schrodinger(model, psi0, prop, record=True)
        rows, flagged = bloch_trajectory(record, gi, partner[0])
        path = os.path.join(out, f"bloch_{tag}.csv")
        with open(path, "w") as fh:
            for line in _header_lines(cfg):
                fh.write(f"# {line}\n")
            fh.write(f"# pathway={tag} flagged={flagged}\n")
            fh.write("t_ps,x,y,z\n")
            for t, x, y, z in rows:
                fh.write(f"{t:.9g},{x:.9g},{y:.9g},{z:.9g}\n")
    fid = "n/a" if outcome.fidelity is None else f"{outcome.fidelity:.6f}"
    print(f"gate: fidelity={fid} leakage={outcome.leakage:.3e} "
          f"flagged={outcome.flagged}")
    return EXIT_OK


def cmd_ramsey(args) -> int:
    """Two-gate Ramsey scan over the inter-pair delay: fringe CSV plus the
    fitted frequency/phase JSON."""
    cfg = _load(args)
    if args.dry_run:
        json.dump(cfg, sys.stdout, indent=1)
        print()
        return EXIT_OK
    rm = cfg["ramsey"]
    cfg["pulse"]["theta2_rad"] = cfg["pulse"]["theta1_rad"] + rm["theta_rad"]
    atom = build_atom(cfg)
    model = build_model(cfg)
    prop = build_propagation(cfg)
    gate = gates.extract_gate(model, prop)
    delays = np.linspace(rm["delay_start_ps"], rm["delay_stop_ps"],
                         int(rm["points"]))
    probs = [gates.ramsey_probability(gate, gate, atom.hf_splitting, t)
             for t in delays]
    out = _outdir(args)
    csv_path = os.path.join(out, "ramsey.csv")
    with open(csv_path, "w") as fh:
        for line in _header_lines(cfg):
            fh.write(f"# {line}\n")
        fh.write("delta_t_ps,probability\n")
        for t, p in zip(delays, probs):
            fh.write(f"{t:.9g},{p:.9g}\n")
    samples = np.column_stack([delays, probs])
    if len(delays) < 10:
        raise FitError(
            f"Ramsey fit needs >= 10 delay samples, got {len(delays)}")
    fit = fit_ramsey(samples)
    payload = fit.to_json_dict()
    payload["params"]["f_r_ghz"] = payload["params"]["f_r"] * 1e3
    payload["provenance"] = _provenance(cfg)
    _write_json(os.path.join(out, "ramsey_fit.json"), payload)
    print(f"ramsey: f_R={payload['params']['f_r_ghz']:.7f} GHz "
          f"converged={fit.converged}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    """Run a sweep from a preset name or the config's sweep block."""
    if args.preset:
        spec = preset(args.preset, grid=args.grid or 41)
        if args.config:
            raw = load_config(args.config)
            spec.base.update({k: raw[k] for k in raw if k != "sweep"})
        if getattr(args, "decay", None) is not None:
            spec.decay = args.decay == "on"
    else:
        cfg = _load(args)
        block = cfg.get("sweep")
        if not block or "axes" not in block:
            raise ConfigError(
                "sweep needs --preset or a config sweep block with axes")
        spec = SweepSpec(
            base=cfg,
            axes=[(a["path"], a["values"]) for a in block["axes"]],
            observable=block.get("observable", "fidelity"),
            decay=block.get("decay"))
    if args.dry_run:
        json.dump({"observable": spec.observable,
                   "axes": [{"path": p, "points": len(v)}
                            for p, v in spec.axes],
                   "base_hash": config_hash(spec.base)},
                  sys.stdout, indent=1)
        print()
        return EXIT_OK
    result = run_sweep(spec, workers=args.workers or 1)
    out = _outdir(args)
    csv_path = os.path.join(out, result_filename(result, "csv"))
    write_result(result, csv_path, "csv")
    write_result(result, os.path.join(out, result_filename(result, "json")),
                 "json")
    print(f"sweep: wrote {csv_path} "
          f"({result.values.size} points, "
          f"{int(np.sum(result.status != 'ok'))} failed)")
    return EXIT_OK


def _read_fit_csv(path):
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split(",")
            try:
                rows.append((float(parts[0]), float(parts[1])))
            except (ValueError, IndexError):
                continue  # header line
    if not rows:
        raise FitError(f"{path}: no numeric (x, y) rows found")
    return np.array(rows)


def cmd_fit(args) -> int:
    """Fit a fringe or Ramsey model to a two-column CSV."""
    samples = _read_fit_csv(args.data)
    if args.model == "fringe":
        fit = fit_fringe(samples)
    else:
        fit = fit_ramsey(samples)
    payload = fit.to_json_dict()
    payload["model"] = args.model
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        _write_json(os.path.join(args.out, "fit.json"), payload)
    json.dump(payload, sys.stdout, indent=1)
    print()
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="berrygate",
        description="Chirped-pulse geometric-gate simulator and analysis")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, decay=True):
        p.add_argument("--config", help="scenario JSON path")
        p.add_argument("--out", help="output directory (default .)")
        p.add_argument("--dry-run", action="store_true",
                       help="validate config and print the resolved "
                            "scenario without computing")
        if decay:
            p.add_argument("--decay", choices=("on", "off"),
                           help="override model.include_decay")

    p = sub.add_parser("rap", help="single-pulse adiabatic passage")
    common(p)
    p.set_defaults(func=cmd_rap)

    p = sub.add_parser("gate", help="extract the qubit gate of a pulse pair")
    common(p)
    p.set_defaults(func=cmd_gate)

    p = sub.add_parser("ramsey", help="two-gate Ramsey delay scan + fit")
    common(p)
    p.set_defaults(func=cmd_ramsey)

    p = sub.add_parser("sweep", help="parameter sweep (preset or config)")
    common(p)
    p.add_argument("--preset", choices=PRESET_NAMES)
    p.add_argument("--grid", type=int, help="points per swept axis")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("fit", help="fit a model to a two-column CSV")
    p.add_argument("data", help="CSV with x,y rows ('#' comments ignored)")
    p.add_argument("--model", choices=("fringe", "ramsey"), required=True)
    p.add_argument("--out", help="also write fit.json here")
    p.set_defaults(func=cmd_fit)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (IntegrationError, FitError, BerrygateError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
