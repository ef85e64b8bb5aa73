"""JSON scenario configuration: validation, defaults, and builders.

A scenario is a plain nested dict with a versioned ``schema`` field and
explicit unit suffixes on every physical key (``_thz`` ordinary frequency,
``_ghz``, ``_mhz``, ``_radps`` angular frequency, ``_ps``, ``_ps2``,
``_rad``, ``_pi`` areas in units of pi). Unknown keys are rejected by the
shipped JSON schema so that typos fail loudly instead of silently keeping a
default.
"""

from __future__ import annotations

import copy
import hashlib
import json
import math
from importlib import resources

import jsonschema

from .atom import AtomSpec
from .dynamics import HamiltonianModel, ModelOptions, PropagationConfig
from .errors import ConfigError, ParameterError
from .pulse import ChirpedPulseSpec, PolarizationState, PulseSequence, \
    gate_pulse_pair

__all__ = [
    "SCHEMA_VERSION",
    "default_scenario",
    "validate_config",
    "load_config",
    "merge_defaults",
    "get_by_path",
    "set_by_path",
    "config_hash",
    "build_atom",
    "build_sequence",
    "build_model",
    "build_propagation",
]

SCHEMA_VERSION = "berrygate-config/1"

TWO_PI = 2.0 * math.pi

_DEFAULTS = {
    "schema": SCHEMA_VERSION,
    "atom": {
        "nuclear_spin": 1.5,
        "d1_frequency_thz": 377.107463,
        "fs_splitting_thz": 7.123021,
        "hf_splitting_ghz": 6.8346826109,
        "gamma_d1_mhz": 5.75,
        "gamma_d2_mhz": 6.07,
        "d2_coupling_ratio": math.sqrt(2.0),
    },
    "pulse": {
        "count": 2,
        "spectral_width_thz": 4.0,
        "chirp_ps2": 0.072,
        "area_pi": 6.0,
        "tau_ps": None,
        "tau_dt": 4.0,
        "theta1_rad": 0.0,
        "theta2_rad": 0.5 * math.pi,
        "ellipticity": 0.0,
        "alpha": 0.0,
        "area_ratio": None,
        "detuning_radps": 0.0,
        "relative_phase_rad": 0.0,
    },
    "model": {
        "m_f": 0.0,
        "include_p32": True,
        "include_decay": True,
        "include_hyperfine": False,
    },
    "propagation": {
        "rel_tol": 1e-10,
        "abs_tol": 1e-12,
        "max_step_ps": 0.0,
        "window_multiplier": 5.0,
        "n_samples": 200,
    },
    "ramsey": {
        "theta_rad": 0.25 * math.pi,
        "delay_start_ps": 0.0,
        "delay_stop_ps": 300.0,
        "points": 31,
    },
}


def _schema():
    text = resources.files("berrygate").joinpath("config_schema.json") \
        .read_text()
    return json.loads(text)


def default_scenario() -> dict:
    """A deep copy of the full default configuration."""
    return copy.deepcopy(_DEFAULTS)


def validate_config(config: dict) -> None:
    """Schema-validate a raw (possibly partial) configuration dict."""
    if not isinstance(config, dict):
        raise ConfigError("configuration must be a JSON object")
    if config.get("schema") != SCHEMA_VERSION:
        raise ConfigError(
            f"config schema must be {SCHEMA_VERSION!r}, "
            f"got {config.get('schema')!r}")
    try:
        jsonschema.validate(config, _schema())
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config invalid at {path}: {exc.message}") from exc


def merge_defaults(config: dict) -> dict:
    """Overlay a validated partial config onto the defaults."""
    merged = default_scenario()
    for section, value in config.items():
        if isinstance(value, dict):
            merged.setdefault(section, {}).update(value)
        else:
            merged[section] = value
    return merged


def load_config(path) -> dict:
    """Read, validate and default-fill a scenario file."""
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
    validate_config(raw)
    return merge_defaults(raw)


def get_by_path(config: dict, path: str):
    node = config
    for key in path.split("."):
        if not isinstance(node, dict) or key not in node:
            raise ConfigError(f"unknown parameter path {path!r}")
        node = node[key]
    return node


def set_by_path(config: dict, path: str, value) -> None:
    keys = path.split(".")
    node = config
    for key in keys[:-1]:
        if not isinstance(node, dict) or key not in node:
            raise ConfigError(f"unknown parameter path {path!r}")
        node = node[key]
    if not isinstance(node, dict) or keys[-1] not in node:
        raise ConfigError(f"unknown parameter path {path!r}")
    node[keys[-1]] = value


def config_hash(config: dict) -> str:
    """Short deterministic digest of the canonicalized configuration."""
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:12]


def build_atom(config: dict) -> AtomSpec:
    a = config["atom"]
    return AtomSpec(
        nuclear_spin=a["nuclear_spin"],
        d1_frequency=TWO_PI * a["d1_frequency_thz"],
        fs_splitting=TWO_PI * a["fs_splitting_thz"],
        hf_splitting=TWO_PI * a["hf_splitting_ghz"] * 1e-3,
        gamma_d1=TWO_PI * a["gamma_d1_mhz"] * 1e-6,
        gamma_d2=TWO_PI * a["gamma_d2_mhz"] * 1e-6,
        d2_coupling_ratio=a["d2_coupling_ratio"],
    )


def _tau(p: dict, width: float, chirp: float) -> float:
    if p["tau_ps"] is not None:
        return float(p["tau_ps"])
    probe = ChirpedPulseSpec(carrier_frequency=1.0, spectral_width=width,
                             chirp=chirp)
    return float(p["tau_dt"]) * probe.time_params.duration


def build_sequence(config: dict, atom: AtomSpec | None = None) -> PulseSequence:
    """Pulse sequence from the ``pulse`` block.

    The carrier sits at the D1 resonance plus ``detuning_radps``. With
    ``count`` 1, a single pulse at t = 0 with the first polarization angle.
    """
    atom = atom or build_atom(config)
    p = config["pulse"]
    width = TWO_PI * p["spectral_width_thz"]
    chirp = p["chirp_ps2"]
    area = p["area_pi"] * math.pi
    carrier = atom.d1_frequency + p["detuning_radps"]
    if p["count"] == 1:
        pulse = ChirpedPulseSpec(
            carrier_frequency=carrier, spectral_width=width, chirp=chirp,
            polarization=PolarizationState(p["theta1_rad"], p["ellipticity"]),
            arrival_time=0.0, area=area)
        return PulseSequence((pulse,))
    return gate_pulse_pair(
        carrier_frequency=carrier, spectral_width=width, chirp=chirp,
        area=area, tau=_tau(p, width, chirp),
        theta1=p["theta1_rad"], theta2=p["theta2_rad"],
        ellipticity=p["ellipticity"], amplitude_imbalance=p["alpha"],
        relative_phase=p["relative_phase_rad"],
        area_ratio=p["area_ratio"])


def build_propagation(config: dict) -> PropagationConfig:
    pr = config["propagation"]
    return PropagationConfig(
        rel_tol=pr["rel_tol"], abs_tol=pr["abs_tol"],
        max_step=pr["max_step_ps"],
        window_multiplier=pr["window_multiplier"],
        n_samples=int(pr["n_samples"]))


def build_model(config: dict) -> HamiltonianModel:
    """Assembled model for the configured tower; decay may be forced off by
    setting model.include_decay."""
    atom = build_atom(config)
    seq = build_sequence(config, atom)
    mo = config["model"]
    options = ModelOptions(include_p32=mo["include_p32"],
                           include_decay=mo["include_decay"],
                           include_hyperfine=mo["include_hyperfine"])
    try:
        return HamiltonianModel.build(atom, seq, mo["m_f"], options)
    except ParameterError as exc:
        raise ConfigError(str(exc)) from exc
