"""Ideal geometric-gate algebra, extraction of the effective qubit operator
from full multi-level dynamics, and fidelity evaluation.

Fidelities are averaged over the fixed four-state set {|0>, |1>, |+>, |+i>}
and are blind to a global phase; the extracted operator's global phase is
reported separately.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .dynamics import (HamiltonianModel, PropagationConfig,
                       propagate_lindblad, propagate_schrodinger)
from .errors import ParameterError

__all__ = [
    "GateOutcome",
    "ideal_rotation",
    "mf_manifold_gate",
    "extract_gate",
    "gate_fidelity",
    "average_fidelity",
    "delayed_axis",
    "geometric_phase",
    "free_evolution",
    "ramsey_probability",
    "rotation_angle",
    "FIDELITY_INPUT_STATES",
]

_SIGMA = (
    np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex),
    np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
)

FIDELITY_INPUT_STATES = (
    np.array([1.0, 0.0], dtype=complex),
    np.array([0.0, 1.0], dtype=complex),
    np.array([1.0, 1.0], dtype=complex) / math.sqrt(2.0),
    np.array([1.0, 1.0j], dtype=complex) / math.sqrt(2.0),
)


def ideal_rotation(axis, angle: float) -> np.ndarray:
    """Qubit rotation cos(angle/2) I - i sin(angle/2) (n . sigma).

    ``axis`` is a unit 3-vector (or 2-vector in the xy-plane).
    """
    n = np.asarray(axis, dtype=float)
    if n.shape == (2,):
        n = np.array([n[0], n[1], 0.0])
    if n.shape != (3,):
        raise ParameterError("axis must be a 2- or 3-vector")
    if abs(np.linalg.norm(n) - 1.0) > 1e-9:
        raise ParameterError(f"axis must be unit length, |n|={np.linalg.norm(n)}")
    half = 0.5 * angle
    ns = n[0] * _SIGMA[0] + n[1] * _SIGMA[1] + n[2] * _SIGMA[2]
    return math.cos(half) * np.eye(2, dtype=complex) - 1j * math.sin(half) * ns


def mf_manifold_gate(m_f: float, angle: float) -> np.ndarray:
    """Ideal gate of one magnetic tower (I = 3/2) for a common rotation
    angle: the x-rotation at m_F = 0, a rotation about
    cos(pi/3) z +- sin(pi/3) x at m_F = +-1, the identity at m_F = +-2."""
    if m_f == 0:
        return ideal_rotation((1.0, 0.0, 0.0), angle)
    if m_f in (1, -1, 1.0, -1.0):
        s = 1.0 if m_f > 0 else -1.0
        axis = (s * math.sin(math.pi / 3.0), 0.0, math.cos(math.pi / 3.0))
        return ideal_rotation(axis, angle)
    if m_f in (2, -2, 2.0, -2.0):
        return np.eye(2, dtype=complex)
    raise ParameterError(f"m_F={m_f} is not a valid I=3/2 tower")


def delayed_axis(delay: float, omega_hf: float) -> np.ndarray:
    """Rotation axis (cos w_hf T, sin w_hf T, 0) set by the inter-pair
    delay T >= 0."""
    if delay < 0.0:
        raise ParameterError("delay must be >= 0")
    return np.array([math.cos(omega_hf * delay),
                     math.sin(omega_hf * delay), 0.0])


def geometric_phase(theta1: float, theta2: float) -> float:
    """Rotation angle 2(theta2 - theta1) wrapped to (-2 pi, 2 pi]."""
    x = 2.0 * (theta2 - theta1)
    r = math.remainder(x, 4.0 * math.pi)
    if r <= -2.0 * math.pi:
        r += 4.0 * math.pi
    return r


def _nearest_unitary(block: np.ndarray) -> np.ndarray:
    u, _, vh = np.linalg.svd(block)
    return u @ vh


@dataclass
class GateOutcome:
    """Effective qubit operator extracted from full dynamics.

    ``operator`` is the nearest unitary with its global phase removed;
    ``raw_block`` is the bare projected (generally non-unitary) 2x2 block
    used for fidelity evaluation. ``leakage`` is one minus the mean returned
    qubit-subspace population.
    """

    operator: np.ndarray
    raw_block: np.ndarray
    leakage: float
    global_phase: float
    fidelity: float | None = None
    flagged: bool = False

    def to_json_dict(self) -> dict:
        def mat(m):
            return [[[float(v.real), float(v.imag)] for v in row] for row in m]
        return {
            "operator_re_im": mat(self.operator),
            "raw_block_re_im": mat(self.raw_block),
            "leakage": float(self.leakage),
            "global_phase_rad": float(self.global_phase),
            "fidelity": None if self.fidelity is None else float(self.fidelity),
            "flagged": bool(self.flagged),
        }


def _phase_split(block: np.ndarray):
    w = _nearest_unitary(block)
    col = np.abs(w[:, 0])
    k = int(np.argmax(col))
    phase = cmath.phase(w[k, 0]) if col[k] > 0 else 0.0
    # Convention: phase of <0|U|0> when it is non-negligible, else of <1|U|0>.
    return w * cmath.exp(-1j * phase), phase


def extract_gate(model: HamiltonianModel, config: PropagationConfig | None = None,
                 ideal: np.ndarray | None = None,
                 leakage_bound: float = 0.05) -> GateOutcome:
    """Propagate the two hyperfine qubit states through the full dynamics and
    project the result back onto the qubit subspace.

    For the stretched towers (|m_F| = I + 1/2, a single hyperfine state) the
    operator is the identity and only the global phase and leakage are
    physical. Outcomes with leakage above ``leakage_bound`` are flagged, not
    rejected.
    """
    config = config or PropagationConfig()
    q0, q1 = model.qubit_vectors()
    if q1 is None:
        psi_f, _ = propagate_schrodinger(model, q0, config)
        amp = complex(np.vdot(q0, psi_f))
        raw = np.diag([amp, amp]).astype(complex)
        leakage = 1.0 - abs(amp) ** 2
        op, phase = np.eye(2, dtype=complex), cmath.phase(amp)
    else:
        raw = np.zeros((2, 2), dtype=complex)
        for j, q in enumerate((q0, q1)):
            psi_f, _ = propagate_schrodinger(model, q, config)
            raw[0, j] = np.vdot(q0, psi_f)
            raw[1, j] = np.vdot(q1, psi_f)
        leakage = 1.0 - 0.5 * float(np.sum(np.abs(raw) ** 2))
        op, phase = _phase_split(raw)
    fid = None if ideal is None else gate_fidelity(raw, ideal)
    return GateOutcome(operator=op, raw_block=raw, leakage=leakage,
                       global_phase=phase, fidelity=fid,
                       flagged=leakage > leakage_bound)


def gate_fidelity(gate, ideal: np.ndarray) -> float:
    """Mean of |<psi| U_ideal^dag A |psi>|^2 over the four-state input set.

    ``gate`` may be a 2x2 array or a GateOutcome (whose raw projected block
    is used, so leakage lowers the fidelity)."""
    a = gate.raw_block if isinstance(gate, GateOutcome) else np.asarray(gate)
    m = np.asarray(ideal).conj().T @ a
    return float(np.mean([abs(np.vdot(psi, m @ psi)) ** 2
                          for psi in FIDELITY_INPUT_STATES]))


def average_fidelity(model: HamiltonianModel, ideal: np.ndarray,
                     config: PropagationConfig | None = None,
                     method: str = "auto") -> float:
    """Four-state average gate fidelity from full propagation.

    ``method``: "lindblad" propagates density matrices with decay,
    "schrodinger" uses pure states, "auto" follows the model's decay option.
    """
    config = config or PropagationConfig()
    if method == "auto":
        method = "lindblad" if model.options.include_decay else "schrodinger"
    q0, q1 = model.qubit_vectors()
    if q1 is None:
        raise ParameterError("average_fidelity needs a two-state qubit tower")
    fids = []
    for psi in FIDELITY_INPUT_STATES:
        emb = psi[0] * q0 + psi[1] * q1
        tgt = ideal @ psi
        tgt_emb = tgt[0] * q0 + tgt[1] * q1
        if method == "lindblad":
            rho0 = np.outer(emb, emb.conj())
            rho_f, _ = propagate_lindblad(model, rho0, config)
            fids.append(float(np.real(np.vdot(tgt_emb, rho_f @ tgt_emb))))
        elif method == "schrodinger":
            psi_f, _ = propagate_schrodinger(model, emb, config)
            fids.append(abs(np.vdot(tgt_emb, psi_f)) ** 2)
        else:
            raise ParameterError(f"unknown fidelity method {method!r}")
    return float(np.mean(fids))


def rotation_angle(gate) -> float:
    """Rotation angle of the nearest x-like rotation to an extracted gate,
    in [0, pi] (sign resolved from the off-diagonal phase when away from the
    endpoints)."""
    block = gate.raw_block if isinstance(gate, GateOutcome) else np.asarray(gate)
    w = _nearest_unitary(block)
    mag = 2.0 * math.atan2(abs(w[1, 0]), abs(w[0, 0]))
    s = np.real(1j * w[1, 0] * np.conj(w[0, 0]))
    if abs(s) > 1e-12 and s < 0.0:
        return -mag
    return mag


def free_evolution(omega_hf: float, delay: float) -> np.ndarray:
    """Free qubit evolution between pulse pairs: the lower hyperfine state
    accumulates phase exp(i w_hf T) relative to the upper."""
    return np.diag([1.0, cmath.exp(1j * omega_hf * delay)]).astype(complex)


def ramsey_probability(u_first, u_second, omega_hf: float, delay: float) -> float:
    """|<1| U2 . free(T) . U1 |0>|^2 for a two-gate Ramsey sequence."""
    a = _as_block(u_second) @ free_evolution(omega_hf, delay) @ _as_block(u_first)
    return float(abs(a[1, 0]) ** 2)


def _as_block(u):
    return u.raw_block if isinstance(u, GateOutcome) else np.asarray(u)
