"""Rotating-frame Hamiltonian assembly and propagation.

The frame rotates at the common laser carrier, with the chirped pulse phases
carried in complex envelopes, so overlapping pulses interfere correctly
without frame stitching. Ground S1/2 sublevels sit at zero energy (optionally
split by the hyperfine term), P1/2 at w0 - wp and P3/2 at w0 + dfs - wp.

Coupling convention: the off-diagonal <e|H|g> is the area-A complex pulse
envelope times the relative dipole factor, so the envelope plays the role of
the half-Rabi coupling W(t)/2 in the standard two-level form
(1/2)[[-D, W], [W, D]]; the full Rabi frequency integrates to 2A per pulse
and circular component. This normalization is what yields the documented
high-fidelity adiabatic-passage plateau (diabatic loss per crossing is
exp(-pi/(4 eta)) with eta = chirp_rate / peak_coupling^2, so the halved
coupling would leave a few-percent loss at the default settings).

For one magnetic tower m_F, the basis holds the two ground sublevels
m_J = -+1/2 (one for |m_F| = I + 1/2) and the P1/2 sublevels they couple to.
The far-off-resonant P3/2 manifold is adiabatically eliminated: with
include_p32 on, each ground sublevel picks up the time-dependent light shift
-(half-Rabi)^2 / (instantaneous detuning of the swept line), summed over
circular components and pulses. Eliminating rather than populating that
manifold matches the detuning-replacement treatment of the level scheme:
the chirp sweeps the instantaneous frequency through the far line late in
each pulse, and keeping the states in the basis would turn that spectral
tail into a spurious few-percent Landau-Zener transfer.
With decay enabled, every spontaneous-emission target ground sublevel is
added so the Lindblad evolution is trace preserving; targets outside the
driven tower stay uncoupled (re-excitation of decayed population is a
second-order effect in the decay rate and is neglected).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import _kernels
from .atom import (AtomSpec, BasisState, Level, decay_branching,
                   hyperfine_decomposition, sigma_coupling)
from .errors import ParameterError
from .pulse import PulseSequence, integration_window

__all__ = [
    "ModelOptions",
    "PropagationConfig",
    "HamiltonianModel",
    "TrajectoryRecord",
    "PathwayPhases",
    "Eigensystem",
    "state_label",
    "build_hamiltonian",
    "propagate_schrodinger",
    "propagate_lindblad",
    "adiabaticity",
    "instantaneous_eigensystem",
    "pathway_phases",
    "write_trajectory_csv",
]


@dataclass(frozen=True)
class ModelOptions:
    include_p32: bool = True
    include_decay: bool = True
    include_hyperfine: bool = False


@dataclass(frozen=True)
class PropagationConfig:
    """Integrator settings: tolerances, step cap (0 = uncapped), window
    multiplier k, and number of trajectory samples when recording."""

    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_step: float = 0.0
    window_multiplier: float = 5.0
    n_samples: int = 200

    def __post_init__(self):
        if self.rel_tol <= 0.0 or self.abs_tol <= 0.0:
            raise ParameterError("integration tolerances must be > 0")
        if self.window_multiplier <= 0.0:
            raise ParameterError("window multiplier must be > 0")


def _fmt_half(x: float) -> str:
    frac = Fraction(x).limit_denominator(2)
    return f"{frac.numerator}/{frac.denominator}" if frac.denominator == 2 \
        else str(frac.numerator)


def state_label(s: BasisState) -> str:
    # Semicolon separator keeps the labels usable as CSV column names.
    return f"{s.level.name}(mj={_fmt_half(s.m_j)};mi={_fmt_half(s.m_i)})"


@dataclass
class HamiltonianModel:
    """Assembled rotating-frame system for one m_F tower.

    Use :meth:`build`; the constructor fields hold precomputed arrays shared
    by both propagation kernels.
    """

    atom: AtomSpec
    sequence: PulseSequence
    m_f: float
    options: ModelOptions
    basis: list = field(default_factory=list)
    index: dict = field(default_factory=dict)
    h0: np.ndarray = None
    m_plus: np.ndarray = None
    m_minus: np.ndarray = None
    pulse_center: np.ndarray = None
    pulse_inv_dur: np.ndarray = None
    pulse_chirp_rate: np.ndarray = None
    pulse_amp: np.ndarray = None
    pulse_phase: np.ndarray = None
    pulse_pol_p: np.ndarray = None
    pulse_pol_m: np.ndarray = None
    stark_p: np.ndarray = None
    stark_m: np.ndarray = None
    stark_det: float = 0.0
    decay_dst: np.ndarray = None
    decay_src: np.ndarray = None
    decay_rate: np.ndarray = None
    carrier: float = 0.0

    @classmethod
    def build(cls, atom: AtomSpec, sequence: PulseSequence, m_f: float = 0.0,
              options: ModelOptions = ModelOptions()) -> "HamiltonianModel":
        if len(sequence) == 0:
            raise ParameterError("pulse sequence is empty")
        carriers = {p.carrier_frequency for p in sequence.pulses}
        if len(carriers) > 1:
            raise ParameterError(
                "all pulses must share one carrier frequency (single rotating frame)")
        carrier = sequence.pulses[0].carrier_frequency
        i_spin = atom.nuclear_spin
        if abs(m_f) > i_spin + 0.5:
            raise ParameterError(f"|m_F|={abs(m_f)} exceeds I+1/2={i_spin + 0.5}")

        grounds = []
        for m_j in (-0.5, 0.5):
            m_i = m_f - m_j
            if abs(m_i) <= i_spin:
                grounds.append(BasisState(Level.S12, m_j, m_i))

        excited = []
        for g in grounds:
            for q in (+1, -1):
                m_j_up = g.m_j + q
                if abs(m_j_up) > Level.P12.j:
                    continue
                if sigma_coupling(q, g.m_j, Level.P12,
                                  atom.d2_coupling_ratio) == 0.0:
                    continue
                s = BasisState(Level.P12, m_j_up, g.m_i)
                if s not in excited:
                    excited.append(s)

        basis = grounds + excited
        if options.include_decay:
            for e in excited:
                for q in (-1, 0, +1):
                    if decay_branching(e.level, e.m_j, q) == 0.0:
                        continue
                    tgt = BasisState(Level.S12, e.m_j - q, e.m_i)
                    if tgt not in basis:
                        basis.append(tgt)

        model = cls(atom=atom, sequence=sequence, m_f=m_f, options=options,
                    basis=basis, carrier=carrier)
        model.index = {s: i for i, s in enumerate(basis)}
        model._assemble()
        return model

    # -- assembly ---------------------------------------------------------

    def _assemble(self):
        atom, n = self.atom, len(self.basis)
        diag = np.zeros(n)
        for i, s in enumerate(self.basis):
            if s.level is Level.P12:
                diag[i] = atom.d1_frequency - self.carrier
        h0 = np.diag(diag).astype(complex)
        if self.options.include_hyperfine:
            q1 = self._qubit_vector(atom.nuclear_spin - 0.5)
            if q1 is not None:
                h0 -= atom.hf_splitting * np.outer(q1, q1.conj())
        self.h0 = h0

        mp = np.zeros((n, n), dtype=complex)
        mm = np.zeros((n, n), dtype=complex)
        sp = np.zeros(n)
        sm = np.zeros(n)
        for g in self.basis:
            if g.level is not Level.S12:
                continue
            gi = self.index[g]
            for q, mat, svec in ((+1, mp, sp), (-1, mm, sm)):
                if abs(g.m_j + q) <= Level.P12.j:
                    tgt = BasisState(Level.P12, g.m_j + q, g.m_i)
                    if tgt in self.index:
                        mat[self.index[tgt], gi] = sigma_coupling(
                            q, g.m_j, Level.P12, atom.d2_coupling_ratio)
                if self.options.include_p32 and abs(g.m_j + q) <= Level.P32.j:
                    fac = sigma_coupling(q, g.m_j, Level.P32,
                                         atom.d2_coupling_ratio)
                    svec[gi] = fac * fac
        self.m_plus, self.m_minus = mp, mm
        self.stark_p, self.stark_m = sp, sm
        self.stark_det = atom.d1_frequency + atom.fs_splitting - self.carrier

        pulses = self.sequence.pulses
        tps = [p.time_params for p in pulses]
        self.pulse_center = np.array([p.arrival_time for p in pulses])
        self.pulse_inv_dur = np.array([1.0 / tp.duration for tp in tps])
        self.pulse_chirp_rate = np.array([tp.chirp_rate for tp in tps])
        self.pulse_amp = np.array([p.peak_rabi for p in pulses])
        self.pulse_phase = np.array(
            [tp.chirp_phase + p.phase for tp, p in zip(tps, pulses)])
        pol = [p.polarization.circular_factors() for p in pulses]
        self.pulse_pol_p = np.array([f[0] for f in pol], dtype=complex)
        self.pulse_pol_m = np.array([f[1] for f in pol], dtype=complex)

        dst, src, rate = [], [], []
        if self.options.include_decay:
            for e in self.basis:
                if e.level is Level.S12:
                    continue
                gamma = atom.decay_rate(e.level)
                if gamma == 0.0:
                    continue
                for q in (-1, 0, +1):
                    b = decay_branching(e.level, e.m_j, q)
                    if b == 0.0:
                        continue
                    tgt = BasisState(Level.S12, e.m_j - q, e.m_i)
                    dst.append(self.index[tgt])
                    src.append(self.index[e])
                    rate.append(gamma * b)
        self.decay_dst = np.array(dst, dtype=np.intp)
        self.decay_src = np.array(src, dtype=np.intp)
        self.decay_rate = np.array(rate, dtype=float)

    # -- views ------------------------------------------------------------

    @property
    def dim(self) -> int:
        return len(self.basis)

    def ground_index(self, m_j: float) -> int:
        s = BasisState(Level.S12, m_j, self.m_f - m_j)
        if s not in self.index:
            raise ParameterError(
                f"ground m_j={m_j} is outside the m_F={self.m_f} tower")
        return self.index[s]

    def _qubit_vector(self, f: float):
        try:
            terms = hyperfine_decomposition(self.atom.nuclear_spin, f, self.m_f)
        except ParameterError:
            return None
        vec = np.zeros(len(self.basis), dtype=complex)
        for m_j, m_i, coeff in terms:
            vec[self.index[BasisState(Level.S12, m_j, m_i)]] = coeff
        return vec

    def qubit_vectors(self):
        """Embedded |0_mF>, |1_mF> (F = I+1/2, I-1/2); the second is None
        for the stretched |m_F| = I + 1/2 towers."""
        i_spin = self.atom.nuclear_spin
        q0 = self._qubit_vector(i_spin + 0.5)
        q1 = self._qubit_vector(i_spin - 0.5) if abs(self.m_f) <= i_spin - 0.5 \
            else None
        return q0, q1

    def window(self, k: float) -> tuple[float, float]:
        return integration_window(self.sequence, k)

    def coupling_scalars(self, t: float) -> tuple[complex, complex]:
        """Summed complex pulse envelopes (plus, minus) at time t; these act
        directly as the half-Rabi couplings (see module docstring)."""
        return _kernels._pykernels._coupling_scalars(
            t, self.pulse_center, self.pulse_inv_dur, self.pulse_chirp_rate,
            self.pulse_amp, self.pulse_phase, self.pulse_pol_p,
            self.pulse_pol_m)

    def stark_diagonal(self, t: float) -> np.ndarray:
        """Ground-level light-shift vector (rad/ps) from the eliminated
        P3/2 manifold at time t; zero with include_p32 off."""
        return _kernels._pykernels._stark_diagonal(
            t, self.pulse_center, self.pulse_inv_dur, self.pulse_chirp_rate,
            self.pulse_amp, np.abs(self.pulse_pol_p) ** 2,
            np.abs(self.pulse_pol_m) ** 2, self.stark_p, self.stark_m,
            self.stark_det)


def build_hamiltonian(model: HamiltonianModel, t: float) -> np.ndarray:
    """Hermitian H(t) (rad/ps) in the model basis."""
    sp, sm = model.coupling_scalars(t)
    h = model.h0 + sp * model.m_plus + sm * model.m_minus
    h += np.conj(sp) * model.m_plus.conj().T + np.conj(sm) * model.m_minus.conj().T
    h[np.diag_indices_from(h)] += model.stark_diagonal(t)
    return h


@dataclass
class TrajectoryRecord:
    """Sampled times with state vectors or density matrices and norms."""

    times: np.ndarray
    states: np.ndarray
    is_density: bool
    labels: list

    @property
    def norms(self) -> np.ndarray:
        if self.is_density:
            return np.real(np.trace(self.states, axis1=1, axis2=2))
        return np.linalg.norm(self.states, axis=1)

    def populations(self) -> np.ndarray:
        if self.is_density:
            return np.real(np.einsum("tii->ti", self.states))
        return np.abs(self.states) ** 2


def _kernel_args(model):
    return (model.h0, model.m_plus, model.m_minus, model.pulse_center,
            model.pulse_inv_dur, model.pulse_chirp_rate, model.pulse_amp,
            model.pulse_phase, model.pulse_pol_p, model.pulse_pol_m,
            model.stark_p, model.stark_m, model.stark_det,
            model.decay_dst, model.decay_src, model.decay_rate)


def _run(model, y0, config, lindblad, record, backend=None):
    kern = _kernels.get_backend(backend) if backend else _kernels
    t0, t1 = model.window(config.window_multiplier)
    t_eval = np.linspace(t0, t1, config.n_samples) if record else None
    yf, samples = kern.propagate(
        *_kernel_args(model), np.asarray(y0, dtype=complex), t0, t1,
        config.rel_tol, config.abs_tol, config.max_step, t_eval, lindblad)
    traj = None
    if record:
        traj = TrajectoryRecord(times=t_eval, states=samples,
                                is_density=lindblad,
                                labels=[state_label(s) for s in model.basis])
    return yf, traj


def propagate_schrodinger(model: HamiltonianModel, psi0, config=None,
                          record: bool = False, backend: str | None = None):
    """Integrate i psi' = H(t) psi over the pulse window.

    Returns (psi_final, TrajectoryRecord or None).
    """
    config = config or PropagationConfig()
    psi0 = np.asarray(psi0, dtype=complex)
    if psi0.shape != (model.dim,):
        raise ParameterError(
            f"psi0 has shape {psi0.shape}, expected ({model.dim},)")
    if abs(np.linalg.norm(psi0) - 1.0) > 1e-8:
        raise ParameterError("psi0 must be normalized")
    return _run(model, psi0, config, lindblad=False, record=record,
                backend=backend)


def propagate_lindblad(model: HamiltonianModel, rho0, config=None,
                       record: bool = False, backend: str | None = None):
    """Integrate the Lindblad master equation over the pulse window.

    Returns (rho_final, TrajectoryRecord or None).
    """
    config = config or PropagationConfig()
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape != (model.dim, model.dim):
        raise ParameterError(
            f"rho0 has shape {rho0.shape}, expected ({model.dim}, {model.dim})")
    if np.max(np.abs(rho0 - rho0.conj().T)) > 1e-10:
        raise ParameterError("rho0 must be Hermitian")
    if abs(np.trace(rho0).real - 1.0) > 1e-8:
        raise ParameterError("rho0 must have unit trace")
    if np.min(np.linalg.eigvalsh(0.5 * (rho0 + rho0.conj().T))) < -1e-10:
        raise ParameterError("rho0 must be positive semidefinite")
    return _run(model, rho0, config, lindblad=True, record=record,
                backend=backend)


def adiabaticity(pulse, t, peak_rabi: float | None = None):
    """Adiabaticity parameter eta(t) of the two-level reduction of one
    chirped pulse; RAP requires eta << 1 throughout.

    ``t`` is absolute time (ps); internally measured from the pulse center.
    A vanishing drive and chirp at the crossing is singular and reported as
    +inf.
    """
    tp = pulse.time_params
    om0 = pulse.peak_rabi if peak_rabi is None else peak_rabi
    tt = np.asarray(t, dtype=float) - pulse.arrival_time
    om = om0 * np.exp(-((tt / tp.duration) ** 2))
    gam = tp.chirp_rate
    num = abs(gam) * np.abs(om) * (2.0 * tt**2 / tp.duration**2 + 1.0)
    den = (om**2 + 4.0 * gam**2 * tt**2) ** 1.5
    with np.errstate(divide="ignore", invalid="ignore"):
        eta = np.where(den > 0.0, num / np.where(den > 0, den, 1.0), np.inf)
        if gam == 0.0:
            eta = np.zeros_like(tt)
    return eta if eta.shape else float(eta)


@dataclass(frozen=True)
class Eigensystem:
    """Instantaneous two-level eigensystem: mixing angle in [0, pi/2] and
    the dressed energies +-sqrt(W^2 + D^2)/2."""

    mixing_angle: float
    energy_plus: float
    energy_minus: float
    degenerate: bool


def instantaneous_eigensystem(omega: float, delta: float) -> Eigensystem:
    r = math.hypot(omega, delta)
    if r == 0.0:
        return Eigensystem(math.nan, 0.0, 0.0, True)
    theta = 0.5 * math.atan2(abs(omega), delta)
    return Eigensystem(theta, 0.5 * r, -0.5 * r, False)


@dataclass(frozen=True)
class PathwayPhases:
    """Ground-return phases of the two circularly driven pathways after a
    cyclic two-pulse evolution; phi_minus belongs to the sigma+-driven
    m_J = -1/2 pathway."""

    phi_plus: float
    phi_minus: float
    return_population_plus: float
    return_population_minus: float

    @property
    def relative(self) -> float:
        """phi_minus - phi_plus wrapped to (-pi, pi]."""
        d = self.phi_minus - self.phi_plus
        return math.remainder(d, 2.0 * math.pi)


def pathway_phases(model: HamiltonianModel, config=None,
                   return_threshold: float = 0.99) -> PathwayPhases:
    """Propagate each fine-structure ground sublevel through the two-pulse
    drive and return the phases of the returned ground amplitudes."""
    from .errors import NonCyclicEvolutionError

    config = config or PropagationConfig()
    out = {}
    for m_j in (0.5, -0.5):
        idx = model.ground_index(m_j)
        psi0 = np.zeros(model.dim, dtype=complex)
        psi0[idx] = 1.0
        psi_f, _ = propagate_schrodinger(model, psi0, config)
        amp = psi_f[idx]
        pop = abs(amp) ** 2
        if pop < return_threshold:
            raise NonCyclicEvolutionError(
                f"non-cyclic evolution: ground return population {pop:.4f} "
                f"< {return_threshold} for m_J={m_j}", return_population=pop)
        out[m_j] = (math.atan2(amp.imag, amp.real), pop)
    return PathwayPhases(phi_plus=out[0.5][0], phi_minus=out[-0.5][0],
                         return_population_plus=out[0.5][1],
                         return_population_minus=out[-0.5][1])


def write_trajectory_csv(record: TrajectoryRecord, path, header_lines=()):
    """CSV export: t_ps then re/im per basis state (states) or populations
    (density matrices)."""
    with open(path, "w") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        if record.is_density:
            cols = [f"pop_{lab}" for lab in record.labels]
            data = record.populations()
        else:
            cols = []
            for lab in record.labels:
                cols.extend((f"re_{lab}", f"im_{lab}"))
            data = np.empty((len(record.times), 2 * len(record.labels)))
            data[:, 0::2] = record.states.real
            data[:, 1::2] = record.states.imag
        fh.write("t_ps," + ",".join(cols) + "\n")
        for t, row in zip(record.times, data):
            fh.write(f"{t:.9g}," + ",".join(f"{v:.12g}" for v in row) + "\n")
