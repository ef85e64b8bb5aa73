"""Pure-numpy propagation kernel.

Shares its call signature with the compiled Cython kernel in ``_core``;
``berrygate._kernels`` selects whichever is importable. The integrator is an
embedded Dormand-Prince 5(4) pair with FSAL and proportional step control.

The Hamiltonian is H(t) = H0 + s+(t) M+ + s-(t) M- + h.c. + diag(stark(t)),
where the complex scalars s+-(t) sum the chirped Gaussian envelopes of all
pulses multiplied by their circular-polarization factors, and stark(t) is the
ground-level light shift from the adiabatically eliminated far-off-resonant
excited manifold. Dissipation uses single-entry jump operators
sqrt(rate) |dst><src|.
"""

from __future__ import annotations

import numpy as np

from ..errors import IntegrationError

BACKEND_NAME = "python"

# Dormand-Prince 5(4) tableau.
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200,
                187 / 2100, 1 / 40])
_E = _B5 - _B4

_MIN_STEP_FACTOR = 1e-14


def _coupling_scalars(t, center, inv_dur, chirp_rate, amp, phase, pol_p, pol_m):
    dt = t - center
    x2 = (dt * inv_dur) ** 2
    base = amp * np.exp(-x2 - 1j * (chirp_rate * dt * dt + phase))
    return np.sum(base * pol_p), np.sum(base * pol_m)


def _stark_diagonal(t, center, inv_dur, chirp_rate, amp, polp2, polm2,
                    stark_p, stark_m, stark_det):
    """Ground-level light shift vector from the eliminated excited manifold.

    Per pulse j and circular component q, the squared half-Rabi coupling is
    w = (amp_j exp(-x^2) |pol_qj|)^2 stark_q[g] and the instantaneous
    detuning of the eliminated level is d = stark_det - 2 G_j (t - t_j). The
    shift -w d / (d^2 + 4w) reduces to the perturbative -w/d far from the
    swept crossing and stays bounded (and odd in d) through it, where the
    envelope tail makes the contribution negligible anyway.
    """
    dt = t - center
    x2 = (dt * inv_dur) ** 2
    a2 = (amp * np.exp(-x2)) ** 2
    det = stark_det - 2.0 * chirp_rate * dt
    out = np.zeros(stark_p.shape[0])
    for j in range(center.shape[0]):
        for coeff, vec in ((a2[j] * polp2[j], stark_p),
                           (a2[j] * polm2[j], stark_m)):
            w = coeff * vec
            out -= w * det[j] / (det[j] * det[j] + 4.0 * w + 1e-300)
    return out


class _System:
    """RHS evaluator bound to one propagation problem."""

    def __init__(self, h0, mp, mm, center, inv_dur, chirp_rate, amp, phase,
                 pol_p, pol_m, stark_p, stark_m, stark_det,
                 decay_dst, decay_src, decay_rate, lindblad):
        self.h0 = h0
        self.mp = mp
        self.mm = mm
        self.mp_dag = mp.conj().T.copy()
        self.mm_dag = mm.conj().T.copy()
        self.pulse_args = (center, inv_dur, chirp_rate, amp, phase, pol_p, pol_m)
        self.stark_args = (center, inv_dur, chirp_rate, amp,
                           np.abs(pol_p) ** 2, np.abs(pol_m) ** 2,
                           stark_p, stark_m, stark_det)
        self.has_stark = bool(np.any(stark_p) or np.any(stark_m))
        self.decay_dst = decay_dst
        self.decay_src = decay_src
        self.decay_rate = decay_rate
        self.lindblad = lindblad

    def hamiltonian(self, t):
        sp, sm = _coupling_scalars(t, *self.pulse_args)
        h = self.h0 + sp * self.mp + sm * self.mm
        h += np.conj(sp) * self.mp_dag + np.conj(sm) * self.mm_dag
        if self.has_stark:
            d = _stark_diagonal(t, *self.stark_args)
            h[np.diag_indices_from(h)] += d
        return h

    def rhs(self, t, y):
        h = self.hamiltonian(t)
        if not self.lindblad:
            return -1j * (h @ y)
        dy = -1j * (h @ y - y @ h)
        for dst, src, rate in zip(self.decay_dst, self.decay_src,
                                  self.decay_rate):
            dy[dst, dst] += rate * y[src, src]
            dy[src, :] -= 0.5 * rate * y[src, :]
            dy[:, src] -= 0.5 * rate * y[:, src]
        return dy


def _error_norm(err, y_old, y_new, rtol, atol):
    scale = atol + rtol * np.maximum(np.abs(y_old), np.abs(y_new))
    return float(np.sqrt(np.mean(np.abs(err / scale) ** 2)))


def _integrate_segment(sys, t0, t1, y, rtol, atol, max_step, h, k1):
    """Advance y from t0 to t1; returns (y, last h, last k1)."""
    t = t0
    span = t1 - t0
    if span <= 0.0:
        return y, h, k1
    h = min(h, span, max_step)
    while t < t1:
        tiny = _MIN_STEP_FACTOR * max(1.0, abs(t))
        if t1 - t <= tiny:
            break  # within roundoff of the endpoint
        h = min(h, t1 - t)
        if h < tiny:
            raise IntegrationError(
                f"step size underflow at t={t:.6g} ps (h={h:.3g})", t=t, step=h)
        k = [k1]
        for i in range(1, 7):
            yi = y + h * sum(a * ki for a, ki in zip(_A[i], k))
            k.append(sys.rhs(t + _C[i] * h, yi))
        y5 = y + h * sum(b * ki for b, ki in zip(_B5[:6], k[:6]))
        # k[6] was evaluated at y5 (FSAL): b5[6] = 0 so y5 above is complete.
        err_vec = h * sum(e * ki for e, ki in zip(_E, k))
        err = _error_norm(err_vec, y, y5, rtol, atol)
        if err <= 1.0:
            t += h
            y = y5
            if sys.lindblad:
                y = 0.5 * (y + y.conj().T)
                k1 = sys.rhs(t, y)
            else:
                k1 = k[6]
            factor = 5.0 if err == 0.0 else min(5.0, 0.9 * err ** -0.2)
        else:
            factor = max(0.2, 0.9 * err ** -0.2)
        h = min(h * factor, max_step)
    return y, h, k1


def propagate(h0, mp, mm, center, inv_dur, chirp_rate, amp, phase, pol_p,
              pol_m, stark_p, stark_m, stark_det, decay_dst, decay_src,
              decay_rate, y0, t0, t1, rtol, atol, max_step, t_eval=None,
              lindblad=False):
    """Propagate a state vector (or density matrix when ``lindblad``) from t0
    to t1; returns (y_final, samples) with samples taken at ``t_eval``."""
    sys = _System(h0, mp, mm, center, inv_dur, chirp_rate, amp, phase,
                  pol_p, pol_m, stark_p, stark_m, stark_det,
                  decay_dst, decay_src, decay_rate, lindblad)
    y = np.array(y0, dtype=complex)
    if max_step is None or max_step <= 0.0:
        max_step = max(t1 - t0, 1e-12)
    breakpoints = [] if t_eval is None else list(t_eval)
    samples = []
    h = min(max_step, 1e-2, max(t1 - t0, 1e-12))
    k1 = sys.rhs(t0, y)
    t = t0
    for tb in breakpoints:
        y, h, k1 = _integrate_segment(sys, t, min(tb, t1), y, rtol, atol,
                                      max_step, h, k1)
        t = min(tb, t1)
        samples.append(y.copy())
    y, h, k1 = _integrate_segment(sys, t, t1, y, rtol, atol, max_step, h, k1)
    return y, (np.array(samples) if t_eval is not None else None)
