"""Least-squares fits of fringe and Ramsey curves, ellipticity fringe-shift
gradients, and Bloch-vector extraction from trajectories.

Both fit models are low-dimensional and smooth, so a damped Gauss-Newton
(Levenberg-Marquardt) engine with analytic Jacobians is sufficient; 95%
confidence half-widths come from the linearized covariance at the optimum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from .errors import FitError, ParameterError

__all__ = [
    "FitResult",
    "fringe_model",
    "ramsey_model",
    "fit_fringe",
    "fit_ramsey",
    "fringe_simulation",
    "fringe_shift_gradient",
    "bloch_trajectory",
    "RB87_HF_FREQ",
]

# Ground hyperfine frequency of Rb-87 in cycles/ps (THz); default center of
# the Ramsey frequency search window.
RB87_HF_FREQ = 6.8346826109e-3

_MAX_ITER = 200


@dataclass
class FitResult:
    """Converged parameter estimates with 95% confidence half-widths.

    ``params`` and ``ci95`` are keyed by parameter name; ``flags`` collects
    non-fatal warnings such as alias ambiguity of the Ramsey frequency.
    """

    params: dict
    ci95: dict
    residual_norm: float
    converged: bool
    n_samples: int
    flags: list = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "params": {k: float(v) for k, v in self.params.items()},
            "ci95": {k: float(v) for k, v in self.ci95.items()},
            "residual_norm": float(self.residual_norm),
            "converged": bool(self.converged),
            "n_samples": int(self.n_samples),
            "flags": list(self.flags),
        }


def fringe_model(theta, gamma: float, dtheta: float, delta: float):
    """P(theta) = gamma sin^2(theta + dtheta) + delta."""
    return gamma * np.sin(np.asarray(theta) + dtheta) ** 2 + delta


def ramsey_model(delay, gamma_r: float, f_r: float, phi_r: float,
                 delta_r: float):
    """P(dT) = gamma_r cos^2(pi f_r dT + phi_r) + delta_r.

    ``f_r`` is in cycles/ps; any constant visibility factor (the sin(Theta)
    dependence of the two-gate sequence) is absorbed into gamma_r.
    """
    return gamma_r * np.cos(math.pi * f_r * np.asarray(delay) + phi_r) ** 2 \
        + delta_r


def _covariance_ci(jac, residuals, n_params):
    n = residuals.size
    dof = n - n_params
    if dof <= 0:
        return None
    sigma2 = float(residuals @ residuals) / dof
    jtj = jac.T @ jac
    try:
        cov = sigma2 * np.linalg.inv(jtj)
    except np.linalg.LinAlgError:
        return None
    d = np.diag(cov)
    if np.any(d < -1e-12):
        return None
    return 1.96 * np.sqrt(np.maximum(d, 0.0))


def _run_lm(residual_fn, jac_fn, x0):
    return least_squares(residual_fn, x0, jac=jac_fn, method="lm",
                         max_nfev=_MAX_ITER * (len(x0) + 1))


def _as_xy(samples):
    arr = np.asarray(samples, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise FitError("samples must be a sequence of (x, y) pairs")
    return arr[:, 0], arr[:, 1]


def fit_fringe(samples) -> FitResult:
    """Fit P(theta) = gamma sin^2(theta + dtheta) + delta.

    Needs at least 6 samples spanning at least half a fringe period (pi/2).
    The shift estimate is reported wrapped into (-pi/2, pi/2].
    """
    theta, p = _as_xy(samples)
    if theta.size < 6:
        raise FitError(f"fringe fit needs >= 6 samples, got {theta.size}")
    if np.ptp(theta) < 0.5 * math.pi - 1e-12:
        raise FitError("fringe samples must span at least half a period")

    # Seed: for fixed dtheta the model is linear in (gamma, delta).
    best = None
    for dt0 in np.linspace(-0.5 * math.pi, 0.5 * math.pi, 37, endpoint=False):
        basis = np.column_stack([np.sin(theta + dt0) ** 2, np.ones_like(theta)])
        coef, *_ = np.linalg.lstsq(basis, p, rcond=None)
        ssr = float(np.sum((basis @ coef - p) ** 2))
        if best is None or ssr < best[0]:
            best = (ssr, dt0, coef[0], coef[1])
    x0 = np.array([best[2], best[1], best[3]])

    def resid(x):
        return fringe_model(theta, *x) - p

    def jac(x):
        gamma, dt, _ = x
        s = np.sin(theta + dt)
        return np.column_stack([s * s, gamma * np.sin(2.0 * (theta + dt)),
                                np.ones_like(theta)])

    sol = _run_lm(resid, jac, x0)
    gamma, dt, delta = sol.x
    # Fold the sign/offset ambiguity: gamma sin^2(t+dt) is invariant under
    # dt -> dt + pi and (gamma, dt, delta) -> (-gamma, dt + pi/2, delta+gamma).
    if gamma < 0.0:
        delta += gamma
        gamma = -gamma
        dt += 0.5 * math.pi
    dt = math.remainder(dt, math.pi)
    if dt <= -0.5 * math.pi:
        dt += math.pi
    res = fringe_model(theta, gamma, dt, delta) - p
    jfinal = jac((gamma, dt, delta))
    ci = _covariance_ci(jfinal, res, 3)
    flags = [] if ci is not None else ["singular-covariance"]
    ci = ci if ci is not None else np.full(3, np.inf)
    return FitResult(
        params={"gamma": gamma, "dtheta": dt, "delta": delta},
        ci95={"gamma": ci[0], "dtheta": ci[1], "delta": ci[2]},
        residual_norm=float(np.linalg.norm(res)),
        converged=bool(sol.success), n_samples=theta.size, flags=flags)


def _ramsey_grid_seed(delay, p, window):
    """Coarse frequency scan; the model is linear in (offset, cos, sin) at
    fixed frequency. Returns (ssr_array, freqs, best_coefs)."""
    f_lo, f_hi = window
    freqs = np.linspace(f_lo, f_hi, 201)
    ssr = np.empty_like(freqs)
    coefs = []
    for i, f in enumerate(freqs):
        x = 2.0 * math.pi * f * delay
        basis = np.column_stack([np.ones_like(delay), np.cos(x), np.sin(x)])
        c, *_ = np.linalg.lstsq(basis, p, rcond=None)
        ssr[i] = float(np.sum((basis @ c - p) ** 2))
        coefs.append(c)
    return ssr, freqs, coefs


def fit_ramsey(samples, frequency_window=None) -> FitResult:
    """Fit P(dT) = gamma_r cos^2(pi f_r dT + phi_r) + delta_r.

    ``frequency_window`` is the (low, high) search range for f_r in
    cycles/ps; defaults to +-20% around the Rb-87 hyperfine frequency. The
    seed comes from a coarse grid scan (robust to irregular delay grids);
    competing grid minima of comparable quality set an "alias-ambiguity"
    flag.
    """
    delay, p = _as_xy(samples)
    if delay.size < 10:
        raise FitError(f"Ramsey fit needs >= 10 samples, got {delay.size}")
    if frequency_window is None:
        frequency_window = (0.8 * RB87_HF_FREQ, 1.2 * RB87_HF_FREQ)
    ssr, freqs, coefs = _ramsey_grid_seed(delay, p, frequency_window)
    k = int(np.argmin(ssr))
    flags = []
    interior = ssr[1:-1]
    local_min = (interior <= ssr[:-2]) & (interior <= ssr[2:])
    idx = np.nonzero(local_min)[0] + 1
    good = [i for i in idx
            if ssr[i] < ssr[k] + 0.1 * (np.max(ssr) - ssr[k] + 1e-30)]
    if len({round(freqs[i], 6) for i in good}) > 1:
        flags.append("alias-ambiguity")

    c0, c1, c2 = coefs[k]
    amp = 2.0 * math.hypot(c1, c2)
    phi0 = 0.5 * math.atan2(-c2, c1)
    x0 = np.array([amp, freqs[k], phi0, c0 - 0.5 * amp])

    def resid(x):
        return ramsey_model(delay, *x) - p

    def jac(x):
        gamma_r, f_r, phi_r, _ = x
        arg = math.pi * f_r * delay + phi_r
        c = np.cos(arg)
        dphase = -gamma_r * np.sin(2.0 * arg)
        return np.column_stack([c * c, dphase * math.pi * delay, dphase,
                                np.ones_like(delay)])

    sol = _run_lm(resid, jac, x0)
    gamma_r, f_r, phi_r, delta_r = sol.x
    if gamma_r < 0.0:
        delta_r += gamma_r
        gamma_r = -gamma_r
        phi_r += 0.5 * math.pi
    phi_r = math.remainder(phi_r, math.pi)
    res = ramsey_model(delay, gamma_r, f_r, phi_r, delta_r) - p
    jfinal = jac((gamma_r, f_r, phi_r, delta_r))
    ci = _covariance_ci(jfinal, res, 4)
    if ci is None:
        flags.append("singular-covariance")
        ci = np.full(4, np.inf)
    converged = bool(sol.success)
    if not frequency_window[0] <= f_r <= frequency_window[1]:
        flags.append("frequency-outside-window")
    return FitResult(
        params={"gamma_r": gamma_r, "f_r": f_r, "phi_r": phi_r,
                "delta_r": delta_r},
        ci95={"gamma_r": ci[0], "f_r": ci[1], "phi_r": ci[2],
              "delta_r": ci[3]},
        residual_norm=float(np.linalg.norm(res)),
        converged=converged, n_samples=delay.size, flags=flags)


def fringe_simulation(config: dict, thetas=None):
    """Simulated fringe P(theta) = |<1|U(theta)|0>|^2 over relative
    polarization angles, from full gate extraction on the configured tower.

    Returns an array of (theta, P) rows ready for :func:`fit_fringe`.
    """
    from . import gates
    from .scenario import build_model, build_propagation, set_by_path

    import copy
    if thetas is None:
        thetas = np.linspace(0.0, math.pi, 13)
    cfg = copy.deepcopy(config)
    prop = build_propagation(cfg)
    rows = []
    for th in np.asarray(thetas, dtype=float):
        set_by_path(cfg, "pulse.theta2_rad",
                    cfg["pulse"]["theta1_rad"] + float(th))
        model = build_model(cfg)
        out = gates.extract_gate(model, prop)
        rows.append((float(th), float(abs(out.raw_block[1, 0]) ** 2)))
    return np.array(rows)


def fringe_shift_gradient(config: dict, ellipticity: float, areas,
                          thetas=None) -> tuple[float, list]:
    """Slope of the fitted fringe shift dtheta versus pulse area.

    For each area (rad) the fringe is simulated at the given ellipticity and
    fitted; the returned slope is the linear-regression coefficient of
    dtheta against area, in rad of shift per rad of area (dimensionless).
    Also returns the per-area (area, dtheta) list for inspection.
    """
    import copy
    areas = np.asarray(areas, dtype=float)
    if areas.size < 3:
        raise ParameterError("gradient needs at least 3 pulse areas")
    cfg = copy.deepcopy(config)
    cfg["pulse"]["ellipticity"] = float(ellipticity)
    shifts = []
    for area in areas:
        cfg["pulse"]["area_pi"] = float(area / math.pi)
        fit = fit_fringe(fringe_simulation(cfg, thetas))
        if not fit.converged:
            raise FitError(f"fringe fit failed at area {area:.3f} rad")
        shifts.append(fit.params["dtheta"])
    slope = float(np.polyfit(areas, shifts, 1)[0])
    return slope, list(zip(areas.tolist(), shifts))


def bloch_trajectory(record, index_g: int, index_e: int,
                     population_bound: float = 0.99):
    """Bloch vectors (t, x, y, z) of a two-level selection of a trajectory.

    x = 2 Re(rho_ge), y = 2 Im(rho_ge), z = rho_gg - rho_ee. Samples where
    the selected pair holds less than ``population_bound`` of the total
    population are flagged (second return value True) but still emitted.
    """
    times = np.asarray(record.times, dtype=float)
    rows = np.empty((times.size, 4))
    flagged = False
    for k in range(times.size):
        if record.is_density:
            rho = record.states[k]
            pgg = float(np.real(rho[index_g, index_g]))
            pee = float(np.real(rho[index_e, index_e]))
            coh = complex(rho[index_g, index_e])
            total = float(np.real(np.trace(rho)))
        else:
            psi = record.states[k]
            a, b = complex(psi[index_g]), complex(psi[index_e])
            pgg, pee = abs(a) ** 2, abs(b) ** 2
            coh = a * np.conj(b)
            total = float(np.linalg.norm(psi) ** 2)
        if pgg + pee < population_bound * total:
            flagged = True
        rows[k] = (times[k], 2.0 * coh.real, 2.0 * coh.imag, pgg - pee)
    return rows, flagged
