import math

import numpy as np
import pytest

from berrygate.analysis import (RB87_HF_FREQ, bloch_trajectory, fit_fringe,
                                fit_ramsey, fringe_model, fringe_simulation,
                                ramsey_model)
from berrygate.dynamics import propagate_schrodinger
from berrygate.errors import FitError, ParameterError
from berrygate.scenario import build_model, build_propagation, default_scenario


def _fringe_samples(gamma=0.9, dtheta=0.17, delta=0.05, n=25, noise=0.0,
                    rng=None):
    theta = np.linspace(0.0, math.pi, n)
    p = fringe_model(theta, gamma, dtheta, delta)
    if noise:
        p = p + rng.normal(0.0, noise, size=n)
    return np.column_stack([theta, p])


def _ramsey_samples(gamma_r=0.5, f_r=RB87_HF_FREQ, phi_r=0.3, delta_r=0.02,
                    n=61, noise=0.0, rng=None):
    delay = np.linspace(0.0, 400.0, n)
    p = ramsey_model(delay, gamma_r, f_r, phi_r, delta_r)
    if noise:
        p = p + rng.normal(0.0, noise, size=n)
    return np.column_stack([delay, p])


class TestFringeFit:
    def test_exact_recovery(self):
        fit = fit_fringe(_fringe_samples())
        assert fit.converged
        assert fit.params["gamma"] == pytest.approx(0.9, abs=1e-9)
        assert fit.params["dtheta"] == pytest.approx(0.17, abs=1e-9)
        assert fit.params["delta"] == pytest.approx(0.05, abs=1e-9)
        assert fit.residual_norm < 1e-9

    def test_noisy_recovery_within_ci(self, rng):
        fit = fit_fringe(_fringe_samples(noise=0.01, rng=rng))
        assert fit.converged
        assert abs(fit.params["dtheta"] - 0.17) < max(fit.ci95["dtheta"], 0.05)

    def test_sign_ambiguity_folded(self):
        # A fringe generated with negative amplitude is reported with
        # gamma >= 0 and a shifted dtheta describing the same curve.
        theta = np.linspace(0.0, math.pi, 31)
        p = -0.7 * np.sin(theta + 0.2) ** 2 + 0.9
        fit = fit_fringe(np.column_stack([theta, p]))
        assert fit.params["gamma"] >= 0.0
        np.testing.assert_allclose(
            fringe_model(theta, **fit.params), p, atol=1e-8)
        assert -0.5 * math.pi < fit.params["dtheta"] <= 0.5 * math.pi

    def test_insufficient_data_rejected(self):
        with pytest.raises(FitError):
            fit_fringe(_fringe_samples(n=4))
        narrow = _fringe_samples(n=20)
        narrow[:, 0] *= 0.2  # span < pi/2
        with pytest.raises(FitError):
            fit_fringe(narrow)
        with pytest.raises(FitError):
            fit_fringe(np.zeros((8, 3)))


class TestRamseyFit:
    def test_exact_recovery(self):
        fit = fit_ramsey(_ramsey_samples())
        assert fit.converged
        assert fit.params["f_r"] == pytest.approx(RB87_HF_FREQ, rel=1e-10)
        assert fit.params["gamma_r"] == pytest.approx(0.5, abs=1e-8)
        assert fit.params["phi_r"] == pytest.approx(0.3, abs=1e-8)

    def test_frequency_window_override(self):
        f_true = 2.0e-3
        fit = fit_ramsey(_ramsey_samples(f_r=f_true),
                         frequency_window=(1e-3, 3e-3))
        assert fit.params["f_r"] == pytest.approx(f_true, rel=1e-8)

    def test_noisy_recovery_within_ci(self, rng):
        fit = fit_ramsey(_ramsey_samples(noise=0.01, rng=rng))
        assert fit.converged
        assert abs(fit.params["f_r"] - RB87_HF_FREQ) < \
            max(3.0 * fit.ci95["f_r"], 1e-4 * RB87_HF_FREQ)

    def test_insufficient_data_rejected(self):
        with pytest.raises(FitError):
            fit_ramsey(_ramsey_samples(n=8))

    def test_json_output(self):
        fit = fit_ramsey(_ramsey_samples())
        d = fit.to_json_dict()
        assert set(d["params"]) == {"gamma_r", "f_r", "phi_r", "delta_r"}
        assert d["converged"] is True
        assert d["n_samples"] == 61


class TestMonteCarloCoverage:
    # Smaller companion of the acceptance criterion: each parameter's 95% CI
    # must cover its true value at roughly the nominal per-parameter rate.
    def test_fringe_ci_coverage(self):
        rng = np.random.default_rng(11)
        truth = (("gamma", 0.9), ("dtheta", 0.17), ("delta", 0.05))
        hits = {k: 0 for k, _ in truth}
        for _ in range(25):
            fit = fit_fringe(_fringe_samples(noise=0.01, rng=rng))
            for k, v in truth:
                hits[k] += abs(fit.params[k] - v) <= fit.ci95[k]
        assert min(hits.values()) >= 20

    def test_ramsey_ci_coverage(self):
        rng = np.random.default_rng(13)
        truth = (("gamma_r", 0.5), ("f_r", RB87_HF_FREQ), ("phi_r", 0.3),
                 ("delta_r", 0.02))
        hits = {k: 0 for k, _ in truth}
        for _ in range(25):
            fit = fit_ramsey(_ramsey_samples(noise=0.01, rng=rng))
            for k, v in truth:
                hits[k] += abs(fit.params[k] - v) <= fit.ci95[k]
        assert min(hits.values()) >= 20


class TestFringeSimulation:
    def test_simulated_fringe_fits_geometric_law(self):
        cfg = default_scenario()
        cfg["model"]["include_decay"] = False
        cfg["propagation"]["rel_tol"] = 1e-8
        cfg["propagation"]["abs_tol"] = 1e-10
        rows = fringe_simulation(cfg, thetas=np.linspace(0.0, math.pi, 9))
        fit = fit_fringe(rows)
        assert fit.converged
        # P(theta) = sin^2(theta) at zero ellipticity: full visibility,
        # no shift, no offset.
        assert fit.params["gamma"] == pytest.approx(1.0, abs=1e-2)
        assert fit.params["dtheta"] == pytest.approx(0.0, abs=1e-2)
        assert fit.params["delta"] == pytest.approx(0.0, abs=1e-2)


class TestBlochTrajectory:
    def test_rap_path_crosses_equator(self):
        cfg = default_scenario()
        cfg["pulse"]["count"] = 1
        cfg["model"]["include_decay"] = False
        model = build_model(cfg)
        prop = build_propagation(cfg)
        gi = model.ground_index(-0.5)
        ei = next(i for i, s in enumerate(model.basis)
                  if s.level.l == 1 and s.m_i == model.basis[gi].m_i)
        psi0 = np.zeros(model.dim, dtype=complex)
        psi0[gi] = 1.0
        _, rec = propagate_schrodinger(model, psi0, prop, record=True)
        rows, flagged = bloch_trajectory(rec, gi, ei)
        assert not flagged
        z = rows[:, 3]
        assert z[0] == pytest.approx(1.0, abs=1e-6)   # starts at the pole
        assert z[-1] == pytest.approx(-1.0, abs=1e-3)  # ends transferred
        r = np.linalg.norm(rows[:, 1:], axis=1)
        np.testing.assert_allclose(r, 1.0, atol=1e-6)

    def test_flagging_on_leaky_selection(self):
        cfg = default_scenario()
        cfg["model"]["include_decay"] = False
        model = build_model(cfg)
        psi0 = np.zeros(model.dim, dtype=complex)
        psi0[model.ground_index(-0.5)] = 1.0
        _, rec = propagate_schrodinger(model, psi0, build_propagation(cfg),
                                       record=True)
        # Selecting the two ground sublevels misses the transient excited
        # population mid-pulse, which must be flagged.
        _, flagged = bloch_trajectory(rec, model.ground_index(-0.5),
                                      model.ground_index(0.5))
        assert flagged


class TestGradientValidation:
    def test_needs_three_areas(self):
        from berrygate.analysis import fringe_shift_gradient
        cfg = default_scenario()
        with pytest.raises(ParameterError):
            fringe_shift_gradient(cfg, 0.1, [6 * math.pi, 8 * math.pi])
