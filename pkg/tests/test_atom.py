import math
from fractions import Fraction

import numpy as np
import pytest

from berrygate.atom import (AtomSpec, BasisState, Level, clebsch_gordan,
                            decay_branching, default_rb87,
                            hyperfine_decomposition, sigma_coupling)
from berrygate.errors import ParameterError


def _moments(j):
    """All half-integer m for a given j."""
    return [m / 2.0 for m in range(-int(round(2 * j)), int(round(2 * j)) + 1, 2)]


def _j_values(j_max):
    return [j / 2.0 for j in range(0, int(round(2 * j_max)) + 1)]


class TestClebschGordan:
    def test_exhaustive_orthogonality_completeness(self):
        # Rows of the CG matrix (indexed by coupled (j, m)) must form an
        # orthonormal basis of the product space, exhaustively for j <= 3.
        for j1 in _j_values(3.0):
            for j2 in _j_values(3.0):
                prod = [(m1, m2) for m1 in _moments(j1) for m2 in _moments(j2)]
                rows = []
                j = abs(j1 - j2)
                while j <= j1 + j2 + 1e-9:
                    for m in _moments(j):
                        rows.append([clebsch_gordan(j1, m1, j2, m2, j, m)
                                     for m1, m2 in prod])
                    j += 1.0
                mat = np.array(rows)
                assert mat.shape[0] == mat.shape[1]
                np.testing.assert_allclose(mat @ mat.T, np.eye(len(prod)),
                                           atol=1e-12)
                np.testing.assert_allclose(mat.T @ mat, np.eye(len(prod)),
                                           atol=1e-12)

    def test_against_sympy(self):
        sympy = pytest.importorskip("sympy")
        from sympy.physics.quantum.cg import CG

        rng = np.random.default_rng(7)
        checked = 0
        while checked < 40:
            j1, j2 = rng.integers(0, 5, 2) / 2.0
            # j must sit on the triangle ladder |j1-j2|, |j1-j2|+1, ..., j1+j2.
            j = abs(j1 - j2) + rng.integers(
                0, int(round(j1 + j2 - abs(j1 - j2))) + 1)
            m1 = rng.choice(_moments(j1)) if j1 else 0.0
            m2 = rng.choice(_moments(j2)) if j2 else 0.0
            m = m1 + m2
            if abs(m) > j:
                continue
            ref = float(CG(sympy.Rational(Fraction(j1)), sympy.Rational(Fraction(m1)),
                           sympy.Rational(Fraction(j2)), sympy.Rational(Fraction(m2)),
                           sympy.Rational(Fraction(j)), sympy.Rational(Fraction(m)))
                        .doit().evalf(20))
            assert clebsch_gordan(j1, m1, j2, m2, j, m) == pytest.approx(
                ref, abs=1e-12)
            checked += 1

    def test_selection_rules(self):
        assert clebsch_gordan(0.5, 0.5, 0.5, 0.5, 1.0, 0.0) == 0.0  # m1+m2 != m
        assert clebsch_gordan(0.5, 0.5, 0.5, -0.5, 2.0, 0.0) == 0.0  # j too big

    def test_condon_shortley_sign(self):
        # <1/2 1/2; 1/2 -1/2 | 1 0> = +1/sqrt(2), the stretched state is +1.
        assert clebsch_gordan(0.5, 0.5, 0.5, -0.5, 1.0, 0.0) == pytest.approx(
            1.0 / math.sqrt(2.0))
        assert clebsch_gordan(0.5, 0.5, 0.5, 0.5, 1.0, 1.0) == pytest.approx(1.0)

    def test_invalid_arguments(self):
        with pytest.raises(ParameterError):
            clebsch_gordan(0.6, 0.0, 0.5, 0.5, 1.0, 0.5)
        with pytest.raises(ParameterError):
            clebsch_gordan(0.5, 1.5, 0.5, -0.5, 1.0, 1.0)


class TestHyperfine:
    def test_clock_state_decomposition(self):
        up = hyperfine_decomposition(1.5, 2.0, 0.0)
        dn = hyperfine_decomposition(1.5, 1.0, 0.0)
        v = {t[:2]: t[2] for t in up}
        w = {t[:2]: t[2] for t in dn}
        r = 1.0 / math.sqrt(2.0)
        assert v[(-0.5, 0.5)] == pytest.approx(r)
        assert v[(0.5, -0.5)] == pytest.approx(r)
        assert w[(0.5, -0.5)] == pytest.approx(r)
        assert w[(-0.5, 0.5)] == pytest.approx(-r)

    def test_orthonormal(self):
        for m_f in (-1.0, 0.0, 1.0):
            up = {t[:2]: t[2] for t in hyperfine_decomposition(1.5, 2.0, m_f)}
            dn = {t[:2]: t[2] for t in hyperfine_decomposition(1.5, 1.0, m_f)}
            assert sum(c * c for c in up.values()) == pytest.approx(1.0)
            assert sum(c * c for c in dn.values()) == pytest.approx(1.0)
            overlap = sum(up[k] * dn.get(k, 0.0) for k in up)
            assert overlap == pytest.approx(0.0, abs=1e-12)

    def test_stretched_tower_has_no_lower_state(self):
        with pytest.raises(ParameterError):
            hyperfine_decomposition(1.5, 1.0, 2.0)


class TestCouplings:
    def test_d1_sigma_normalization(self):
        # The sigma+ drive out of m_J = -1/2 is the unit anchor.
        assert sigma_coupling(+1, -0.5, Level.P12) == pytest.approx(1.0)
        assert sigma_coupling(-1, 0.5, Level.P12) == pytest.approx(-1.0)
        # sigma+ out of m_J = +1/2 leaves the J = 1/2 manifold.
        assert sigma_coupling(+1, 0.5, Level.P12) == 0.0
        assert sigma_coupling(-1, -0.5, Level.P12) == 0.0

    def test_d2_relative_strengths(self):
        r = math.sqrt(2.0)
        assert sigma_coupling(+1, -0.5, Level.P32, r) == pytest.approx(
            1.0 / math.sqrt(2.0))
        assert sigma_coupling(+1, 0.5, Level.P32, r) == pytest.approx(
            math.sqrt(1.5))
        # Both grounds see the same total D2 intensity (sum over q of the
        # squared couplings), which keeps the two pathways' light shifts equal.
        for sgn in (-0.5, 0.5):
            total = sum(sigma_coupling(q, sgn, Level.P32, r) ** 2
                        for q in (+1, -1))
            assert total == pytest.approx(2.0)

    def test_decay_branching_sums_to_one(self):
        for level in (Level.P12, Level.P32):
            for m_j in _moments(level.j):
                total = sum(decay_branching(level, m_j, q) for q in (-1, 0, 1))
                assert total == pytest.approx(1.0)

    def test_branching_nonnegative(self):
        for q in (-1, 0, 1):
            assert decay_branching(Level.P12, 0.5, q) >= 0.0


class TestSpecs:
    def test_default_rb87_values(self):
        atom = default_rb87()
        assert atom.nuclear_spin == 1.5
        assert atom.d1_frequency == pytest.approx(2 * math.pi * 377.107463)
        assert atom.hf_splitting == pytest.approx(
            2 * math.pi * 6.8346826109e-3)
        assert atom.decay_rate(Level.P12) == pytest.approx(
            2 * math.pi * 5.75e-6)
        assert atom.decay_rate(Level.P32) == pytest.approx(
            2 * math.pi * 6.07e-6)

    def test_basis_state_validation(self):
        with pytest.raises(ParameterError):
            BasisState(Level.S12, 1.5, 0.5)
        with pytest.raises(ParameterError):
            BasisState(Level.S12, 0.5, 0.3)

    def test_atom_validation(self):
        with pytest.raises(ParameterError):
            AtomSpec(nuclear_spin=1.2)
        with pytest.raises(ParameterError):
            AtomSpec(gamma_d1=-1.0)
