"""Alkali-atom level structure and angular-momentum algebra.

Clebsch-Gordan coefficients are evaluated from the Racah closed form with
exact rational arithmetic under the square root (Condon-Shortley phase), so
small-j property tests can be exhaustive and no coefficient tables are kept.

Dipole couplings for sigma+/sigma-/pi transitions between S1/2 and P1/2 or
P3/2 are expressed as relative factors from L,S -> J recoupling, normalized
so the D1 sigma+ factor <P1/2,+1/2|.|S1/2,-1/2> equals 1.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import ParameterError

__all__ = [
    "Level",
    "AtomSpec",
    "BasisState",
    "HyperfineState",
    "clebsch_gordan",
    "hyperfine_decomposition",
    "sigma_coupling",
    "decay_branching",
    "default_rb87",
]

TWO_PI = 2.0 * math.pi

# D1 sigma+ recoupling coefficient C(1,1;1/2,-1/2|1/2,1/2) = sqrt(2/3),
# used as the normalization anchor for all laser-coupling factors.
_D1_ANCHOR = math.sqrt(2.0 / 3.0)


class Level(enum.Enum):
    """Fine-structure level of the optically active electron."""

    S12 = "S1/2"
    P12 = "P1/2"
    P32 = "P3/2"

    @property
    def j(self) -> float:
        return 1.5 if self is Level.P32 else 0.5

    @property
    def l(self) -> int:
        return 0 if self is Level.S12 else 1


def _check_half_integer(name: str, value: float) -> int:
    """Return 2*value as an exact int, or raise."""
    doubled = 2.0 * value
    if doubled != round(doubled):
        raise ParameterError(f"{name} must be a half-integer, got {value}")
    return int(round(doubled))


@dataclass(frozen=True)
class BasisState:
    """Product state |level, m_J> |I, m_I> in the fine-structure basis."""

    level: Level
    m_j: float
    m_i: float

    def __post_init__(self):
        _check_half_integer("m_j", self.m_j)
        _check_half_integer("m_i", self.m_i)
        if abs(self.m_j) > self.level.j:
            raise ParameterError(
                f"|m_j|={abs(self.m_j)} exceeds J={self.level.j} of {self.level}")

    @property
    def m_f(self) -> float:
        return self.m_j + self.m_i


@dataclass(frozen=True)
class HyperfineState:
    """Hyperfine state |F, m_F> of a ground S1/2 level."""

    f: float
    m_f: float

    def __post_init__(self):
        _check_half_integer("F", self.f)
        _check_half_integer("m_F", self.m_f)
        if self.f < 0 or abs(self.m_f) > self.f:
            raise ParameterError(f"invalid hyperfine state F={self.f}, m_F={self.m_f}")


@dataclass(frozen=True)
class AtomSpec:
    """Alkali-atom constants in rad/ps.

    ``d1_frequency`` is the S1/2 -> P1/2 transition frequency, ``fs_splitting``
    the P3/2 - P1/2 fine-structure splitting, ``hf_splitting`` the ground
    hyperfine splitting. ``d2_coupling_ratio`` is the reduced-dipole ratio
    D2/D1 (sqrt(2) from pure recoupling).
    """

    nuclear_spin: float = 1.5
    d1_frequency: float = TWO_PI * 377.107463
    fs_splitting: float = TWO_PI * 7.123021
    hf_splitting: float = TWO_PI * 6.8346826109e-3
    gamma_d1: float = TWO_PI * 5.75e-6
    gamma_d2: float = TWO_PI * 6.07e-6
    d2_coupling_ratio: float = math.sqrt(2.0)

    def __post_init__(self):
        doubled = _check_half_integer("nuclear_spin", self.nuclear_spin)
        if doubled <= 0:
            raise ParameterError("nuclear_spin must be positive")
        for name in ("d1_frequency", "fs_splitting", "hf_splitting",
                     "gamma_d1", "gamma_d2"):
            if getattr(self, name) < 0.0:
                raise ParameterError(f"{name} must be >= 0")

    def decay_rate(self, level: Level) -> float:
        if level is Level.P12:
            return self.gamma_d1
        if level is Level.P32:
            return self.gamma_d2
        return 0.0


def default_rb87() -> AtomSpec:
    """Rb-87 defaults: I=3/2, D1 at 377.107 THz, 7.123-THz fine-structure
    splitting, 6.8346826109-GHz clock splitting, standard decay rates."""
    return AtomSpec()


def _validate_j_m(name: str, j: float, m: float):
    j2 = _check_half_integer(f"{name} j", j)
    m2 = _check_half_integer(f"{name} m", m)
    if j2 < 0:
        raise ParameterError(f"{name}: j must be >= 0, got {j}")
    if abs(m2) > j2:
        raise ParameterError(f"{name}: |m|={m} exceeds j={j}")
    if (j2 - m2) % 2 != 0:
        raise ParameterError(f"{name}: j={j} and m={m} differ by a non-integer")


def clebsch_gordan(j1: float, m1: float, j2: float, m2: float,
                   j: float, m: float) -> float:
    """Clebsch-Gordan coefficient <j1 m1; j2 m2 | J M> (Condon-Shortley).

    Returns 0 when M != m1+m2 or J violates the triangle rule; raises
    ParameterError for malformed angular momenta.
    """
    _validate_j_m("(j1,m1)", j1, m1)
    _validate_j_m("(j2,m2)", j2, m2)
    _validate_j_m("(J,M)", j, m)

    if m1 + m2 != m:
        return 0.0
    if j < abs(j1 - j2) or j > j1 + j2 or (2 * (j1 + j2 + j)) % 2 != 0:
        return 0.0

    fact = math.factorial

    def f(x: float) -> int:
        n = int(round(x))
        if n < 0:
            raise ParameterError("negative factorial argument in CG evaluation")
        return fact(n)

    # Triangle coefficient and m-dependent factorials, kept exact.
    pref = Fraction(
        (int(round(2 * j)) + 1)
        * f(j1 + j2 - j) * f(j1 - j2 + j) * f(-j1 + j2 + j)
        * f(j1 + m1) * f(j1 - m1) * f(j2 + m2) * f(j2 - m2)
        * f(j + m) * f(j - m),
        f(j1 + j2 + j + 1),
    )

    k_min = int(round(max(0.0, j2 - j - m1, j1 + m2 - j)))
    k_max = int(round(min(j1 + j2 - j, j1 - m1, j2 + m2)))
    total = Fraction(0)
    for k in range(k_min, k_max + 1):
        denom = (
            fact(k)
            * f(j1 + j2 - j - k)
            * f(j1 - m1 - k)
            * f(j2 + m2 - k)
            * f(j - j2 + m1 + k)
            * f(j - j1 - m2 + k)
        )
        total += Fraction((-1) ** k, denom)

    if total == 0:
        return 0.0
    value_sq = pref * total * total
    sign = 1.0 if total > 0 else -1.0
    return sign * math.sqrt(float(value_sq))


def hyperfine_decomposition(nuclear_spin: float, f: float, m_f: float):
    """Expand |S1/2, F, m_F> over the fine-structure product basis.

    Returns a list of (m_J, m_I, coefficient) with sum of squares 1.
    """
    i2 = _check_half_integer("nuclear_spin", nuclear_spin)
    state = HyperfineState(f, m_f)
    f2 = int(round(2 * state.f))
    if f2 not in (i2 - 1, i2 + 1):
        raise ParameterError(
            f"F={f} is not I+-1/2 for nuclear spin I={nuclear_spin}")
    terms = []
    for m_j in (-0.5, 0.5):
        m_i = m_f - m_j
        if abs(m_i) > nuclear_spin:
            continue
        coeff = clebsch_gordan(0.5, m_j, nuclear_spin, m_i, f, m_f)
        if coeff != 0.0:
            terms.append((m_j, m_i, coeff))
    return terms


def sigma_coupling(q: int, m_j: float, excited: Level,
                   d2_coupling_ratio: float = math.sqrt(2.0)) -> float:
    """Relative dipole factor for a sigma(q = +-1) transition from the
    S1/2 ground sublevel ``m_j`` to ``excited``.

    Normalized so the D1 sigma+ factor from m_j = -1/2 is 1; D2 factors are
    scaled by ``d2_coupling_ratio``/sqrt(2) so the pure recoupling value is
    recovered at the default ratio. Selection-rule violations return 0.
    """
    if q not in (-1, +1):
        raise ParameterError(f"laser polarization q must be +-1, got {q}")
    if excited is Level.S12:
        raise ParameterError("excited level must be P1/2 or P3/2")
    _check_half_integer("m_j", m_j)
    if abs(m_j) > 0.5:
        raise ParameterError(f"ground m_j must be +-1/2, got {m_j}")
    m_j_up = m_j + q
    if abs(m_j_up) > excited.j:
        return 0.0
    cg = clebsch_gordan(1.0, float(q), 0.5, m_j, excited.j, m_j_up)
    factor = cg / _D1_ANCHOR
    if excited is Level.P32:
        factor *= d2_coupling_ratio / math.sqrt(2.0)
    return factor


def decay_branching(excited: Level, m_j_excited: float, q: int) -> float:
    """Branching fraction of spontaneous decay from |excited, m_J> emitting a
    q in {-1, 0, +1} photon into the ground sublevel m_J - q.

    Fractions over the allowed channels of one excited sublevel sum to 1.
    """
    if q not in (-1, 0, +1):
        raise ParameterError(f"emission polarization q must be in -1,0,+1, got {q}")
    if excited is Level.S12:
        raise ParameterError("decaying level must be P1/2 or P3/2")
    m_g = m_j_excited - q
    if abs(m_g) > 0.5:
        return 0.0
    cg = clebsch_gordan(1.0, float(q), 0.5, m_g, excited.j, m_j_excited)
    return cg * cg
