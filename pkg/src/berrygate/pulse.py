"""Chirped Gaussian pulses: spectral/time-domain parameters, polarization
decomposition into circular components, and pulse sequences.

Units: time in ps, angular frequencies in rad/ps, hbar = 1. A quadratic
spectral phase ("chirp", ps^2) stretches the pulse and produces a linearly
time-varying instantaneous frequency.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ParameterError

__all__ = [
    "PolarizationState",
    "ChirpedPulseSpec",
    "TimeDomainParams",
    "PulseSequence",
    "derive_time_params",
    "peak_rabi",
    "complex_envelope",
    "integration_window",
    "gate_pulse_pair",
]


@dataclass(frozen=True)
class PolarizationState:
    """Linear-polarization axis ``angle`` (rad, from x) plus ellipticity.

    The circular amplitude ratio is |E+|/|E-| = (1+ellipticity)/(1-ellipticity);
    at zero ellipticity the two circular components have equal magnitude and
    phases exp(-i*angle) and exp(+i*angle).
    """

    angle: float = 0.0
    ellipticity: float = 0.0

    def __post_init__(self):
        if not -1.0 <= self.ellipticity <= 1.0:
            raise ParameterError(
                f"ellipticity must lie in [-1, 1], got {self.ellipticity}")

    def circular_factors(self) -> tuple[complex, complex]:
        """Complex amplitude factors (plus, minus) for the sigma+/sigma-
        circular components, normalized so both are exp(-+i*angle) at zero
        ellipticity (total intensity is ellipticity-independent)."""
        eps = self.ellipticity
        norm = math.sqrt(0.5 * ((1.0 + eps) ** 2 + (1.0 - eps) ** 2))
        fp = (1.0 + eps) / norm * np.exp(-1j * self.angle)
        fm = (1.0 - eps) / norm * np.exp(+1j * self.angle)
        return complex(fp), complex(fm)


@dataclass(frozen=True)
class TimeDomainParams:
    """Time-domain parameters derived from the spectral description:
    stretched duration (1/e field half-width, ps), temporal chirp rate
    (rad/ps^2) and the constant chirp phase offset (rad)."""

    duration: float
    chirp_rate: float
    chirp_phase: float


@dataclass(frozen=True)
class ChirpedPulseSpec:
    """One chirped Gaussian pulse.

    Parameters
    ----------
    carrier_frequency : float
        Laser carrier (rad/ps).
    spectral_width : float
        1/e half-width of the spectral field amplitude (rad/ps); > 0.
    chirp : float
        Quadratic spectral phase coefficient (ps^2); sign sets chirp direction.
    polarization : PolarizationState
    arrival_time : float
        Envelope peak time (ps).
    area : float
        Pulse area per circular component (rad): the time integral of the
        Rabi-frequency envelope magnitude at zero ellipticity; >= 0.
    phase : float
        Extra constant carrier phase (rad), e.g. a relative phase between
        pulses of a pair.
    """

    carrier_frequency: float
    spectral_width: float
    chirp: float = 0.0
    polarization: PolarizationState = field(default_factory=PolarizationState)
    arrival_time: float = 0.0
    area: float = 0.0
    phase: float = 0.0

    def __post_init__(self):
        if self.spectral_width <= 0.0:
            raise ParameterError(
                f"spectral_width must be > 0, got {self.spectral_width}")
        if self.area < 0.0:
            raise ParameterError(f"area must be >= 0, got {self.area}")

    @property
    def time_params(self) -> TimeDomainParams:
        return derive_time_params(self)

    @property
    def peak_rabi(self) -> float:
        return peak_rabi(self.area, self.time_params.duration)


def derive_time_params(spec: ChirpedPulseSpec) -> TimeDomainParams:
    """Map the spectral parameters (width, chirp) to the time domain.

    duration    = sqrt(4/dw^2 + c^2 dw^2)
    chirp_rate  = c / (2 c^2 + 8/dw^4)
    chirp_phase = -atan(c dw^2 / 2) / 2
    """
    dw = spec.spectral_width
    if dw <= 0.0:
        raise ParameterError(f"spectral_width must be > 0, got {dw}")
    c = spec.chirp
    duration = math.sqrt(4.0 / dw**2 + c**2 * dw**2)
    chirp_rate = c / (2.0 * c**2 + 8.0 / dw**4)
    chirp_phase = -0.5 * math.atan(0.5 * c * dw**2)
    return TimeDomainParams(duration, chirp_rate, chirp_phase)


def peak_rabi(area: float, duration: float) -> float:
    """Peak Rabi frequency (rad/ps) of a Gaussian envelope of the given 1/e
    half-width integrating to ``area``."""
    if area < 0.0:
        raise ParameterError(f"area must be >= 0, got {area}")
    if duration <= 0.0:
        raise ParameterError(f"duration must be > 0, got {duration}")
    return area / (math.sqrt(math.pi) * duration)


def complex_envelope(spec: ChirpedPulseSpec, t):
    """Complex Rabi amplitude (rad/ps) of each circular component at time t.

    Returns ``(omega_plus, omega_minus)``. The carrier exp(-i w_p t) is not
    included; it is absorbed into the rotating frame by the dynamics layer.
    The quadratic chirp phase and the constant chirp/carrier phases are
    carried with a minus sign, matching the analytic-signal convention of the
    spectral definition.
    """
    tp = spec.time_params
    om0 = peak_rabi(spec.area, tp.duration)
    dt = np.asarray(t, dtype=float) - spec.arrival_time
    gauss = np.exp(-(dt / tp.duration) ** 2)
    phase = tp.chirp_rate * dt**2 + tp.chirp_phase + spec.phase
    base = om0 * gauss * np.exp(-1j * phase)
    fp, fm = spec.polarization.circular_factors()
    return base * fp, base * fm


@dataclass(frozen=True)
class PulseSequence:
    """Ordered pulses plus the nominal intra-pair delay tau and inter-pair
    delay T (both ps, >= 0). Pulses are sorted by arrival time."""

    pulses: tuple[ChirpedPulseSpec, ...]
    intra_pair_delay: float = 0.0
    inter_pair_delay: float = 0.0

    def __post_init__(self):
        if self.intra_pair_delay < 0.0 or self.inter_pair_delay < 0.0:
            raise ParameterError("pair delays must be >= 0")
        ordered = tuple(sorted(self.pulses, key=lambda p: p.arrival_time))
        object.__setattr__(self, "pulses", ordered)

    def __len__(self):
        return len(self.pulses)


def integration_window(seq: PulseSequence, k: float) -> tuple[float, float]:
    """Time window covering every pulse out to ``k`` stretched durations.

    ``k`` must be > 0; with k >= 5 the envelope at the boundary is below
    1e-10 of its peak.
    """
    if k <= 0.0:
        raise ParameterError(f"window multiplier k must be > 0, got {k}")
    if len(seq) == 0:
        raise ParameterError("cannot build a window for an empty sequence")
    starts = [p.arrival_time - k * p.time_params.duration for p in seq.pulses]
    ends = [p.arrival_time + k * p.time_params.duration for p in seq.pulses]
    return min(starts), max(ends)


def gate_pulse_pair(
    carrier_frequency: float,
    spectral_width: float,
    chirp: float,
    area: float,
    tau: float,
    theta1: float = 0.0,
    theta2: float = 0.0,
    ellipticity: float = 0.0,
    amplitude_imbalance: float = 0.0,
    relative_phase: float = 0.0,
    center: float = 0.0,
    area_ratio: float | None = None,
    inter_pair_delay: float = 0.0,
) -> PulseSequence:
    """Build the two-pulse gate sequence centered at ``center``.

    The pulses arrive at center -+ tau/2 with polarization angles theta1 and
    theta2 and a common ellipticity. ``amplitude_imbalance`` is
    (E2 - E1)/(E2 + E1), mapping areas to A*(1 -+ imbalance). Alternatively
    ``area_ratio`` fixes area2/area1 directly (area1 = area).
    """
    if area_ratio is not None:
        a1, a2 = area, area * area_ratio
    else:
        a1 = area * (1.0 - amplitude_imbalance)
        a2 = area * (1.0 + amplitude_imbalance)
    p1 = ChirpedPulseSpec(
        carrier_frequency=carrier_frequency,
        spectral_width=spectral_width,
        chirp=chirp,
        polarization=PolarizationState(theta1, ellipticity),
        arrival_time=center - 0.5 * tau,
        area=a1,
    )
    p2 = replace(
        p1,
        polarization=PolarizationState(theta2, ellipticity),
        arrival_time=center + 0.5 * tau,
        area=a2,
        phase=relative_phase,
    )
    return PulseSequence((p1, p2), intra_pair_delay=tau,
                         inter_pair_delay=inter_pair_delay)
