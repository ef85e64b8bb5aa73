import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from berrygate.errors import ParameterError
from berrygate.pulse import (ChirpedPulseSpec, PolarizationState,
                             PulseSequence, complex_envelope,
                             derive_time_params, gate_pulse_pair,
                             integration_window, peak_rabi)

TWO_PI = 2.0 * math.pi

# Reference pulse of the default gate scenario: spectral 1/e half-width
# 2 pi x 4 rad/ps, quadratic spectral phase 0.072 ps^2.
REF = dict(carrier_frequency=TWO_PI * 377.107463, spectral_width=TWO_PI * 4.0,
           chirp=0.072)


class TestTimeDomainParams:
    def test_reference_stretching(self):
        # Frozen from the closed-form map at the reference parameters.
        tp = ChirpedPulseSpec(**REF).time_params
        assert tp.duration == pytest.approx(1.8113062810451104, abs=1e-12)
        assert tp.chirp_rate == pytest.approx(6.931040457578306, abs=1e-12)
        assert tp.chirp_phase == pytest.approx(-0.7634242171993016, abs=1e-12)

    def test_zero_chirp_is_transform_limited(self):
        tp = ChirpedPulseSpec(**{**REF, "chirp": 0.0}).time_params
        assert tp.duration == pytest.approx(2.0 / (TWO_PI * 4.0))
        assert tp.chirp_rate == 0.0
        assert tp.chirp_phase == 0.0

    @given(dw=st.floats(0.5, 100.0), c=st.floats(-0.5, 0.5))
    @settings(max_examples=200, deadline=None)
    def test_stretching_never_shortens(self, dw, c):
        spec = ChirpedPulseSpec(carrier_frequency=1.0, spectral_width=dw,
                                chirp=c)
        tp = derive_time_params(spec)
        assert tp.duration >= 2.0 / dw - 1e-12
        # Chirp rate has the sign of the spectral chirp and is bounded by
        # the stationary-phase limit 1/(2|c|).
        if c != 0.0:
            assert math.copysign(1.0, tp.chirp_rate) == math.copysign(1.0, c)
            assert abs(tp.chirp_rate) <= 0.5 / abs(c) + 1e-9

    def test_large_chirp_limit(self):
        # For c dw^2 >> 1 the duration approaches |c| dw and the chirp rate
        # approaches 1/(2c).
        spec = ChirpedPulseSpec(carrier_frequency=1.0, spectral_width=50.0,
                                chirp=0.4)
        tp = spec.time_params
        assert tp.duration == pytest.approx(0.4 * 50.0, rel=1e-3)
        assert tp.chirp_rate == pytest.approx(1.0 / 0.8, rel=1e-3)


class TestPeakRabi:
    def test_reference_value(self):
        spec = ChirpedPulseSpec(**REF, area=6.0 * math.pi)
        assert spec.peak_rabi == pytest.approx(5.871300296765349, abs=1e-12)

    def test_envelope_integrates_to_area(self):
        spec = ChirpedPulseSpec(**REF, area=6.0 * math.pi)
        t = np.linspace(-30.0, 30.0, 20001)
        om_p, om_m = complex_envelope(spec, t)
        # At zero ellipticity each circular component carries the full area.
        for om in (om_p, om_m):
            integral = np.trapezoid(np.abs(om), t)
            assert integral == pytest.approx(6.0 * math.pi, rel=1e-8)

    def test_rejects_bad_arguments(self):
        with pytest.raises(ParameterError):
            peak_rabi(-1.0, 1.0)
        with pytest.raises(ParameterError):
            peak_rabi(1.0, 0.0)


class TestPolarization:
    def test_zero_ellipticity_factors(self):
        fp, fm = PolarizationState(0.3).circular_factors()
        assert fp == pytest.approx(np.exp(-0.3j))
        assert fm == pytest.approx(np.exp(+0.3j))

    def test_amplitude_ratio(self):
        eps = 1.0 / 7.0
        fp, fm = PolarizationState(0.0, eps).circular_factors()
        assert abs(fp) / abs(fm) == pytest.approx((1 + eps) / (1 - eps))

    @given(angle=st.floats(-10.0, 10.0), eps=st.floats(-0.99, 0.99))
    @settings(max_examples=200, deadline=None)
    def test_total_intensity_invariant(self, angle, eps):
        fp, fm = PolarizationState(angle, eps).circular_factors()
        assert abs(fp) ** 2 + abs(fm) ** 2 == pytest.approx(2.0)

    def test_ellipticity_bounds(self):
        with pytest.raises(ParameterError):
            PolarizationState(0.0, 1.5)


class TestEnvelope:
    def test_chirp_phase_is_quadratic(self):
        spec = ChirpedPulseSpec(**REF, area=math.pi)
        tp = spec.time_params
        om_p, _ = complex_envelope(spec, np.array([0.0, 0.7]))
        rel = np.angle(om_p[1] / om_p[0])
        expect = -tp.chirp_rate * 0.7**2
        assert math.remainder(rel - expect, TWO_PI) == pytest.approx(0.0,
                                                                     abs=1e-12)

    def test_relative_phase_offsets_carrier(self):
        a = ChirpedPulseSpec(**REF, area=math.pi)
        b = ChirpedPulseSpec(**REF, area=math.pi, phase=0.4)
        pa, _ = complex_envelope(a, 0.1)
        pb, _ = complex_envelope(b, 0.1)
        assert pb / pa == pytest.approx(np.exp(-0.4j))


class TestSequences:
    def test_gate_pair_layout(self):
        seq = gate_pulse_pair(**REF, area=6 * math.pi, tau=7.2, theta1=0.1,
                              theta2=0.9)
        assert len(seq) == 2
        p1, p2 = seq.pulses
        assert p1.arrival_time == pytest.approx(-3.6)
        assert p2.arrival_time == pytest.approx(3.6)
        assert p1.polarization.angle == 0.1
        assert p2.polarization.angle == 0.9
        assert seq.intra_pair_delay == 7.2

    def test_amplitude_imbalance_maps_to_areas(self):
        seq = gate_pulse_pair(**REF, area=6 * math.pi, tau=7.2,
                              amplitude_imbalance=0.25)
        a1, a2 = (p.area for p in seq.pulses)
        assert a1 == pytest.approx(6 * math.pi * 0.75)
        assert a2 == pytest.approx(6 * math.pi * 1.25)
        assert (a2 - a1) / (a2 + a1) == pytest.approx(0.25)

    def test_area_ratio_override(self):
        seq = gate_pulse_pair(**REF, area=6 * math.pi, tau=7.2,
                              area_ratio=2.0 / 3.0)
        a1, a2 = (p.area for p in seq.pulses)
        assert a1 == pytest.approx(6 * math.pi)
        assert a2 == pytest.approx(4 * math.pi)

    def test_pulses_sorted_by_arrival(self):
        p1 = ChirpedPulseSpec(**REF, arrival_time=5.0, area=1.0)
        p2 = ChirpedPulseSpec(**REF, arrival_time=-5.0, area=1.0)
        seq = PulseSequence((p1, p2))
        assert [p.arrival_time for p in seq.pulses] == [-5.0, 5.0]

    def test_window_covers_all_pulses(self):
        seq = gate_pulse_pair(**REF, area=6 * math.pi, tau=7.2)
        lo, hi = integration_window(seq, 5.0)
        dur = seq.pulses[0].time_params.duration
        assert lo == pytest.approx(-3.6 - 5.0 * dur)
        assert hi == pytest.approx(3.6 + 5.0 * dur)
        with pytest.raises(ParameterError):
            integration_window(seq, 0.0)

    def test_validation(self):
        with pytest.raises(ParameterError):
            ChirpedPulseSpec(carrier_frequency=1.0, spectral_width=-1.0)
        with pytest.raises(ParameterError):
            ChirpedPulseSpec(carrier_frequency=1.0, spectral_width=1.0,
                             area=-0.1)
