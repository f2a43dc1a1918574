import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fwmkit import core
from fwmkit.core import (
    FieldEnvelope,
    PulseTrainSpec,
    TemporalGrid,
    field_energy,
    gaussian_pulse,
    omega_to_wavelength,
    sech_pulse,
    to_spectrum,
    wavelength_to_omega,
)


def test_wavelength_to_omega_known_values():
    # 2*pi*c/lambda, frozen by hand: 1.88365157e9 / 1.092e-6 etc.
    assert wavelength_to_omega(1092e-9) == pytest.approx(1.724956e15, rel=1e-4)
    assert wavelength_to_omega(1531.6e-9) == pytest.approx(1.229851e15, rel=1e-4)


def test_wavelength_omega_roundtrip_exact():
    for lam in (422e-9, 777e-9, 977.2e-9, 1092e-9, 1531.6e-9, 3804.6e-9):
        assert omega_to_wavelength(wavelength_to_omega(lam)) == pytest.approx(lam, rel=1e-12)


@given(st.floats(min_value=1e-7, max_value=1e-5))
def test_roundtrip_property(lam):
    assert omega_to_wavelength(wavelength_to_omega(lam)) == pytest.approx(lam, rel=1e-12)


def test_nonpositive_wavelength_rejected():
    with pytest.raises(ValueError):
        wavelength_to_omega(0.0)
    with pytest.raises(ValueError):
        wavelength_to_omega(-1e-6)


def _grid(n=2**12, span=40e-12, lam=1060e-9):
    return TemporalGrid(n_points=n, span=span, carrier=wavelength_to_omega(lam))


class TestTemporalGrid:
    def test_dt_times_n_is_span(self):
        g = _grid()
        assert g.dt * g.n_points == pytest.approx(g.span, rel=1e-15)

    @pytest.mark.parametrize("bad_n", [0, 100, 2**9, 2**23, 2**12 + 1])
    def test_rejects_bad_point_counts(self, bad_n):
        with pytest.raises(ValueError):
            TemporalGrid(n_points=bad_n, span=1e-11, carrier=1e15)

    def test_omega_axis_matches_fft_layout(self):
        g = _grid(n=2**10)
        assert g.omega_rel[0] == 0.0
        assert g.omega_abs[1] - g.carrier == pytest.approx(g.domega)


class TestFieldEnergy:
    def test_zero_field(self):
        g = _grid()
        f = FieldEnvelope(grid=g, samples=np.zeros(g.n_points, dtype=complex))
        assert field_energy(f) == 0.0

    def test_rectangle_integral(self):
        # constant |a| = 1 sqrt(W) over a 10 ps window -> 10 pJ
        g = TemporalGrid(n_points=2**10, span=10e-12, carrier=1e15)
        f = FieldEnvelope(grid=g, samples=np.ones(g.n_points, dtype=complex))
        assert field_energy(f) == pytest.approx(10e-12, rel=1e-12)

    def test_sech_closed_form(self):
        # peak 1 kW, T0 = 1 ps -> E = 2*P0*T0 = 2 nJ; checked against the
        # quadrature the energy function itself performs on a wide window
        g = _grid(n=2**14, span=100e-12)
        tau_fwhm = 2.0 * math.asinh(1.0) * 1e-12
        f = sech_pulse(g, 1e3, tau_fwhm)
        assert field_energy(f) == pytest.approx(2e-9, rel=1e-6)

    def test_grid_refinement_stable(self):
        e = []
        for n in (2**12, 2**13):
            g = _grid(n=n, span=120e-12)
            f = gaussian_pulse(g, 100.0, 12e-12)
            e.append(field_energy(f))
        assert abs(e[1] - e[0]) / e[0] < 1e-9


class TestToSpectrum:
    def test_parseval(self):
        g = _grid()
        rng = np.random.default_rng(0)
        f = FieldEnvelope(
            grid=g, samples=rng.standard_normal(g.n_points) + 1j * rng.standard_normal(g.n_points)
        )
        s = to_spectrum(f)
        assert abs(s.total_power() - field_energy(f)) / field_energy(f) < 1e-10

    def test_monochromatic_peak_at_carrier_plus_offset(self):
        g = _grid(n=2**12)
        offset = 64 * g.domega
        f = FieldEnvelope(grid=g, samples=np.exp(1j * offset * g.t))
        s = to_spectrum(f)
        peak = s.frequencies[np.argmax(s.psd)]
        assert peak == pytest.approx(g.carrier + offset, abs=g.domega / 2)

    def test_gaussian_time_bandwidth_product(self):
        # 12 ps FWHM -> spectral FWHM of 2*ln2/pi / 12 ps = 36.77 GHz
        from fwmkit.metrics import fwhm

        g = TemporalGrid(n_points=2**14, span=1.0e-9, carrier=wavelength_to_omega(777e-9))
        f = gaussian_pulse(g, 10.0, 12e-12)
        s = to_spectrum(f)
        width = fwhm(s, g.carrier) / (2.0 * math.pi)
        assert width == pytest.approx(0.4413 / 12e-12, rel=0.02)


class TestPulseTrainSpec:
    def test_gaussian_peak_power(self):
        # 650 mW at 80 MHz / 12 ps gaussian -> 0.9394 * 677.1 W = 636.1 W
        train = PulseTrainSpec(12e-12, 80e6, 0.65, 1e15)
        assert train.peak_power == pytest.approx(636.05, rel=1e-3)
        assert train.shape_factor == pytest.approx(2.0 * math.sqrt(math.log(2.0) / math.pi))

    def test_peak_power_consistent_with_sampled_pulse(self):
        # integrating the sampled pulse train recovers the average power
        g = _grid(n=2**13, span=200e-12, lam=777e-9)
        for shape, tol in (("gaussian", 1e-3), ("sech", 1e-3), ("rect", 3e-3)):
            # rect edges quantize to the sample spacing, hence the looser tol
            train = PulseTrainSpec(12e-12, 80e6, 0.1, g.carrier, shape=shape)
            f = core.pulse_from_train(g, train)
            assert field_energy(f) * train.rep_rate == pytest.approx(0.1, rel=tol)

    def test_duty_cycle_above_unity_rejected(self):
        with pytest.raises(ValueError):
            PulseTrainSpec(20e-9, 80e6, 0.1, 1e15)


@settings(max_examples=25, deadline=None)
@given(
    st.integers(min_value=0, max_value=3),
    st.floats(min_value=0.1, max_value=100.0),
)
def test_parseval_random_pulses(seed, peak):
    g = _grid(n=2**11)
    rng = np.random.default_rng(seed)
    samples = peak * (rng.standard_normal(g.n_points) + 1j * rng.standard_normal(g.n_points))
    f = FieldEnvelope(grid=g, samples=samples)
    s = to_spectrum(f)
    assert abs(s.total_power() - field_energy(f)) / field_energy(f) < 1e-10


def test_envelope_immutable():
    g = _grid(n=2**10)
    f = gaussian_pulse(g, 1.0, 5e-12)
    with pytest.raises(ValueError):
        f.samples[0] = 1.0
