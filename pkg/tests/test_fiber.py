import math

import numpy as np
import pytest

from fwmkit import fiber
from fwmkit.core import wavelength_to_omega
from fwmkit.errors import CalibrationError, RangeError
from fwmkit.fiber import (
    FiberSpec,
    PhaseMatchTarget,
    beta,
    beta1,
    beta2,
    calibrate_taylor_from_targets,
    group_velocity,
    silica_index,
    taylor_config_block,
    walk_off_length,
)


def test_silica_index_sane():
    # three-term fit: ~1.4537 at 633 nm, ~1.4440 at 1550 nm
    assert silica_index(633e-9) == pytest.approx(1.457, abs=2e-3)
    assert silica_index(1550e-9) == pytest.approx(1.444, abs=2e-3)


class TestTaylorBackend:
    def test_zero_polynomial(self):
        f = FiberSpec.from_taylor(2e15, (0.0, 0.0, 0.0), length=1.0, gamma=0.01)
        for w in (1.9e15, 2.0e15, 2.1e15):
            assert beta(f, w) == 0.0

    def test_quadratic_example(self):
        # beta2 = -10 ps^2/km = -1e-26 s^2/m; at 2*pi*1 THz detuning the
        # quadratic term is 0.5*beta2*dw^2 = -0.19739 rad/m
        f = FiberSpec.from_taylor(2e15, (0.0, 0.0, -1e-26), length=1.0, gamma=0.01)
        dw = 2.0 * math.pi * 1e12
        assert beta(f, 2e15 + dw) == pytest.approx(-0.197392, rel=1e-6)

    def test_constant_beta1_group_velocity(self):
        f = FiberSpec.from_taylor(2e15, (0.0, 4.9e-9, 0.0), length=1.0, gamma=0.01)
        for w in (1.8e15, 2.0e15, 2.3e15):
            assert group_velocity(f, w) == pytest.approx(2.0408163e8, rel=1e-7)

    def test_beta_matches_polynomial_exactly(self):
        coeffs = (1e7, 4.9e-9, -2e-26, 1e-40, -3e-55)
        f = FiberSpec.from_taylor(2e15, coeffs, length=1.0, gamma=0.01)
        dw = 3e13
        expected = sum(c * dw**k / math.factorial(k) for k, c in enumerate(coeffs))
        assert beta(f, 2e15 + dw) == pytest.approx(expected, rel=1e-12)

    def test_finite_difference_matches_analytic_beta1(self):
        # cubic model evaluated both ways
        coeffs = (1e7, 4.9e-9, -2e-26, 1e-40)
        f = FiberSpec.from_taylor(2e15, coeffs, length=1.0, gamma=0.01)
        w = 2.05e15
        analytic = beta1(f, w)
        h = fiber.FD_STEP
        numeric = (beta(f, w + h) - beta(f, w - h)) / (2 * h)
        assert numeric == pytest.approx(analytic, rel=1e-6)


class TestGeometryBackend:
    def test_out_of_range_raises_with_bound(self, pcf1_geometry):
        with pytest.raises(RangeError, match="nm"):
            beta(pcf1_geometry, wavelength_to_omega(450e-9))
        with pytest.raises(RangeError):
            beta(pcf1_geometry, wavelength_to_omega(1900e-9))

    def test_beta_continuous(self, pcf1_geometry):
        w = np.linspace(
            wavelength_to_omega(1750e-9), wavelength_to_omega(520e-9), 20000
        )
        b = beta(pcf1_geometry, w)
        assert np.all(np.abs(np.diff(b)) < 1e4 * (w[1] - w[0]) / 1e9)  # smooth
        # no jumps bigger than 1e-3 rad/m per GHz step
        db_per_ghz = np.abs(np.diff(b)) / (np.diff(w) / (2 * math.pi * 1e9))
        assert np.all(np.diff(db_per_ghz) < 1.0)

    def test_zero_dispersion_wavelength_band(self, pcf1_geometry):
        # scan beta2 for a sign change; the small-pitch design must have its
        # zero-dispersion point between 750 and 900 nm
        lams = np.linspace(700e-9, 950e-9, 400)
        b2 = np.array([beta2(pcf1_geometry, wavelength_to_omega(l)) for l in lams])
        signs = np.sign(b2)
        crossings = lams[np.flatnonzero(np.diff(signs))]
        assert len(crossings) == 1
        assert 750e-9 < crossings[0] < 900e-9

    def test_group_velocity_ordering_near_zdw(self, pcf1_geometry):
        # 777 nm sits just below the zero-dispersion point where the group
        # velocity peaks, so it outruns both far-detuned sidebands.
        vg_777 = group_velocity(pcf1_geometry, wavelength_to_omega(777e-9))
        vg_977 = group_velocity(pcf1_geometry, wavelength_to_omega(977.2e-9))
        vg_645 = group_velocity(pcf1_geometry, wavelength_to_omega(644.9e-9))
        assert vg_777 > vg_977
        assert vg_777 > vg_645

    def test_fd_step_halving_stable(self, pcf1_geometry):
        w = wavelength_to_omega(900e-9)
        h = fiber.FD_STEP
        b1_full = (beta(pcf1_geometry, w + h) - beta(pcf1_geometry, w - h)) / (2 * h)
        b1_half = (beta(pcf1_geometry, w + h / 2) - beta(pcf1_geometry, w - h / 2)) / h
        assert b1_half == pytest.approx(b1_full, rel=1e-6)


class TestWalkOff:
    def test_equal_wavelengths_no_walk_off(self, pcf1_geometry):
        assert walk_off_length(pcf1_geometry, 850e-9, 850e-9, 12e-12) == math.inf

    def test_pump_idler_walk_off(self, pcf1_geometry):
        # 12 ps pulses at 777 vs 977.2 nm: 1.37 m within 25%
        lw = walk_off_length(pcf1_geometry, 777e-9, 977.2e-9, 12e-12)
        assert 1.37 * 0.75 < lw < 1.37 * 1.25

    def test_pump_signal_walk_off(self, pcf1_geometry):
        # signal wavelength from energy conservation: 644.9 nm; 1.54 m +- 25%
        lw = walk_off_length(pcf1_geometry, 777e-9, 644.9e-9, 12e-12)
        assert 1.54 * 0.75 < lw < 1.54 * 1.25

    def test_symmetry(self, pcf1_geometry):
        a = walk_off_length(pcf1_geometry, 777e-9, 977.2e-9, 12e-12)
        b = walk_off_length(pcf1_geometry, 977.2e-9, 777e-9, 12e-12)
        assert a == b

    def test_linear_in_duration(self, pcf1_geometry):
        a = walk_off_length(pcf1_geometry, 777e-9, 977.2e-9, 12e-12)
        b = walk_off_length(pcf1_geometry, 777e-9, 977.2e-9, 24e-12)
        assert b == pytest.approx(2 * a, rel=1e-14)

    def test_nonpositive_duration_rejected(self, pcf1_geometry):
        with pytest.raises(ValueError):
            walk_off_length(pcf1_geometry, 777e-9, 977.2e-9, 0.0)


class TestCalibration:
    def test_already_satisfied_target_leaves_coefficients(self):
        # dispersionless fiber: any zero-power degenerate process is already
        # matched, so the correction must vanish
        base = FiberSpec.from_taylor(2e15, (1e7, 5e-9, 0.0, 0.0, 0.0), length=1.0, gamma=0.01)
        lam_ref = 2.0 * math.pi * 2.99792458e8 / 2e15
        target = PhaseMatchTarget(process="degenerate", wavelengths=(lam_ref, 990e-9))
        cal = calibrate_taylor_from_targets(
            base, [target], omega_ref=2e15, fit_band=(lam_ref * 0.8, lam_ref * 1.3)
        )
        assert cal.taylor.beta_coeffs[2] == pytest.approx(0.0, abs=1e-36)
        assert cal.taylor.beta_coeffs[1] == pytest.approx(5e-9, rel=1e-9)

    def test_bs_target_reaches_phase_matching(self, pcf2_calibrated):
        target = PhaseMatchTarget(
            process="bragg",
            wavelengths=(1531.6e-9, 977.2e-9, 777e-9),
            pump_peak_powers=(13.7, 29.4),
            length=1.2,
        )
        residual = fiber._target_mismatch(pcf2_calibrated, target)
        assert abs(residual) * 1.2 < 1e-3

    def test_group_delay_anchor_honoured(self, pcf2_calibrated):
        d = beta1(pcf2_calibrated, wavelength_to_omega(1531.6e-9)) - beta1(
            pcf2_calibrated, wavelength_to_omega(1091.0e-9)
        )
        assert d == pytest.approx(6.41e-12, rel=1e-6)

    def test_inconsistent_targets_raise(self, pcf1_geometry):
        t_a = PhaseMatchTarget(
            process="degenerate", wavelengths=(777e-9, 977.2e-9), pump_peak_powers=(100.0,)
        )
        t_b = PhaseMatchTarget(
            process="degenerate", wavelengths=(777e-9, 977.2e-9), pump_peak_powers=(50000.0,)
        )
        with pytest.raises(CalibrationError, match="inconsistent"):
            calibrate_taylor_from_targets(
                pcf1_geometry, [t_a, t_b], fit_band=(560e-9, 1620e-9)
            )

    def test_calibrated_matches_base_away_from_targets(self, pcf1_geometry, pcf1_calibrated):
        # the correction is a small perturbation: group velocities move by
        # well under a percent
        for lam in (650e-9, 777e-9, 950e-9):
            w = wavelength_to_omega(lam)
            vg_base = group_velocity(pcf1_geometry, w)
            vg_cal = group_velocity(pcf1_calibrated, w)
            assert vg_cal == pytest.approx(vg_base, rel=1e-3)


def test_taylor_config_block_roundtrip(pcf2_calibrated):
    from fwmkit.config import parse_config

    block = taylor_config_block(pcf2_calibrated, name="exported")
    cfg = parse_config(block)
    restored = cfg.fibers["exported"]
    w = wavelength_to_omega(1200e-9)
    assert beta(restored, w) == pytest.approx(beta(pcf2_calibrated, w), rel=1e-12)


def test_fiberspec_validation():
    with pytest.raises(ValueError):
        FiberSpec.geometry(pitch=1e-6, hole_diameter=2e-6, length=1.0, gamma=0.01)
    with pytest.raises(ValueError):
        FiberSpec.geometry(pitch=1.51e-6, hole_diameter=0.96e-6, length=-1.0, gamma=0.01)
    with pytest.raises(ValueError):
        FiberSpec.geometry(pitch=1.51e-6, hole_diameter=0.96e-6, length=1.0, gamma=0.0)
    with pytest.raises(ValueError):
        FiberSpec.from_taylor(2e15, (0.0, 0.0), length=1.0, gamma=0.01)
