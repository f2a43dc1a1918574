import math

import numpy as np
import pytest

from fwmkit.core import wavelength_to_omega
from fwmkit.errors import BracketingError
from fwmkit.fiber import FiberSpec
from fwmkit.kinematics import ConversionSetup
from fwmkit.phasematch import (
    bandwidth_curve,
    find_matched_input,
    mismatch_bs,
    mismatch_degenerate,
)

W_PUMP = wavelength_to_omega(777e-9)
W_SEED = wavelength_to_omega(977.2e-9)
W_TELECOM = wavelength_to_omega(1531.6e-9)


class TestMismatchDegenerate:
    def test_degenerate_point(self, pcf1_geometry):
        res = mismatch_degenerate(pcf1_geometry, 777e-9, 777e-9, 100.0)
        assert res.delta_beta_linear == 0.0
        assert res.delta_beta_nonlinear == pytest.approx(2 * pcf1_geometry.gamma * 100.0)

    def test_pure_beta2_quadratic(self):
        # linear part is beta2 * dw^2 for a quadratic backend (exact)
        b2 = -1.3e-26
        f = FiberSpec.from_taylor(W_PUMP, (1e7, 5e-9, b2), length=1.0, gamma=0.01)
        dw = 2.0 * math.pi * 3e12
        lam_s = 2.0 * math.pi * 2.99792458e8 / (W_PUMP + dw)
        res = mismatch_degenerate(f, 777e-9, lam_s, 0.0)
        # idler partner sits at -dw' with dw' from the float wavelength trip
        dw_s = wavelength_to_omega(lam_s) - W_PUMP
        assert res.delta_beta_linear == pytest.approx(b2 * dw_s**2, rel=1e-9)

    def test_calibrated_operating_point(self, pcf1_calibrated, pump_train):
        res = mismatch_degenerate(
            pcf1_calibrated, 777e-9, 644.883e-9, pump_train.peak_power
        )
        # the calibration target was the 977.2 sideband; the conjugate
        # wavelength closes the same process
        assert abs(res.delta_beta_total) < 2e-2
        assert res.matched

    def test_linear_only_toggle(self, pcf1_calibrated, pump_train):
        full = mismatch_degenerate(pcf1_calibrated, 777e-9, 977.2e-9, pump_train.peak_power)
        lin = mismatch_degenerate(
            pcf1_calibrated, 777e-9, 977.2e-9, pump_train.peak_power, include_nonlinear=False
        )
        assert lin.delta_beta_nonlinear == 0.0
        assert full.delta_beta_total - lin.delta_beta_total == pytest.approx(
            2 * pcf1_calibrated.gamma * pump_train.peak_power
        )


class TestMismatchBs:
    def test_quadratic_identity(self):
        # pure beta2: the balanced mismatch equals
        # beta2 * (w_emitted - w_absorbed) * (w_in - w_emitted), an exact
        # identity of the quadratic model; it vanishes as the input
        # approaches the emitted pump and flips sign across it.
        b2 = 2.2e-26
        ref = 1.9e15
        f = FiberSpec.from_taylor(ref, (9e6, 5e-9, b2), length=1.0, gamma=0.01)
        w_from, w_to = 1.93e15, 2.42e15  # emitted, absorbed
        for w_in in (1.2e15, 1.6e15, 1.91e15):
            setup = ConversionSetup.from_bs(w_in, w_from, w_to, 0.0, 0.0, f)
            res = mismatch_bs(setup, include_nonlinear=False)
            expect = b2 * (w_from - w_to) * (w_in - w_from)
            assert res.delta_beta_linear == pytest.approx(expect, rel=1e-6)

    def test_antisymmetric_under_direction_swap(self, bs_setup, pcf2_calibrated):
        # test away from the matched point, where delta_beta is well above
        # the float noise of the ~1e7 rad/m beta evaluations
        detuned = bs_setup.with_input(wavelength_to_omega(1530.5e-9))
        res_up = mismatch_bs(detuned)
        down = ConversionSetup.from_bs(
            detuned.output_omega,
            detuned.pump_to,
            detuned.pump_from,
            detuned.power_to,
            detuned.power_from,
            pcf2_calibrated,
        )
        res_down = mismatch_bs(down)
        assert abs(res_up.delta_beta_total) > 1.0
        assert res_down.delta_beta_total == pytest.approx(-res_up.delta_beta_total, rel=1e-7)

    def test_calibrated_point_matched(self, bs_setup):
        res = mismatch_bs(bs_setup)
        assert res.matched
        assert abs(res.delta_beta_total) * bs_setup.fiber.length < 1e-3

    def test_total_is_sum_of_parts(self, bs_setup):
        res = mismatch_bs(bs_setup)
        assert res.delta_beta_total == res.delta_beta_linear + res.delta_beta_nonlinear

    def test_coherence_length_diverges_toward_match(self, bs_setup):
        lams = np.array([1530.8, 1531.1, 1531.4]) * 1e-9
        coh = [
            mismatch_bs(bs_setup.with_input(wavelength_to_omega(l))).coherence_length
            for l in lams
        ]
        assert coh[0] < coh[1] < coh[2]


class TestFindMatchedInput:
    def test_recovers_calibration_wavelength(self, pcf2_calibrated):
        lam = find_matched_input(
            pcf2_calibrated, W_SEED, W_PUMP, 13.7, 29.4, (1528e-9, 1535e-9)
        )
        assert lam == pytest.approx(1531.6e-9, abs=0.05e-9)

    def test_no_bracketing_raises_with_edges(self, pcf2_calibrated):
        with pytest.raises(BracketingError, match="rad/m"):
            find_matched_input(
                pcf2_calibrated, W_SEED, W_PUMP, 13.7, 29.4, (1510e-9, 1515e-9)
            )

    def test_deterministic_under_band_shrink(self, pcf2_calibrated):
        wide = find_matched_input(pcf2_calibrated, W_SEED, W_PUMP, 13.7, 29.4, (1528e-9, 1535e-9))
        narrow = find_matched_input(
            pcf2_calibrated, W_SEED, W_PUMP, 13.7, 29.4, (wide - 0.2e-9, wide + 0.2e-9)
        )
        # both roots satisfy |delta_beta| < 1e-6 rad/m; the curve slope is
        # ~5 rad/m per nm, so they agree to well below a femtometre
        assert narrow == pytest.approx(wide, abs=1e-15 * 1531.6e-9 + 1e-15)


class TestBandwidthCurve:
    def test_peak_is_unity_on_match(self, bs_setup):
        curve = bandwidth_curve(bs_setup, (1528e-9, 1535e-9), 201)
        assert np.max(curve.efficiencies) > 0.999
        assert np.all(curve.efficiencies >= 0.0)
        assert np.all(curve.efficiencies <= 1.0)
        assert curve.center == curve.input_wavelengths[np.argmax(curve.efficiencies)]

    def test_fwhm_near_published_value(self, bs_setup):
        curve = bandwidth_curve(bs_setup, (1528e-9, 1535e-9), 401)
        assert 0.45e-9 < curve.fwhm < 1.35e-9  # 0.9 nm +- 50%

    def test_doubling_length_halves_fwhm(self, bs_setup, pcf2_calibrated):
        curve1 = bandwidth_curve(bs_setup, (1528e-9, 1535e-9), 801)
        doubled = FiberSpec.from_taylor(
            pcf2_calibrated.taylor.omega_ref,
            pcf2_calibrated.taylor.beta_coeffs,
            2 * pcf2_calibrated.length,
            pcf2_calibrated.gamma,
        )
        setup2 = ConversionSetup.from_bs(
            bs_setup.input_omega, bs_setup.pump_from, bs_setup.pump_to,
            bs_setup.power_from, bs_setup.power_to, doubled,
        )
        curve2 = bandwidth_curve(setup2, (1528e-9, 1535e-9), 801)
        assert curve1.fwhm / curve2.fwhm == pytest.approx(2.0, rel=0.05)

    def test_fwhm_stable_under_refinement(self, bs_setup):
        a = bandwidth_curve(bs_setup, (1528e-9, 1535e-9), 201).fwhm
        b = bandwidth_curve(bs_setup, (1528e-9, 1535e-9), 402).fwhm
        assert b == pytest.approx(a, rel=0.02)

    def test_too_few_points_rejected(self, bs_setup):
        with pytest.raises(ValueError):
            bandwidth_curve(bs_setup, (1528e-9, 1535e-9), 8)

    def test_csv_export(self, bs_setup, tmp_path):
        curve = bandwidth_curve(bs_setup, (1530e-9, 1533e-9), 32)
        path = tmp_path / "curve.csv"
        curve.write_csv(path)
        rows = path.read_text().splitlines()
        assert rows[0] == "wavelength_nm,efficiency"
        assert len(rows) == 33
