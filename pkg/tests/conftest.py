import pytest

from fwmkit import fiber
from fwmkit.core import PulseTrainSpec, wavelength_to_omega
from fwmkit.kinematics import ConversionSetup

LAM_PUMP = 777e-9
LAM_SEED = 977.2e-9
LAM_TELECOM = 1531.6e-9
LAM_TARGET = 1092e-9


@pytest.fixture(scope="session")
def pcf1_geometry():
    return fiber.FiberSpec.geometry(
        pitch=1.51e-6, hole_diameter=0.96e-6, length=0.45, gamma=0.015
    )


@pytest.fixture(scope="session")
def pcf2_geometry():
    return fiber.FiberSpec.geometry(
        pitch=3.48e-6, hole_diameter=1.57e-6, length=1.2, gamma=0.009
    )


@pytest.fixture(scope="session")
def pump_train():
    return PulseTrainSpec(
        tau_p=12e-12, rep_rate=80e6, avg_power=0.65, center=wavelength_to_omega(LAM_PUMP)
    )


@pytest.fixture(scope="session")
def pcf1_calibrated(pcf1_geometry, pump_train):
    """Stage-1 model with degenerate FWM matched at the operating peak power."""
    target = fiber.PhaseMatchTarget(
        process="degenerate",
        wavelengths=(LAM_PUMP, LAM_SEED),
        pump_peak_powers=(pump_train.peak_power,),
        length=pcf1_geometry.length,
    )
    return fiber.calibrate_taylor_from_targets(
        pcf1_geometry, [target], fit_band=(560e-9, 1620e-9), fit_degree=14
    )


@pytest.fixture(scope="session")
def pcf2_calibrated(pcf2_geometry):
    """Stage-2 model: BS process matched at the characterization powers,
    group delay anchored to the measured conversion bandwidth."""
    target = fiber.PhaseMatchTarget(
        process="bragg",
        wavelengths=(LAM_TELECOM, LAM_SEED, LAM_PUMP),
        pump_peak_powers=(13.7, 29.4),
        length=pcf2_geometry.length,
    )
    anchor = fiber.GroupDelayTarget(
        lambda_a=LAM_TELECOM, lambda_b=1091.0e-9, beta1_difference=6.41e-12
    )
    return fiber.calibrate_taylor_from_targets(
        pcf2_geometry,
        [target],
        group_delay_targets=[anchor],
        fit_band=(740e-9, 1620e-9),
        fit_degree=12,
    )


@pytest.fixture(scope="session")
def bs_setup(pcf2_calibrated):
    """Up-conversion setup at the characterization powers."""
    return ConversionSetup.from_bs(
        wavelength_to_omega(LAM_TELECOM),
        wavelength_to_omega(LAM_SEED),
        wavelength_to_omega(LAM_PUMP),
        13.7,
        29.4,
        pcf2_calibrated,
    )
