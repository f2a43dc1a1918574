"""Phase-mismatch evaluation and matched-wavelength search.

Mismatch sign convention: the input field and the absorbed pump enter with
plus signs, the output field and the emitted pump with minus signs, so the
combination is frequency balanced and only dispersion survives.  The
nonlinear part follows the strong-pump, weak-signal convention (pump SPM
once, cross-phase on the weak fields twice), which reduces to
``gamma * (P_emitted - P_absorbed)`` for Bragg scattering and
``2 * gamma * P`` for degenerate mixing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import wavelength_to_omega
from .errors import BracketingError
from .fiber import FiberSpec, beta
from .kinematics import ConversionSetup, degenerate_fwm_partner
from .metrics import half_crossings


@dataclass(frozen=True)
class PhaseMatchResult:
    """Linear/nonlinear mismatch decomposition for one process."""

    delta_beta_linear: float
    delta_beta_nonlinear: float
    delta_beta_total: float
    coherence_length: float
    matched: bool

    @classmethod
    def from_parts(cls, linear: float, nonlinear: float, length: float) -> "PhaseMatchResult":
        total = linear + nonlinear
        coherence = math.pi / abs(total) if total != 0.0 else math.inf
        return cls(
            delta_beta_linear=linear,
            delta_beta_nonlinear=nonlinear,
            delta_beta_total=total,
            coherence_length=coherence,
            matched=abs(total) * length < math.pi,
        )


def mismatch_degenerate(
    fiber: FiberSpec,
    pump_wavelength: float,
    signal_wavelength: float,
    pump_peak_power: float,
    *,
    include_nonlinear: bool = True,
) -> PhaseMatchResult:
    """Mismatch of degenerate FWM; the idler is implied by 2*w_p = w_s + w_i."""
    w_p = wavelength_to_omega(pump_wavelength)
    w_s = wavelength_to_omega(signal_wavelength)
    if w_s == w_p:
        linear = 0.0
    else:
        w_i = degenerate_fwm_partner(w_p, w_s)
        linear = float(beta(fiber, w_s) + beta(fiber, w_i) - 2.0 * beta(fiber, w_p))
    nonlinear = 2.0 * fiber.gamma * pump_peak_power if include_nonlinear else 0.0
    return PhaseMatchResult.from_parts(linear, nonlinear, fiber.length)


def mismatch_bs(setup: ConversionSetup, *, include_nonlinear: bool = True) -> PhaseMatchResult:
    """Mismatch of Bragg-scattering FWM for a conversion setup.

    Linear part: beta_in + beta_absorbed - beta_out - beta_emitted, where the
    absorbed pump is ``setup.pump_to`` and the emitted pump ``setup.pump_from``
    (w_in + w_to = w_out + w_from).  Nonlinear part:
    gamma * (P_from - P_to), i.e. emitted minus absorbed pump power.
    """
    fiber = setup.fiber
    linear = float(
        beta(fiber, setup.input_omega)
        + beta(fiber, setup.pump_to)
        - beta(fiber, setup.output_omega)
        - beta(fiber, setup.pump_from)
    )
    nonlinear = (
        fiber.gamma * (setup.power_from - setup.power_to) if include_nonlinear else 0.0
    )
    return PhaseMatchResult.from_parts(linear, nonlinear, fiber.length)


def find_matched_input(
    fiber: FiberSpec,
    pump_from: float,
    pump_to: float,
    power_from: float,
    power_to: float,
    band: tuple,
    *,
    tol: float = 1e-6,
    include_nonlinear: bool = True,
    max_iter: int = 200,
) -> float:
    """Input wavelength (m) where the BS mismatch vanishes, by bisection.

    ``band`` is an (low, high) wavelength interval that must bracket a sign
    change of the total mismatch; the root is refined until
    |delta_beta| < tol (rad/m).  Deterministic.
    """

    def total(lam: float) -> float:
        setup = ConversionSetup.from_bs(
            wavelength_to_omega(lam), pump_from, pump_to, power_from, power_to, fiber
        )
        return mismatch_bs(setup, include_nonlinear=include_nonlinear).delta_beta_total

    lo, hi = min(band), max(band)
    f_lo, f_hi = total(lo), total(hi)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if math.copysign(1.0, f_lo) == math.copysign(1.0, f_hi):
        raise BracketingError(
            f"no sign change of delta_beta in [{lo * 1e9:.3f} nm, {hi * 1e9:.3f} nm]: "
            f"delta_beta = {f_lo:.4e} and {f_hi:.4e} rad/m at the band edges"
        )
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        f_mid = total(mid)
        if abs(f_mid) < tol or (hi - lo) < 1e-18:
            return mid
        if math.copysign(1.0, f_mid) == math.copysign(1.0, f_lo):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class BandwidthCurve:
    """Relative conversion efficiency versus input wavelength."""

    input_wavelengths: np.ndarray
    efficiencies: np.ndarray
    center: float
    fwhm: float

    def __post_init__(self):
        wl = np.asarray(self.input_wavelengths, dtype=float)
        eff = np.asarray(self.efficiencies, dtype=float)
        wl.flags.writeable = False
        eff.flags.writeable = False
        object.__setattr__(self, "input_wavelengths", wl)
        object.__setattr__(self, "efficiencies", eff)

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as f:
            f.write("wavelength_nm,efficiency\n")
            for lam, eff in zip(self.input_wavelengths, self.efficiencies):
                f.write(f"{lam * 1e9:.9g},{eff:.9g}\n")


def bandwidth_curve(
    setup: ConversionSetup,
    band: tuple,
    n_points: int = 201,
    *,
    include_nonlinear: bool = True,
) -> BandwidthCurve:
    """Sample sinc^2(delta_beta*L/2) over an input-wavelength band.

    Efficiency is 1 exactly where the mismatch vanishes; the FWHM is read
    from the sampled curve by linear interpolation, mirroring how one would
    measure it off a plotted scan.  NaN when the half-maximum points are not
    bracketed by the scan band.
    """
    if n_points < 16:
        raise ValueError("n_points must be at least 16")
    length = setup.fiber.length
    lams = np.linspace(min(band), max(band), n_points)
    eff = np.empty(n_points)
    for i, lam in enumerate(lams):
        res = mismatch_bs(setup.with_input(wavelength_to_omega(lam)),
                          include_nonlinear=include_nonlinear)
        eff[i] = np.sinc(res.delta_beta_total * length / (2.0 * math.pi)) ** 2
    i_peak = int(np.argmax(eff))
    left, right = half_crossings(lams, eff, i_peak, eff[i_peak] / 2.0)
    fwhm = (right - left) if (left is not None and right is not None) else math.nan
    return BandwidthCurve(
        input_wavelengths=lams,
        efficiencies=eff,
        center=float(lams[i_peak]),
        fwhm=fwhm,
    )
