"""Dispersion and nonlinearity models for photonic crystal fiber spans.

Two interchangeable dispersion backends:

* ``geometry`` — empirical effective-index model for a hexagonal-lattice
  holey cladding, parameterized by pitch and hole diameter, on top of a
  three-term Sellmeier fit for fused silica.  Good for qualitative design
  work; effective-index fits of this family carry percent-level error,
  which can move phase-matched wavelengths by tens of nm.
* ``taylor`` — truncated Taylor expansion of beta around a reference
  frequency.  ``calibrate_taylor_from_targets`` produces one from any base
  model by least-squares adjustment of chosen orders so that a set of
  phase-matching conditions is satisfied exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from .core import C_LIGHT, omega_to_wavelength, wavelength_to_omega
from .errors import CalibrationError, RangeError

# Fused silica Sellmeier fit (three terms; lambda in micrometres).
SILICA_SELLMEIER_B = (0.6961663, 0.4079426, 0.8974794)
SILICA_SELLMEIER_C_UM2 = (0.0684043**2, 0.1162414**2, 9.896161**2)

# Validity window of the geometry backend.
GEOMETRY_WAVELENGTH_RANGE = (500e-9, 1800e-9)
HOLE_RATIO_RANGE = (0.2, 0.8)

# Finite-difference step for derivatives of the geometry backend; halving it
# changes group velocities by < 1e-6 relative (checked in tests).
FD_STEP = 2.0 * math.pi * 10e9

# Empirical V- and W-parameter fits for the fundamental mode of a
# hexagonal-lattice holey fiber: X = A1 + A2 / (1 + A3*exp(A4*lam/pitch)),
# with each Ai a three-power polynomial in d/pitch.  One coefficient row per
# parameter A1..A4 / B1..B4.
_V_A = np.array(
    [
        [0.54808, 5.00401, -10.43248, 8.22992],
        [0.71041, 9.73491, 47.41496, -437.50962],
        [0.16904, 1.85765, 18.96849, -42.4318],
        [-1.52736, 1.06745, 1.93229, 3.89],
    ]
)
_V_B = np.array(
    [
        [5.0, 7.0, 9.0],
        [1.8, 7.32, 22.8],
        [1.7, 10.0, 14.0],
        [-0.84, 1.02, 13.4],
    ]
)
_W_C = np.array(
    [
        [-0.0973, -16.70566, 67.13845, -50.25518],
        [0.53193, 6.70858, 52.04855, -540.66947],
        [0.24876, 2.72423, 13.28649, -36.80372],
        [5.29801, 0.05142, -5.18302, 2.7641],
    ]
)
_W_D = np.array(
    [
        [7.0, 9.0, 10.0],
        [1.49, 6.58, 24.8],
        [3.85, 10.0, 15.0],
        [-2.0, 0.41, 6.0],
    ]
)


def silica_index(wavelength):
    """Refractive index of fused silica from the three-term Sellmeier fit."""
    lam2 = (np.asarray(wavelength) * 1e6) ** 2
    n2 = 1.0
    for b, c in zip(SILICA_SELLMEIER_B, SILICA_SELLMEIER_C_UM2):
        n2 = n2 + b * lam2 / (lam2 - c)
    return np.sqrt(n2)


def _vw_parameter(coeff_a, coeff_b, d_ratio, lam_ratio):
    terms = [
        row_a[0] + np.sum(row_a[1:] * d_ratio ** row_b)
        for row_a, row_b in zip(coeff_a, coeff_b)
    ]
    p1, p2, p3, p4 = terms
    return p1 + p2 / (1.0 + p3 * np.exp(p4 * lam_ratio))


def pcf_effective_index(wavelength, pitch: float, hole_diameter: float):
    """Effective index of the fundamental mode of a hexagonal-lattice PCF.

    Empirical fit in d/pitch and lambda/pitch; valid for hole ratios in
    [0.2, 0.8].  Material dispersion enters through the silica core index.
    """
    d_ratio = hole_diameter / pitch
    lam = np.asarray(wavelength, dtype=float)
    lam_ratio = lam / pitch
    v = _vw_parameter(_V_A, _V_B, d_ratio, lam_ratio)
    w = _vw_parameter(_W_C, _W_D, d_ratio, lam_ratio)
    a_eff = pitch / math.sqrt(3.0)
    k_aeff = 2.0 * math.pi * a_eff / lam
    n_co = silica_index(lam)
    n_fsm2 = n_co**2 - (v / k_aeff) ** 2
    n_eff2 = n_fsm2 + (w / k_aeff) ** 2
    return np.sqrt(n_eff2)


@dataclass(frozen=True)
class TaylorDispersion:
    """Taylor coefficients of beta around a reference frequency.

    ``beta_coeffs[k]`` is the k-th derivative of beta at ``omega_ref`` in
    s^k/m, so beta(w) = sum_k beta_coeffs[k] * (w - omega_ref)**k / k!.
    """

    omega_ref: float
    beta_coeffs: tuple

    def __post_init__(self):
        if self.omega_ref <= 0.0:
            raise ValueError("omega_ref must be positive")
        coeffs = tuple(float(c) for c in self.beta_coeffs)
        if len(coeffs) < 3:
            raise ValueError("beta_coeffs must include at least beta0..beta2")
        object.__setattr__(self, "beta_coeffs", coeffs)


@dataclass(frozen=True)
class FiberSpec:
    """One fiber span: geometry, length, dispersion backend, nonlinearity."""

    length: float
    gamma: float
    dispersion_backend: Literal["geometry", "taylor"]
    pitch: float | None = None
    hole_diameter: float | None = None
    taylor: TaylorDispersion | None = None
    loss: float = 0.0

    def __post_init__(self):
        if self.length <= 0.0:
            raise ValueError("length must be positive")
        if self.gamma <= 0.0:
            raise ValueError("gamma must be positive")
        if self.loss < 0.0:
            raise ValueError("loss must be non-negative")
        if self.dispersion_backend == "geometry":
            if self.pitch is None or self.hole_diameter is None:
                raise ValueError("geometry backend requires pitch and hole_diameter")
            if not (0.0 < self.hole_diameter < self.pitch):
                raise ValueError("hole_diameter must be positive and below pitch")
            ratio = self.hole_diameter / self.pitch
            lo, hi = HOLE_RATIO_RANGE
            if not (lo <= ratio <= hi):
                raise ValueError(f"hole/pitch ratio {ratio:.3f} outside model range [{lo}, {hi}]")
        elif self.dispersion_backend == "taylor":
            if self.taylor is None:
                raise ValueError("taylor backend requires taylor coefficients")
        else:
            raise ValueError(f"unknown dispersion backend {self.dispersion_backend!r}")

    @classmethod
    def geometry(cls, pitch, hole_diameter, length, gamma, loss=0.0):
        return cls(
            length=length,
            gamma=gamma,
            dispersion_backend="geometry",
            pitch=pitch,
            hole_diameter=hole_diameter,
            loss=loss,
        )

    @classmethod
    def from_taylor(cls, omega_ref, beta_coeffs, length, gamma, loss=0.0):
        return cls(
            length=length,
            gamma=gamma,
            dispersion_backend="taylor",
            taylor=TaylorDispersion(omega_ref=omega_ref, beta_coeffs=tuple(beta_coeffs)),
            loss=loss,
        )


def _check_geometry_range(omega):
    lam = np.asarray(2.0 * math.pi * C_LIGHT / np.asarray(omega, dtype=float))
    lo, hi = GEOMETRY_WAVELENGTH_RANGE
    if np.any(lam < lo) or np.any(lam > hi):
        bad = float(np.min(lam)) if np.any(lam < lo) else float(np.max(lam))
        raise RangeError(
            f"wavelength {bad * 1e9:.1f} nm outside geometry model range "
            f"[{lo * 1e9:.0f} nm, {hi * 1e9:.0f} nm]"
        )


def _taylor_eval(taylor: TaylorDispersion, omega, derivative: int = 0):
    dw = np.asarray(omega, dtype=float) - taylor.omega_ref
    coeffs = taylor.beta_coeffs
    out = np.zeros_like(dw)
    for k in range(len(coeffs) - 1, derivative - 1, -1):
        out = out * dw + coeffs[k] / math.factorial(k - derivative)
    return out


def beta(fiber: FiberSpec, omega) -> float | np.ndarray:
    """Propagation constant beta(omega) in rad/m for the fiber's backend."""
    if fiber.dispersion_backend == "taylor":
        out = _taylor_eval(fiber.taylor, omega)
    else:
        _check_geometry_range(omega)
        w = np.asarray(omega, dtype=float)
        lam = 2.0 * math.pi * C_LIGHT / w
        out = pcf_effective_index(lam, fiber.pitch, fiber.hole_diameter) * w / C_LIGHT
    return float(out) if np.ndim(omega) == 0 else out


def beta1(fiber: FiberSpec, omega) -> float | np.ndarray:
    """First frequency derivative of beta (inverse group velocity), s/m."""
    if fiber.dispersion_backend == "taylor":
        out = _taylor_eval(fiber.taylor, omega, derivative=1)
        return float(out) if np.ndim(omega) == 0 else out
    w = np.asarray(omega, dtype=float)
    return (beta(fiber, w + FD_STEP) - beta(fiber, w - FD_STEP)) / (2.0 * FD_STEP)


def beta2(fiber: FiberSpec, omega) -> float | np.ndarray:
    """Second frequency derivative of beta (group-velocity dispersion), s^2/m."""
    if fiber.dispersion_backend == "taylor":
        out = _taylor_eval(fiber.taylor, omega, derivative=2)
        return float(out) if np.ndim(omega) == 0 else out
    w = np.asarray(omega, dtype=float)
    return (beta(fiber, w + FD_STEP) - 2.0 * beta(fiber, w) + beta(fiber, w - FD_STEP)) / FD_STEP**2


def group_velocity(fiber: FiberSpec, omega) -> float | np.ndarray:
    """Group velocity 1/beta1 in m/s."""
    b1 = beta1(fiber, omega)
    return 1.0 / b1


def walk_off_length(fiber: FiberSpec, lambda_a: float, lambda_b: float, tau_p: float) -> float:
    """Distance over which pulses at two wavelengths separate by tau_p.

    Returns ``math.inf`` when the group velocities match (no walk-off).
    """
    if tau_p <= 0.0:
        raise ValueError("tau_p must be positive")
    b1a = beta1(fiber, wavelength_to_omega(lambda_a))
    b1b = beta1(fiber, wavelength_to_omega(lambda_b))
    delta = abs(b1a - b1b)
    if delta == 0.0:
        return math.inf
    return tau_p / delta


@dataclass(frozen=True)
class PhaseMatchTarget:
    """One phase-matching condition used for Taylor calibration.

    ``process`` selects the mismatch formula:

    * ``degenerate`` — wavelengths (pump, sideband); the partner sideband is
      implied by 2*w_pump = w_s + w_i.  Nonlinear term ``2*gamma*P`` with
      ``pump_peak_powers = (P,)``.
    * ``bragg`` — wavelengths (input, pump_from, pump_to); the output is
      implied by w_out = w_in + w_to - w_from.  The pump photon is absorbed
      at ``pump_to`` and emitted at ``pump_from``, so the balanced mismatch
      is beta_in + beta_to - beta_out - beta_from, and the nonlinear term is
      ``gamma*(P_from - P_to)`` (emitted minus absorbed).
    """

    process: Literal["degenerate", "bragg"]
    wavelengths: tuple
    pump_peak_powers: tuple = ()
    length: float | None = None

    def signed_frequencies(self):
        """(omega, sign) pairs entering the linear mismatch sum.

        The signs always balance (sum of sign*omega is zero), so the large
        material part of beta cancels and only dispersion remains.
        """
        w = [wavelength_to_omega(lam) for lam in self.wavelengths]
        if self.process == "degenerate":
            pump, side = w
            partner = 2.0 * pump - side
            if partner <= 0.0:
                raise ValueError("implied degenerate partner frequency is non-positive")
            return [(side, 1.0), (partner, 1.0), (pump, -2.0)]
        if self.process == "bragg":
            w_in, w_from, w_to = w
            w_out = w_in + w_to - w_from
            if w_out <= 0.0:
                raise ValueError("implied output frequency is non-positive")
            return [(w_in, 1.0), (w_to, 1.0), (w_out, -1.0), (w_from, -1.0)]
        raise ValueError(f"unknown process {self.process!r}")

    def nonlinear_mismatch(self, gamma: float) -> float:
        if not self.pump_peak_powers:
            return 0.0
        if self.process == "degenerate":
            (p,) = self.pump_peak_powers
            return 2.0 * gamma * p
        p_from, p_to = self.pump_peak_powers
        return gamma * (p_from - p_to)


def _target_mismatch(fiber: FiberSpec, target: PhaseMatchTarget) -> float:
    lin = sum(sign * beta(fiber, w) for w, sign in target.signed_frequencies())
    return lin + target.nonlinear_mismatch(fiber.gamma)


def taylor_refit(
    base: FiberSpec,
    omega_ref: float,
    fit_band: tuple,
    fit_degree: int = 12,
    n_fit_samples: int = 400,
) -> FiberSpec:
    """Refit any backend's beta as a Taylor series around ``omega_ref``.

    Samples beta over ``fit_band`` (wavelengths, m) at Chebyshev-distributed
    frequencies and converts the fitted polynomial to derivative coefficients.
    """
    w_lo = wavelength_to_omega(fit_band[1])
    w_hi = wavelength_to_omega(fit_band[0])
    nodes = np.cos(np.pi * (np.arange(n_fit_samples) + 0.5) / n_fit_samples)
    w_mid, w_half = 0.5 * (w_hi + w_lo), 0.5 * (w_hi - w_lo)
    w_samples = w_mid + w_half * nodes
    beta_samples = beta(base, w_samples)

    v = (w_samples - w_mid) / w_half
    cheb = np.polynomial.chebyshev.Chebyshev.fit(v, beta_samples, deg=fit_degree, domain=[-1, 1])
    poly_v = np.polynomial.chebyshev.cheb2poly(cheb.coef)

    # Re-center the power series from w_mid to omega_ref and undo the scaling:
    # beta_k = P^(k)(v_ref) / w_half^k with v_ref = (omega_ref - w_mid)/w_half.
    v_ref = (omega_ref - w_mid) / w_half
    coeffs = []
    deriv = poly_v.copy()
    for k in range(fit_degree + 1):
        coeffs.append(float(np.polynomial.polynomial.polyval(v_ref, deriv)) / w_half**k)
        deriv = np.polynomial.polynomial.polyder(deriv)
    return FiberSpec.from_taylor(omega_ref, coeffs, base.length, base.gamma, base.loss)


@dataclass(frozen=True)
class GroupDelayTarget:
    """Pin the group-delay difference between two wavelengths.

    ``beta1_difference`` is the target beta1(lambda_a) - beta1(lambda_b) in
    s/m.  Useful for anchoring a model to an observed conversion bandwidth
    or walk-off when the geometry fit runs hot or cold.
    """

    lambda_a: float
    lambda_b: float
    beta1_difference: float


def calibrate_taylor_from_targets(
    base: FiberSpec,
    targets: Sequence[PhaseMatchTarget],
    *,
    adjust_orders: Sequence[int] = (2, 3, 4),
    omega_ref: float | None = None,
    fit_band: tuple | None = None,
    fit_degree: int = 12,
    n_fit_samples: int = 400,
    phase_tolerance: float = 1e-3,
    group_delay_targets: Sequence[GroupDelayTarget] = (),
) -> FiberSpec:
    """Produce a Taylor-backend fiber whose targets are phase matched.

    The base model's beta is sampled over ``fit_band`` (wavelengths, m) and
    refit as a polynomial around ``omega_ref``; the coefficients named in
    ``adjust_orders`` are then corrected by least squares so every target
    satisfies |delta_beta * L| below ``phase_tolerance`` (rad).  Optional
    ``group_delay_targets`` enter the same solve, pinning beta1 differences
    to measured values (a quantitative-reproduction aid; the correction
    cannot disturb the phase-match targets because both are solved jointly).

    Raises
    ------
    CalibrationError
        If the corrected model leaves any target residual above tolerance
        (mutually inconsistent targets).
    """
    if not targets:
        raise ValueError("at least one calibration target is required")

    all_freqs = [w for t in targets for w, _ in t.signed_frequencies()]
    if omega_ref is None:
        omega_ref = float(np.mean(all_freqs))
    if fit_band is None:
        lam_lo = omega_to_wavelength(max(all_freqs)) * 0.95
        lam_hi = omega_to_wavelength(min(all_freqs)) * 1.05
        if base.dispersion_backend == "geometry":
            lam_lo = max(lam_lo, GEOMETRY_WAVELENGTH_RANGE[0])
            lam_hi = min(lam_hi, GEOMETRY_WAVELENGTH_RANGE[1])
        fit_band = (lam_lo, lam_hi)

    working = base
    if working.dispersion_backend != "taylor" or working.taylor.omega_ref != omega_ref:
        working = taylor_refit(base, omega_ref, fit_band, fit_degree, n_fit_samples)
    coeffs = np.array(working.taylor.beta_coeffs)
    fit_degree = len(coeffs) - 1

    orders = sorted(set(int(k) for k in adjust_orders))
    if any(k < 2 or k > fit_degree for k in orders):
        raise ValueError(f"adjust_orders must lie in [2, {fit_degree}]")

    # One row per phase-match target, one per group-delay target.  Columns
    # are scaled by the UNSIGNED per-field magnitude of each order, not by
    # the signed (often nearly cancelling) mismatch sums: the minimum-norm
    # solution then avoids directions whose net effect relies on float-level
    # cancellation of huge per-field beta changes.
    n_pm, n_gd = len(targets), len(group_delay_targets)
    design = np.zeros((n_pm + n_gd, len(orders)))
    magnitude = np.zeros_like(design)
    residuals = np.zeros(n_pm + n_gd)
    for i, t in enumerate(targets):
        residuals[i] = _target_mismatch(working, t)
        for j, k in enumerate(orders):
            design[i, j] = sum(
                sign * (w - omega_ref) ** k / math.factorial(k)
                for w, sign in t.signed_frequencies()
            )
            magnitude[i, j] = sum(
                abs(sign) * abs(w - omega_ref) ** k / math.factorial(k)
                for w, sign in t.signed_frequencies()
            )
    for i, g in enumerate(group_delay_targets):
        w_a = wavelength_to_omega(g.lambda_a)
        w_b = wavelength_to_omega(g.lambda_b)
        row = n_pm + i
        residuals[row] = (beta1(working, w_a) - beta1(working, w_b)) - g.beta1_difference
        for j, k in enumerate(orders):
            design[row, j] = (
                (w_a - omega_ref) ** (k - 1) - (w_b - omega_ref) ** (k - 1)
            ) / math.factorial(k - 1)
            magnitude[row, j] = (
                abs(w_a - omega_ref) ** (k - 1) + abs(w_b - omega_ref) ** (k - 1)
            ) / math.factorial(k - 1)

    col_scale = np.max(magnitude, axis=0)
    col_scale[col_scale == 0.0] = 1.0
    design_c = design / col_scale
    row_scale = np.max(np.abs(design_c), axis=1)
    row_scale[row_scale == 0.0] = 1.0
    delta, *_ = np.linalg.lstsq(
        design_c / row_scale[:, None], -residuals / row_scale, rcond=None
    )
    delta = delta / col_scale

    adjusted = coeffs.copy()
    for j, k in enumerate(orders):
        adjusted[k] += delta[j]

    calibrated = FiberSpec.from_taylor(omega_ref, adjusted, base.length, base.gamma, base.loss)

    report = []
    for t in targets:
        res = _target_mismatch(calibrated, t)
        span = t.length if t.length is not None else base.length
        report.append((f"delta_beta={res:.3e} rad/m", abs(res * span) / phase_tolerance))
    for g in group_delay_targets:
        w_a = wavelength_to_omega(g.lambda_a)
        w_b = wavelength_to_omega(g.lambda_b)
        err = (beta1(calibrated, w_a) - beta1(calibrated, w_b)) - g.beta1_difference
        scale = max(abs(g.beta1_difference) * 1e-6, 1e-18)
        report.append((f"beta1_diff_err={err:.3e} s/m", abs(err) / scale))
    worst = max(rel for _, rel in report)
    if worst > 1.0:
        lines = ", ".join(f"target {i}: {msg}" for i, (msg, _) in enumerate(report))
        raise CalibrationError(f"calibration infeasible (mutually inconsistent targets): {lines}")
    return calibrated


def taylor_config_block(fiber: FiberSpec, name: str = "calibrated") -> str:
    """Render a Taylor-backend fiber as a config fragment for reuse."""
    if fiber.dispersion_backend != "taylor":
        raise ValueError("only taylor-backend fibers can be exported")
    coeffs = ", ".join(f"{c:.12e}" for c in fiber.taylor.beta_coeffs)
    return (
        f"[fibers.{name}]\n"
        f"dispersion = \"taylor\"\n"
        f"length_m = {fiber.length!r}\n"
        f"gamma_per_W_m = {fiber.gamma!r}\n"
        f"loss_per_m = {fiber.loss!r}\n"
        f"omega_ref_rad_s = {fiber.taylor.omega_ref!r}\n"
        f"beta_coeffs = [{coeffs}]\n"
    )
