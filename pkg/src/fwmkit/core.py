"""Units, grids, and optical-field containers shared by every other module.

Conventions used throughout the toolkit:

* Frequencies are angular (rad/s), wavelengths are vacuum wavelengths (m).
* Field envelopes are complex amplitudes in units of sqrt(W), so ``|a|**2``
  is instantaneous power.  A spectral component of the optical field at
  ``carrier + offset`` appears in the envelope as ``exp(+1j*offset*t)``;
  FFT bin ``k`` therefore corresponds to ``carrier + 2*pi*fftfreq(n, dt)[k]``.
* Pulse durations are full widths at half maximum of the power profile.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import NewType

import numpy as np

C_LIGHT = 299_792_458.0  # m/s
HBAR = 1.054_571_817e-34  # J s
TWO_PI_C = 2.0 * math.pi * C_LIGHT

#: Angular optical frequency in rad/s.  Plain float at runtime; constructors
#: below enforce positivity at the conversion boundary.
OpticalFrequency = NewType("OpticalFrequency", float)

# Peak power = factor * avg_power / (tau_fwhm * rep_rate) for each pulse shape.
SHAPE_PEAK_FACTORS = {
    "gaussian": 2.0 * math.sqrt(math.log(2.0) / math.pi),  # 0.93944
    "sech": math.log(1.0 + math.sqrt(2.0)),  # 0.88137
    "rect": 1.0,
}


def wavelength_to_omega(wavelength: float) -> OpticalFrequency:
    """Convert a vacuum wavelength (m) to angular frequency (rad/s)."""
    if not (wavelength > 0.0 and math.isfinite(wavelength)):
        raise ValueError(f"wavelength must be positive and finite, got {wavelength}")
    return OpticalFrequency(TWO_PI_C / wavelength)


def omega_to_wavelength(omega: float) -> float:
    """Convert an angular frequency (rad/s) to vacuum wavelength (m)."""
    if not (omega > 0.0 and math.isfinite(omega)):
        raise ValueError(f"omega must be positive and finite, got {omega}")
    return TWO_PI_C / omega


@dataclass(frozen=True)
class TemporalGrid:
    """Uniform temporal grid with a carrier frequency.

    Parameters
    ----------
    n_points : int
        Number of samples; must be a power of two between 2**10 and 2**22.
    span : float
        Total time window in seconds.
    carrier : float
        Angular carrier frequency in rad/s.
    """

    n_points: int
    span: float
    carrier: float

    def __post_init__(self):
        n = self.n_points
        if n <= 0 or (n & (n - 1)) != 0 or not (2**10 <= n <= 2**22):
            raise ValueError(f"n_points must be a power of two in [2^10, 2^22], got {n}")
        if not (self.span > 0.0 and math.isfinite(self.span)):
            raise ValueError(f"span must be positive, got {self.span}")
        if not (self.carrier > 0.0 and math.isfinite(self.carrier)):
            raise ValueError(f"carrier must be positive, got {self.carrier}")

    @property
    def dt(self) -> float:
        return self.span / self.n_points

    @cached_property
    def t(self) -> np.ndarray:
        """Sample times, centered on zero."""
        t = (np.arange(self.n_points) - self.n_points // 2) * self.dt
        t.flags.writeable = False
        return t

    @cached_property
    def omega_rel(self) -> np.ndarray:
        """Angular frequency offset of each FFT bin relative to the carrier."""
        w = 2.0 * math.pi * np.fft.fftfreq(self.n_points, self.dt)
        w.flags.writeable = False
        return w

    @cached_property
    def omega_abs(self) -> np.ndarray:
        """Absolute angular frequency of each FFT bin (FFT ordering)."""
        w = self.carrier + self.omega_rel
        w.flags.writeable = False
        return w

    @property
    def domega(self) -> float:
        """Angular frequency spacing of the grid (2*pi/span)."""
        return 2.0 * math.pi / self.span


@dataclass(frozen=True)
class FieldEnvelope:
    """Complex field envelope on a :class:`TemporalGrid`, in sqrt(W)."""

    grid: TemporalGrid
    samples: np.ndarray

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.complex128)
        if samples.shape != (self.grid.n_points,):
            raise ValueError(
                f"samples shape {samples.shape} does not match grid ({self.grid.n_points},)"
            )
        if not np.all(np.isfinite(samples)):
            raise ValueError("samples must be finite")
        samples = samples.copy()
        samples.flags.writeable = False
        object.__setattr__(self, "samples", samples)

    def energy(self) -> float:
        return field_energy(self)


@dataclass(frozen=True)
class SpectrumRecord:
    """Discretized optical spectrum.

    ``psd`` holds the integrated power (or pulse energy) of each bin, so the
    plain sum of ``psd`` over a band is the band power.  ``resolution`` is the
    equivalent noise bandwidth of one bin in rad/s.
    """

    frequencies: np.ndarray
    psd: np.ndarray
    resolution: float

    def __post_init__(self):
        freq = np.asarray(self.frequencies, dtype=float)
        psd = np.asarray(self.psd, dtype=float)
        if freq.ndim != 1 or freq.shape != psd.shape:
            raise ValueError("frequencies and psd must be 1-d arrays of equal length")
        if np.any(np.diff(freq) <= 0.0):
            raise ValueError("frequencies must be strictly increasing")
        if np.any(psd < 0.0):
            raise ValueError("psd must be non-negative")
        if not (self.resolution > 0.0):
            raise ValueError("resolution must be positive")
        freq.flags.writeable = False
        psd.flags.writeable = False
        object.__setattr__(self, "frequencies", freq)
        object.__setattr__(self, "psd", psd)

    def total_power(self) -> float:
        return float(np.sum(self.psd))


@dataclass(frozen=True)
class PulseTrainSpec:
    """A pulsed source: duration (FWHM), repetition rate, and average power."""

    tau_p: float
    rep_rate: float
    avg_power: float
    center: float
    shape: str = "gaussian"
    chirp: float = 0.0

    def __post_init__(self):
        if self.tau_p <= 0.0 or self.rep_rate <= 0.0:
            raise ValueError("tau_p and rep_rate must be positive")
        if self.tau_p * self.rep_rate >= 1.0:
            raise ValueError("duty cycle tau_p * rep_rate must be below unity")
        if self.avg_power <= 0.0:
            raise ValueError("avg_power must be positive")
        if self.center <= 0.0:
            raise ValueError("center frequency must be positive")
        if self.shape not in SHAPE_PEAK_FACTORS:
            raise ValueError(f"unknown pulse shape {self.shape!r}")

    @property
    def shape_factor(self) -> float:
        """Ratio of peak power to avg_power/(tau_p*rep_rate) for this shape."""
        return SHAPE_PEAK_FACTORS[self.shape]

    @property
    def peak_power(self) -> float:
        return self.shape_factor * self.avg_power / (self.tau_p * self.rep_rate)

    @property
    def pulse_energy(self) -> float:
        return self.avg_power / self.rep_rate


def field_energy(envelope: FieldEnvelope) -> float:
    """Pulse energy of an envelope in joules: sum(|a|^2) * dt."""
    a = envelope.samples
    return float(np.vdot(a, a).real) * envelope.grid.dt


def to_spectrum(envelope: FieldEnvelope) -> SpectrumRecord:
    """Discrete spectrum of an envelope, normalized so bins sum to the energy.

    The frequency axis is absolute (carrier plus bin offset) and ascending.
    """
    grid = envelope.grid
    spec = np.fft.fft(envelope.samples)
    psd = (np.abs(spec) ** 2) * (grid.dt / grid.n_points)
    order = np.fft.fftshift(np.arange(grid.n_points))
    freqs = grid.omega_abs[order]
    return SpectrumRecord(frequencies=freqs, psd=psd[order], resolution=grid.domega)


def gaussian_pulse(
    grid: TemporalGrid,
    peak_power: float,
    tau_fwhm: float,
    *,
    offset_omega: float = 0.0,
    t_center: float = 0.0,
    chirp: float = 0.0,
) -> FieldEnvelope:
    """Gaussian pulse with the given peak power (W) and intensity FWHM (s).

    ``chirp`` is the dimensionless linear chirp parameter C in
    ``exp(-(1 + iC) * 2*ln2 * t^2 / tau^2)``.
    """
    t = grid.t - t_center
    arg = -2.0 * math.log(2.0) * (1.0 + 1j * chirp) * (t / tau_fwhm) ** 2
    a = math.sqrt(peak_power) * np.exp(arg)
    if offset_omega != 0.0:
        a = a * np.exp(1j * offset_omega * grid.t)
    return FieldEnvelope(grid=grid, samples=a)


def sech_pulse(
    grid: TemporalGrid,
    peak_power: float,
    tau_fwhm: float,
    *,
    offset_omega: float = 0.0,
    t_center: float = 0.0,
) -> FieldEnvelope:
    """Hyperbolic-secant pulse; tau_fwhm = 2*arcsinh(1)*T0."""
    t0 = tau_fwhm / (2.0 * math.asinh(1.0))
    a = math.sqrt(peak_power) / np.cosh((grid.t - t_center) / t0)
    if offset_omega != 0.0:
        a = a * np.exp(1j * offset_omega * grid.t)
    return FieldEnvelope(grid=grid, samples=a)


def cw_field(grid: TemporalGrid, power: float, offset_omega: float = 0.0) -> FieldEnvelope:
    """Continuous field of constant power, offset from the grid carrier."""
    a = math.sqrt(power) * np.exp(1j * offset_omega * grid.t)
    return FieldEnvelope(grid=grid, samples=a)


def pulse_from_train(
    grid: TemporalGrid,
    train: PulseTrainSpec,
    *,
    t_center: float = 0.0,
    energy_scale: float = 1.0,
) -> FieldEnvelope:
    """One pulse of a train placed on a grid, carrier offset included.

    ``energy_scale`` multiplies the pulse energy (amplitude scales by its
    square root); used for shot-to-shot jitter.
    """
    offset = train.center - grid.carrier
    peak = train.peak_power * energy_scale
    if train.shape == "gaussian":
        return gaussian_pulse(
            grid, peak, train.tau_p, offset_omega=offset, t_center=t_center, chirp=train.chirp
        )
    if train.shape == "sech":
        return sech_pulse(grid, peak, train.tau_p, offset_omega=offset, t_center=t_center)
    # rect
    a = np.where(np.abs(grid.t - t_center) <= train.tau_p / 2.0, math.sqrt(peak), 0.0)
    a = a.astype(np.complex128)
    if offset != 0.0:
        a *= np.exp(1j * offset * grid.t)
    return FieldEnvelope(grid=grid, samples=a)
