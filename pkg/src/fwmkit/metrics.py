"""Measurement arithmetic applied to spectra, simulated or imported.

Band powers are plain sums of per-bin spectral values over a frequency
band (the record stores integrated power per bin, not a density).  The
photon-number-normalized efficiency estimators take band powers with and
without the input field blocked, a duty-cycle correction, and the
frequency ratio of the two bands:

    eta_up   = (P_sr - N_sr) * w_t  / (P_t  * D * w_sr)
    eta_down = (P_t  - N_t ) * w_sr / (P_sr * D * w_t)

Nothing is clamped; estimates outside [0, 1] are returned as-is with an
``EstimatorRangeWarning`` since they indicate estimator misuse.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .core import TWO_PI_C, PulseTrainSpec, SpectrumRecord
from .errors import EstimatorRangeWarning, PeakNotFoundError, RangeError

__all__ = [
    "SpectrumRecord",
    "BandPower",
    "integrate_band_power",
    "duty_cycle",
    "eta_up",
    "eta_down",
    "fwhm",
    "db_contrast",
    "osa_smooth",
    "half_crossings",
    "read_spectrum_csv",
    "write_spectrum_csv",
]


@dataclass(frozen=True)
class BandPower:
    """Integrated power in a band, with and without the input field."""

    band: tuple
    with_input: float
    background: float = 0.0

    def __post_init__(self):
        if self.with_input < 0.0 or self.background < 0.0:
            raise ValueError("band powers must be non-negative")


def integrate_band_power(spectrum: SpectrumRecord, band: tuple) -> float:
    """Sum of per-bin power over ``band`` (rad/s, inclusive)."""
    lo, hi = band
    if lo >= hi:
        raise ValueError("band must be (low, high) with low < high")
    freqs = spectrum.frequencies
    if lo < freqs[0] - spectrum.resolution or hi > freqs[-1] + spectrum.resolution:
        raise RangeError(
            f"band [{lo:.4e}, {hi:.4e}] rad/s outside spectrum support "
            f"[{freqs[0]:.4e}, {freqs[-1]:.4e}]"
        )
    mask = (freqs >= lo) & (freqs <= hi)
    return float(np.sum(spectrum.psd[mask]))


def duty_cycle(train: PulseTrainSpec, convention: str = "fwhm") -> float:
    """Pulse duty cycle tau_p * rep_rate.

    ``fwhm`` treats the pulse as a top-hat of the FWHM duration (the usual
    bookkeeping); ``effective`` uses the energy-equivalent rectangle width
    instead (FWHM divided by the shape's peak factor).
    """
    if convention == "fwhm":
        return train.tau_p * train.rep_rate
    if convention == "effective":
        return train.tau_p * train.rep_rate / train.shape_factor
    raise ValueError(f"unknown duty-cycle convention {convention!r}")


def _check_estimate(eta: float, name: str) -> float:
    if eta > 1.0 or eta < 0.0:
        warnings.warn(
            f"{name} estimate {eta:.4g} outside [0, 1]; check bands and duty cycle",
            EstimatorRangeWarning,
            stacklevel=3,
        )
    return eta


def eta_up(
    p_sr: BandPower,
    p_t: BandPower,
    duty: float,
    omega_t: float,
    omega_sr: float,
) -> float:
    """Internal up-conversion efficiency normalized to mean photon number."""
    if p_t.with_input <= 0.0:
        raise ValueError("input band power must be positive")
    if duty <= 0.0:
        raise ValueError("duty cycle must be positive")
    eta = (p_sr.with_input - p_sr.background) * omega_t / (p_t.with_input * duty * omega_sr)
    return _check_estimate(eta, "eta_up")


def eta_down(
    p_t: BandPower,
    p_sr: BandPower,
    duty: float,
    omega_sr: float,
    omega_t: float,
) -> float:
    """Internal down-conversion efficiency; mirror of ``eta_up``."""
    if p_sr.with_input <= 0.0:
        raise ValueError("input band power must be positive")
    if duty <= 0.0:
        raise ValueError("duty cycle must be positive")
    eta = (p_t.with_input - p_t.background) * omega_sr / (p_sr.with_input * duty * omega_t)
    return _check_estimate(eta, "eta_down")


def half_crossings(x: np.ndarray, y: np.ndarray, i_peak: int, level: float):
    """Linear-interpolated crossings of ``level`` on both sides of a peak.

    Returns (left, right); either is None when the curve never falls below
    the level on that side.
    """
    left = None
    for i in range(i_peak, 0, -1):
        if y[i - 1] < level <= y[i]:
            frac = (level - y[i - 1]) / (y[i] - y[i - 1])
            left = x[i - 1] + frac * (x[i] - x[i - 1])
            break
    right = None
    for i in range(i_peak, len(y) - 1):
        if y[i + 1] < level <= y[i]:
            frac = (y[i] - level) / (y[i] - y[i + 1])
            right = x[i] + frac * (x[i + 1] - x[i])
            break
    return left, right


def fwhm(spectrum: SpectrumRecord, around: float, search_halfwidth: float | None = None) -> float:
    """Full width at half maximum (rad/s) of the peak nearest ``around``.

    The peak is the psd maximum inside the search window; crossings of half
    that maximum are located by linear interpolation.  Raises
    ``PeakNotFoundError`` when no usable peak exists (flat spectrum, or the
    half level is never crossed inside the record).
    """
    freqs = spectrum.frequencies
    psd = spectrum.psd
    if search_halfwidth is None:
        mask = np.ones(len(freqs), dtype=bool)
    else:
        mask = np.abs(freqs - around) <= search_halfwidth
        if not np.any(mask):
            raise PeakNotFoundError("search window contains no spectrum samples")
    idx = np.flatnonzero(mask)
    i_peak = idx[int(np.argmax(psd[idx]))]
    peak = psd[i_peak]
    if peak <= 0.0:
        raise PeakNotFoundError("no positive peak in the search window")
    left, right = half_crossings(freqs, psd, int(i_peak), peak / 2.0)
    if left is None or right is None:
        raise PeakNotFoundError(
            "half-maximum level never crossed; spectrum is flat or the peak "
            "is clipped by the record edge"
        )
    return float(right - left)


def db_contrast(spectrum: SpectrumRecord, band_a: tuple, band_b: tuple) -> float:
    """Power ratio of two bands in decibels: 10*log10(P_a/P_b)."""
    p_a = integrate_band_power(spectrum, band_a)
    p_b = integrate_band_power(spectrum, band_b)
    if p_a <= 0.0 or p_b <= 0.0:
        raise ValueError("both band powers must be positive for a dB contrast")
    return 10.0 * math.log10(p_a / p_b)


def osa_smooth(
    spectrum: SpectrumRecord,
    resolution_wavelength: float,
    at_wavelength: float | None = None,
) -> SpectrumRecord:
    """Emulate a spectrum analyser by moving-average convolution.

    ``resolution_wavelength`` is the instrument resolution in metres; the
    equivalent frequency width is evaluated at ``at_wavelength`` (default:
    the record's centre frequency).
    """
    freqs = spectrum.frequencies
    if at_wavelength is None:
        w_center = 0.5 * (freqs[0] + freqs[-1])
    else:
        w_center = TWO_PI_C / at_wavelength
    width = TWO_PI_C * resolution_wavelength / (TWO_PI_C / w_center) ** 2
    n_bins = max(1, int(round(width / spectrum.resolution)))
    # The kernel cannot usefully exceed the record itself.
    n_bins = min(n_bins, len(freqs) - (1 - len(freqs) % 2))
    if n_bins % 2 == 0:
        n_bins += 1
    kernel = np.full(n_bins, 1.0 / n_bins)
    smoothed = np.convolve(spectrum.psd, kernel, mode="same") * n_bins
    # Keep per-bin normalization: each output bin is the average of its
    # neighbourhood times the bin count, i.e. total power is preserved for
    # spectra compact within the record.
    smoothed /= n_bins
    scale = spectrum.total_power() / np.sum(smoothed) if np.sum(smoothed) > 0 else 1.0
    return SpectrumRecord(
        frequencies=freqs,
        psd=smoothed * scale,
        resolution=max(spectrum.resolution, width),
    )


def write_spectrum_csv(spectrum: SpectrumRecord, path) -> None:
    """Write a spectrum as wavelength/dBm rows; see ``read_spectrum_csv``."""
    freqs = spectrum.frequencies
    lam_c = TWO_PI_C / (0.5 * (freqs[0] + freqs[-1]))
    res_nm = spectrum.resolution * lam_c**2 / TWO_PI_C * 1e9
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"wavelength_nm,psd_dbm_per_bin,resolution_nm={res_nm:.9g}\n")
        for w, p in zip(freqs[::-1], spectrum.psd[::-1]):
            dbm = 10.0 * math.log10(p / 1e-3) if p > 0.0 else -300.0
            f.write(f"{TWO_PI_C / w * 1e9:.9g},{dbm:.9g}\n")


def read_spectrum_csv(path) -> SpectrumRecord:
    """Read the two-column wavelength_nm / psd_dBm_per_bin format.

    The header line carries the resolution: ``wavelength_nm,
    psd_dbm_per_bin,resolution_nm=<value>``.
    """
    with open(path, "r", encoding="utf-8") as f:
        header = f.readline().strip()
        if "resolution_nm=" not in header:
            raise ValueError("header must declare resolution_nm=<value>")
        res_nm = float(header.split("resolution_nm=")[1])
        rows = [(float(a), float(b)) for a, b in csv.reader(f)]
    if not rows:
        raise ValueError("spectrum file has no data rows")
    lam = np.array([r[0] for r in rows]) * 1e-9
    psd = 1e-3 * 10.0 ** (np.array([r[1] for r in rows]) / 10.0)
    freqs = TWO_PI_C / lam
    order = np.argsort(freqs)
    lam_c = TWO_PI_C / (0.5 * (freqs.min() + freqs.max()))
    resolution = TWO_PI_C * res_nm * 1e-9 / lam_c**2
    return SpectrumRecord(frequencies=freqs[order], psd=psd[order], resolution=resolution)
