"""Split-step envelope propagation for the seeded-FWM stage.

Symmetric split-step Fourier integration of the nonlinear envelope
equation: the full dispersion operator exp(-i*(beta(w) - beta0 - beta1*W)*h)
acts spectrally, the Kerr rotation exp(-i*gamma*|A|^2*h) temporally.  Step
size adapts by step doubling against a relative local-error target.  One
broadband grid carries pump, both sidebands, and the vacuum-noise floor
simultaneously, so no cross-envelope bookkeeping is needed.

Monte Carlo ensembles rerun the propagation with fresh vacuum noise and
pump-energy jitter; every run derives its random stream from
(rng_seed, run_index), making results reproducible and independent of how
runs are distributed over workers.
"""

from __future__ import annotations

import hashlib
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.fft as _fft

from . import _kernels
from .core import (
    HBAR,
    FieldEnvelope,
    PulseTrainSpec,
    SpectrumRecord,
    TemporalGrid,
    cw_field,
    pulse_from_train,
    to_spectrum,
    wavelength_to_omega,
)
from .errors import AliasingError, RangeError, StiffnessError
from .fiber import GEOMETRY_WAVELENGTH_RANGE, FiberSpec, beta, beta1
from .metrics import integrate_band_power

# Fraction of bins (per side, around the Nyquist fold) watched by the
# spectral-edge aliasing guard.
EDGE_FRACTION = 1.0 / 32.0


@dataclass(frozen=True)
class PropagationConfig:
    """Knobs of one split-step propagation."""

    fiber: FiberSpec
    grid: TemporalGrid
    dz_initial: float | None = None
    error_target: float = 1e-7
    include_vacuum_noise: bool = False
    noise_model: str = "photon"
    rng_seed: int = 0
    aliasing_threshold: float = 1e-6

    def __post_init__(self):
        if self.dz_initial is not None and not (0.0 < self.dz_initial <= self.fiber.length):
            raise ValueError("dz_initial must lie in (0, fiber.length]")
        if not (1e-12 < self.error_target < 1e-2):
            raise ValueError("error_target must lie in (1e-12, 1e-2)")
        if self.noise_model not in ("photon", "half_photon"):
            raise ValueError(f"unknown noise model {self.noise_model!r}")
        if not (0.0 < self.aliasing_threshold < 1.0):
            raise ValueError("aliasing_threshold must lie in (0, 1)")


def dispersion_phase(fiber: FiberSpec, grid: TemporalGrid) -> np.ndarray:
    """Moving-frame dispersion operator D(W) = beta(w0+W) - beta0 - beta1*W.

    For the geometry backend, bins outside the model's validity window get
    a linear extrapolation from the window edge; those bins are only ever
    populated below the aliasing guard, and a linear phase creates no power.
    """
    w0 = grid.carrier
    w_abs = grid.omega_abs
    if fiber.dispersion_backend == "taylor":
        b = beta(fiber, w_abs)
        b0 = beta(fiber, w0)
        b1 = beta1(fiber, w0)
    else:
        lo = wavelength_to_omega(GEOMETRY_WAVELENGTH_RANGE[1])
        hi = wavelength_to_omega(GEOMETRY_WAVELENGTH_RANGE[0])
        margin = 2.0 * math.pi * 20e9  # keep finite differences inside range
        w_lo, w_hi = lo + margin, hi - margin
        if not (w_lo < w0 < w_hi):
            raise RangeError("grid carrier outside geometry model range")
        w_clip = np.clip(w_abs, w_lo, w_hi)
        b = np.asarray(beta(fiber, w_clip), dtype=float)
        below = w_abs < w_lo
        above = w_abs > w_hi
        if np.any(below):
            b[below] += beta1(fiber, w_lo) * (w_abs[below] - w_lo)
        if np.any(above):
            b[above] += beta1(fiber, w_hi) * (w_abs[above] - w_hi)
        b0 = beta(fiber, w0)
        b1 = beta1(fiber, w0)
    return b - b0 - b1 * grid.omega_rel


class _SplitStepper:
    """One propagation session: cached phasors, fused step primitives."""

    def __init__(self, fiber: FiberSpec, grid: TemporalGrid):
        self.gamma = fiber.gamma
        self.loss = fiber.loss
        self.disp = dispersion_phase(fiber, grid)
        self.n_edge = max(1, int(grid.n_points * EDGE_FRACTION))
        self._phasors: dict[float, np.ndarray] = {}

    def half_phasor(self, h: float) -> np.ndarray:
        phasor = self._phasors.get(h)
        if phasor is None:
            phasor = np.exp((-1j * self.disp - 0.5 * self.loss) * (0.5 * h))
            self._phasors[h] = phasor
        return phasor

    def step(self, a: np.ndarray, h: float):
        """Symmetric step D(h/2) N(h) D(h/2); returns (field, final spectrum)."""
        phasor = self.half_phasor(h)
        spec = _fft.fft(a)
        spec *= phasor
        a = _fft.ifft(spec, overwrite_x=True)
        _kernels.kerr_phase(a, self.gamma * h)
        spec = _fft.fft(a, overwrite_x=True)
        spec *= phasor
        return _fft.ifft(spec), spec


def propagate(field: FieldEnvelope, cfg: PropagationConfig) -> FieldEnvelope:
    """Propagate an envelope through the configured fiber span.

    Raises ``AliasingError`` when more than ``aliasing_threshold`` of the
    power reaches the spectral grid edges, and ``StiffnessError`` when the
    adaptive step underflows.
    """
    grid = field.grid
    if grid != cfg.grid:
        raise ValueError("field grid does not match the propagation config grid")
    stepper = _SplitStepper(cfg.fiber, grid)
    length = cfg.fiber.length

    a = field.samples.astype(np.complex128, copy=True)
    spec0 = _fft.fft(a)
    _check_edges(spec0, stepper.n_edge, cfg.aliasing_threshold, 0.0)

    z = 0.0
    h = cfg.dz_initial if cfg.dz_initial is not None else length / 200.0
    h = min(h, length)
    target = cfg.error_target
    min_h = length * 1e-14

    while z < length * (1.0 - 1e-12):
        h = min(h, length - z)
        coarse, _ = stepper.step(a, h)
        mid, _ = stepper.step(a, h / 2.0)
        fine, spec = stepper.step(mid, h / 2.0)
        power = _kernels.total_power(fine)
        err = math.sqrt(_kernels.l2_diff(coarse, fine) / power) if power > 0.0 else 0.0
        if err <= target:
            a = fine
            z += h
            _check_edges(spec, stepper.n_edge, cfg.aliasing_threshold, z)
            if err < target / 16.0:
                h *= 2.0
        else:
            h /= 2.0
            if h < min_h:
                raise StiffnessError(
                    f"step size underflow at z = {z:.4g} m "
                    f"(h = {h:.3g} m, local error {err:.3g} > target {target:.3g})"
                )
    return FieldEnvelope(grid=grid, samples=a)


def _check_edges(spectrum: np.ndarray, n_edge: int, threshold: float, z: float) -> None:
    total = _kernels.total_power(spectrum)
    if total == 0.0:
        return
    frac = _kernels.edge_power(spectrum, n_edge) / total
    if frac > threshold:
        raise AliasingError(
            f"spectral edge bins hold {frac:.2e} of total power at z = {z:.4g} m "
            f"(threshold {threshold:.1e}); enlarge the grid span or bandwidth"
        )


def vacuum_noise_field(grid: TemporalGrid, rng: np.random.Generator, model: str = "photon") -> np.ndarray:
    """Time-domain noise samples seeding spontaneous mixing.

    ``photon`` places one photon of energy per spectral mode with uniformly
    random phase; ``half_photon`` draws complex Gaussian amplitudes with
    half-photon variance per mode.  Bins at non-positive absolute frequency
    (possible on very wide grids) carry no noise.
    """
    w = np.maximum(grid.omega_abs, 0.0)
    scale = np.sqrt(HBAR * w * grid.n_points / grid.dt)
    if model == "photon":
        spec = scale * np.exp(2j * math.pi * rng.random(grid.n_points))
    elif model == "half_photon":
        g = rng.standard_normal(grid.n_points) + 1j * rng.standard_normal(grid.n_points)
        spec = 0.5 * scale * g
    else:
        raise ValueError(f"unknown noise model {model!r}")
    return np.fft.ifft(spec)


def _initial_field(
    pump: PulseTrainSpec,
    seed_power: float,
    seed_wavelength: float,
    cfg: PropagationConfig,
    rng: np.random.Generator | None,
    pump_energy_scale: float,
) -> FieldEnvelope:
    grid = cfg.grid
    seed_offset = wavelength_to_omega(seed_wavelength) - grid.carrier
    if abs(seed_offset) >= abs(grid.omega_rel).max():
        raise RangeError(
            f"seed wavelength {seed_wavelength * 1e9:.1f} nm falls outside the "
            f"grid bandwidth"
        )
    samples = pulse_from_train(grid, pump, energy_scale=pump_energy_scale).samples.copy()
    if seed_power > 0.0:
        samples += cw_field(grid, seed_power, seed_offset).samples
    if cfg.include_vacuum_noise:
        if rng is None:
            rng = np.random.default_rng(np.random.SeedSequence(cfg.rng_seed))
        samples += vacuum_noise_field(grid, rng, cfg.noise_model)
    return FieldEnvelope(grid=grid, samples=samples)


def seeded_fwm_run(
    pump: PulseTrainSpec,
    seed_power: float,
    seed_wavelength: float,
    cfg: PropagationConfig,
    *,
    rng: np.random.Generator | None = None,
    pump_energy_scale: float = 1.0,
) -> SpectrumRecord:
    """One pump pulse plus CW seed through the fiber; returns the spectrum."""
    field = _initial_field(pump, seed_power, seed_wavelength, cfg, rng, pump_energy_scale)
    return to_spectrum(propagate(field, cfg))


@dataclass(frozen=True)
class EnsembleStats:
    """Per-pulse energies of a Monte Carlo ensemble and their statistics."""

    energies: np.ndarray
    mean: float
    fractional_std: float
    histogram_edges: np.ndarray
    histogram_counts: np.ndarray
    manifest: dict

    def __post_init__(self):
        e = np.asarray(self.energies, dtype=float)
        e.flags.writeable = False
        object.__setattr__(self, "energies", e)


def fractional_std(energies) -> float:
    """Population standard deviation divided by the mean."""
    e = np.asarray(energies, dtype=float)
    if e.size == 0:
        raise ValueError("energies must be non-empty")
    mean = float(np.mean(e))
    if mean == 0.0:
        raise ValueError("mean energy is zero; fractional deviation undefined")
    return float(np.std(e) / mean)


def _config_hash(pump, seed_power, seed_wavelength, cfg, band) -> str:
    fiber = cfg.fiber
    parts = [
        repr(pump),
        repr(seed_power),
        repr(seed_wavelength),
        repr((fiber.length, fiber.gamma, fiber.loss, fiber.dispersion_backend,
              fiber.pitch, fiber.hole_diameter,
              fiber.taylor.beta_coeffs if fiber.taylor else None,
              fiber.taylor.omega_ref if fiber.taylor else None)),
        repr((cfg.grid.n_points, cfg.grid.span, cfg.grid.carrier)),
        repr((cfg.dz_initial, cfg.error_target, cfg.include_vacuum_noise,
              cfg.noise_model, cfg.aliasing_threshold)),
        repr(band),
    ]
    return hashlib.sha256("|".join(parts).encode()).hexdigest()[:16]


def _ensemble_run(args) -> float:
    pump, seed_power, seed_wavelength, cfg, band, jitter, index = args
    rng = np.random.default_rng(np.random.SeedSequence((cfg.rng_seed, index)))
    scale = max(0.0, 1.0 + jitter * float(rng.standard_normal())) if jitter > 0.0 else 1.0
    spectrum = seeded_fwm_run(
        pump, seed_power, seed_wavelength, cfg, rng=rng, pump_energy_scale=scale
    )
    return integrate_band_power(spectrum, band)


def ensemble(
    pump: PulseTrainSpec,
    seed_power: float,
    seed_wavelength: float,
    cfg: PropagationConfig,
    n_runs: int,
    pump_amplitude_jitter: float = 0.014,
    *,
    band: tuple | None = None,
    band_halfwidth: float = 2.0 * math.pi * 2.0e12,
    n_workers: int = 1,
) -> EnsembleStats:
    """Monte Carlo ensemble of seeded-FWM runs; sideband-energy statistics.

    Each run draws fresh vacuum noise (when enabled) and a Gaussian
    pump-energy jitter of the given fractional standard deviation, then
    integrates the spectrum over ``band`` (default: +-band_halfwidth around
    the seed wavelength, where the stimulated sideband forms).  Histogram
    binning follows the Freedman-Diaconis rule, fixed once per ensemble.
    """
    if n_runs < 100:
        raise ValueError("ensembles need n_runs >= 100 for stable statistics")
    if pump_amplitude_jitter < 0.0:
        raise ValueError("pump_amplitude_jitter must be non-negative")
    if band is None:
        w_seed = wavelength_to_omega(seed_wavelength)
        band = (w_seed - band_halfwidth, w_seed + band_halfwidth)

    args = [
        (pump, seed_power, seed_wavelength, cfg, band, pump_amplitude_jitter, i)
        for i in range(n_runs)
    ]
    if n_workers > 1:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            energies = np.fromiter(
                pool.map(_ensemble_run, args, chunksize=max(1, n_runs // (8 * n_workers))),
                dtype=float,
                count=n_runs,
            )
    else:
        energies = np.fromiter((_ensemble_run(a) for a in args), dtype=float, count=n_runs)

    counts, edges = np.histogram(energies, bins="fd")
    manifest = {
        "rng_seed": cfg.rng_seed,
        "n_runs": n_runs,
        "pump_amplitude_jitter": pump_amplitude_jitter,
        "band_rad_s": [band[0], band[1]],
        "config_hash": _config_hash(pump, seed_power, seed_wavelength, cfg, band),
    }
    return EnsembleStats(
        energies=energies,
        mean=float(np.mean(energies)),
        fractional_std=fractional_std(energies),
        histogram_edges=edges,
        histogram_counts=counts,
        manifest=manifest,
    )
