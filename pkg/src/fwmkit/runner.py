"""Scenario execution: turns a parsed config into result files and a manifest.

Every output file is deterministic for a fixed config and seed (floats are
formatted explicitly, no timestamps outside the manifest), is listed in the
manifest with a content hash, and the process exit code is zero iff every
selected scenario succeeded.
"""

from __future__ import annotations

import hashlib
import json
import math
import time
from pathlib import Path

import numpy as np

from . import __version__, coupled, metrics, phasematch, propagation
from .config import Config, Scenario
from .core import (
    C_LIGHT,
    HBAR,
    SHAPE_PEAK_FACTORS,
    TWO_PI_C,
    PulseTrainSpec,
    SpectrumRecord,
    TemporalGrid,
    omega_to_wavelength,
    wavelength_to_omega,
)
from .fiber import SILICA_SELLMEIER_B, SILICA_SELLMEIER_C_UM2
from .kinematics import ConversionSetup

DEFAULT_GRID_POINTS = 2**13
DEFAULT_GRID_SPAN = 30e-12


def _sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    h.update(path.read_bytes())
    return h.hexdigest()


def _write_json(path: Path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")


def _scaled_train(train: PulseTrainSpec, avg_power: float) -> PulseTrainSpec:
    return PulseTrainSpec(
        tau_p=train.tau_p,
        rep_rate=train.rep_rate,
        avg_power=avg_power,
        center=train.center,
        shape=train.shape,
        chirp=train.chirp,
    )


class ScenarioContext:
    """Shared registries plus per-scenario output bookkeeping."""

    def __init__(self, config: Config, out_dir: Path, seed_override: int | None):
        self.config = config
        self.out_dir = out_dir
        self.seed_override = seed_override
        self.outputs: list[Path] = []

    def grid_for(self, params: dict, carrier: float) -> TemporalGrid:
        if "grid_n_points" in params or "grid_span_ps" in params:
            return TemporalGrid(
                n_points=int(params.get("grid_n_points", DEFAULT_GRID_POINTS)),
                span=float(params.get("grid_span_ps", DEFAULT_GRID_SPAN * 1e12)) * 1e-12,
                carrier=carrier,
            )
        if self.config.grid is not None:
            g = self.config.grid
            return TemporalGrid(n_points=g.n_points, span=g.span, carrier=carrier)
        return TemporalGrid(n_points=DEFAULT_GRID_POINTS, span=DEFAULT_GRID_SPAN, carrier=carrier)

    def seed_for(self, params: dict) -> int:
        if self.seed_override is not None:
            return self.seed_override
        return int(params.get("rng_seed", 0))

    def emit(self, path: Path) -> Path:
        self.outputs.append(path)
        return path


def _setup_from_params(ctx: ScenarioContext, params: dict, fiber):
    """Build the stage-2 conversion setup shared by scan/sweep scenarios."""
    pump_from = wavelength_to_omega(float(params["pump_from_nm"]) * 1e-9)
    pump_to = wavelength_to_omega(float(params["pump_to_nm"]) * 1e-9)
    p_from = float(params.get("pump_from_peak_W", 0.0))
    p_to = float(params.get("pump_to_peak_W", 0.0))
    input_omega = wavelength_to_omega(float(params["input_nm"]) * 1e-9)
    return ConversionSetup.from_bs(input_omega, pump_from, pump_to, p_from, p_to, fiber)


def run_phase_match_scan(ctx: ScenarioContext, sc: Scenario, sc_dir: Path) -> dict:
    params = sc.parameters
    fiber = ctx.config.fibers[params["fiber"]]
    center = float(params["scan_center_nm"]) * 1e-9
    halfwidth = float(params["scan_halfwidth_nm"]) * 1e-9
    n_points = int(params.get("n_points", 201))
    params = dict(params, input_nm=params["scan_center_nm"])
    setup = _setup_from_params(ctx, params, fiber)

    curve = phasematch.bandwidth_curve(
        setup, (center - halfwidth, center + halfwidth), n_points
    )
    csv_path = ctx.emit(sc_dir / "bandwidth_curve.csv")
    curve.write_csv(csv_path)

    matched_nm = None
    try:
        matched = phasematch.find_matched_input(
            fiber,
            setup.pump_from,
            setup.pump_to,
            setup.power_from,
            setup.power_to,
            (center - halfwidth, center + halfwidth),
        )
        matched_nm = matched * 1e9
    except Exception:
        pass
    summary = {
        "center_nm": curve.center * 1e9,
        "fwhm_nm": curve.fwhm * 1e9 if not math.isnan(curve.fwhm) else None,
        "matched_input_nm": matched_nm,
    }
    _write_json(ctx.emit(sc_dir / "summary.json"), summary)
    return summary


def _sweep_trains(ctx: ScenarioContext, params: dict):
    train_short = ctx.config.pulsed_sources[params["pump_short"]]
    train_long = ctx.config.pulsed_sources[params["pump_long"]]
    if "pump_short_avg_mw" in params:
        train_short = _scaled_train(train_short, float(params["pump_short_avg_mw"]) * 1e-3)
    if "pump_long_avg_mw" in params:
        train_long = _scaled_train(train_long, float(params["pump_long_avg_mw"]) * 1e-3)
    return train_short, train_long


def _sweep_setup(ctx: ScenarioContext, params: dict, fiber, train_short, train_long):
    input_src = ctx.config.cw_sources[params["input"]]
    direction_to_short = bool(params.get("convert_toward_short_pump", True))
    if direction_to_short:
        pump_from, pump_to = train_long.center, train_short.center
        p_from, p_to = train_long.peak_power, train_short.peak_power
    else:
        pump_from, pump_to = train_short.center, train_long.center
        p_from, p_to = train_short.peak_power, train_long.peak_power
    return (
        ConversionSetup.from_bs(input_src.center, pump_from, pump_to, p_from, p_to, fiber),
        input_src,
    )


def run_power_sweep(ctx: ScenarioContext, sc: Scenario, sc_dir: Path) -> dict:
    params = sc.parameters
    fiber = ctx.config.fibers[params["fiber"]]
    train_short, train_long = _sweep_trains(ctx, params)
    setup, input_src = _sweep_setup(ctx, params, fiber, train_short, train_long)
    axis = params.get("axis", "pump_short_power")
    powers = np.asarray([float(p) * 1e-3 for p in params["powers_mw"]])
    sweep = coupled.sweep_efficiency(
        setup, axis, powers, train_short, train_long, input_src.power
    )
    csv_path = ctx.emit(sc_dir / "efficiency_vs_power.csv")
    sweep.write_csv(csv_path, abscissa_label="avg_power_W")

    # Least-squares line through the sweep; residual relative to max eta.
    coeff = np.polyfit(sweep.abscissa, sweep.eta, 1)
    resid = sweep.eta - np.polyval(coeff, sweep.abscissa)
    summary = {
        "kind": sweep.kind,
        "slope_per_W": float(coeff[0]),
        "intercept": float(coeff[1]),
        "max_eta": float(np.max(sweep.eta)),
        "max_residual_over_max_eta": float(np.max(np.abs(resid)) / max(np.max(sweep.eta), 1e-300)),
    }
    _write_json(ctx.emit(sc_dir / "summary.json"), summary)
    return summary


def run_wavelength_sweep(ctx: ScenarioContext, sc: Scenario, sc_dir: Path) -> dict:
    params = sc.parameters
    fiber = ctx.config.fibers[params["fiber"]]
    train_short, train_long = _sweep_trains(ctx, params)
    setup, input_src = _sweep_setup(ctx, params, fiber, train_short, train_long)
    center = float(params["scan_center_nm"]) * 1e-9
    halfwidth = float(params["scan_halfwidth_nm"]) * 1e-9
    n_points = int(params.get("n_points", 101))
    lams = np.linspace(center - halfwidth, center + halfwidth, n_points)
    sweep = coupled.sweep_efficiency(
        setup, "input_wavelength", lams, train_short, train_long, input_src.power
    )
    csv_path = ctx.emit(sc_dir / "efficiency_vs_wavelength.csv")
    sweep.write_csv(csv_path, abscissa_label="input_wavelength_m")
    i_max = int(np.argmax(sweep.eta))
    summary = {
        "kind": sweep.kind,
        "peak_input_nm": float(lams[i_max] * 1e9),
        "peak_eta": float(sweep.eta[i_max]),
    }
    _write_json(ctx.emit(sc_dir / "summary.json"), summary)
    return summary


def _ensemble_csvs(ctx: ScenarioContext, sc_dir: Path, tag: str, stats) -> None:
    with open(ctx.emit(sc_dir / f"{tag}_energies.csv"), "w", encoding="utf-8") as f:
        f.write("run_index,energy_J\n")
        for i, e in enumerate(stats.energies):
            f.write(f"{i},{e:.17g}\n")
    with open(ctx.emit(sc_dir / f"{tag}_histogram.csv"), "w", encoding="utf-8") as f:
        f.write("bin_low_J,bin_high_J,count\n")
        for lo, hi, c in zip(
            stats.histogram_edges[:-1], stats.histogram_edges[1:], stats.histogram_counts
        ):
            f.write(f"{lo:.17g},{hi:.17g},{int(c)}\n")


def run_noise_ensemble(ctx: ScenarioContext, sc: Scenario, sc_dir: Path) -> dict:
    params = sc.parameters
    fiber = ctx.config.fibers[params["fiber"]]
    pump = ctx.config.pulsed_sources[params["pump"]]
    if "pump_avg_mw" in params:
        pump = _scaled_train(pump, float(params["pump_avg_mw"]) * 1e-3)
    seed_src = ctx.config.cw_sources[params["seed"]]
    seed_powers = [float(p) * 1e-3 for p in params.get("seed_powers_mw", [seed_src.power * 1e3])]
    seed_wavelength = omega_to_wavelength(seed_src.center)
    n_runs = int(params.get("n_runs", 200))
    runs_per_point = params.get("n_runs_per_point")
    jitter = float(params.get("pump_jitter", 0.014))
    rng_seed = ctx.seed_for(params)

    grid = ctx.grid_for(params, pump.center)
    cfg = propagation.PropagationConfig(
        fiber=fiber,
        grid=grid,
        error_target=float(params.get("error_target", 1e-4)),
        include_vacuum_noise=bool(params.get("vacuum_noise", True)),
        noise_model=params.get("noise_model", "photon"),
        rng_seed=rng_seed,
    )
    hw = 2.0 * math.pi * float(params.get("band_halfwidth_thz", 2.0)) * 1e12

    results = []
    for i, sp in enumerate(seed_powers):
        n = int(runs_per_point[i]) if runs_per_point is not None else n_runs
        stats = propagation.ensemble(
            pump, sp, seed_wavelength, cfg, n, jitter, band_halfwidth=hw,
            n_workers=int(params.get("n_workers", 1)),
        )
        tag = f"seed_{sp * 1e3:g}mW".replace(".", "p")
        _ensemble_csvs(ctx, sc_dir, tag, stats)
        results.append(
            {
                "seed_power_mW": sp * 1e3,
                "n_runs": n,
                "mean_energy_J": stats.mean,
                "fractional_std": stats.fractional_std,
                "manifest": stats.manifest,
            }
        )
    summary = {"points": results, "rng_seed": rng_seed, "pump_jitter": jitter}
    _write_json(ctx.emit(sc_dir / "summary.json"), summary)
    return summary


def _line_spectrum(freq_axis, centers, widths, powers):
    """Gaussian lines with given integrated powers on a fixed axis."""
    psd = np.zeros_like(freq_axis)
    df = freq_axis[1] - freq_axis[0]
    for c, w, p in zip(centers, widths, powers):
        sigma = max(w, df) / 2.3548200450309493
        line = np.exp(-0.5 * ((freq_axis - c) / sigma) ** 2)
        total = np.sum(line)
        if total > 0.0:
            psd += p * line / total
    return psd


def run_two_stage_chain(ctx: ScenarioContext, sc: Scenario, sc_dir: Path) -> dict:
    """Seeded FWM in stage 1 feeds the BS conversion in stage 2.

    The simulated sideband of stage 1 becomes the long-wavelength pump of
    stage 2 (power and center frequency measured from the stage-1 spectrum);
    the conversion is then swept and the photon-normalized estimators are
    applied to assembled output spectra with the instrument-resolution model.
    """
    params = sc.parameters
    fiber1 = ctx.config.fibers[params["stage1_fiber"]]
    fiber2 = ctx.config.fibers[params["stage2_fiber"]]
    pump1 = ctx.config.pulsed_sources[params["stage1_pump"]]
    seed_src = ctx.config.cw_sources[params["stage1_seed"]]
    input_src = ctx.config.cw_sources[params["input"]]
    rng_seed = ctx.seed_for(params)

    # Stage 1: seeded FWM.
    grid = ctx.grid_for(params, pump1.center)
    cfg = propagation.PropagationConfig(
        fiber=fiber1,
        grid=grid,
        error_target=float(params.get("error_target", 3e-5)),
        include_vacuum_noise=bool(params.get("vacuum_noise", True)),
        rng_seed=rng_seed,
    )
    seed_wavelength = omega_to_wavelength(seed_src.center)
    spectrum1 = propagation.seeded_fwm_run(pump1, seed_src.power, seed_wavelength, cfg)
    metrics.write_spectrum_csv(spectrum1, ctx.emit(sc_dir / "stage1_spectrum.csv"))

    hw = 2.0 * math.pi * float(params.get("band_halfwidth_thz", 2.0)) * 1e12
    band = (seed_src.center - hw, seed_src.center + hw)
    idler_energy = metrics.integrate_band_power(spectrum1, band)
    idler_avg_power = idler_energy * pump1.rep_rate
    mask = (spectrum1.frequencies >= band[0]) & (spectrum1.frequencies <= band[1])
    idler_center = float(
        spectrum1.frequencies[mask][int(np.argmax(spectrum1.psd[mask]))]
    )

    # Stage 2: the stage-1 sideband pumps the BS conversion.
    pump2_avg = float(params.get("stage2_pump_avg_mw", 180.0)) * 1e-3
    train_short = _scaled_train(
        ctx.config.pulsed_sources[params.get("stage2_pump", params["stage1_pump"])], pump2_avg
    )
    train_long = PulseTrainSpec(
        tau_p=pump1.tau_p,
        rep_rate=pump1.rep_rate,
        avg_power=idler_avg_power,
        center=idler_center,
        shape=pump1.shape,
    )
    convert_up = params.get("direction", "up") == "up"
    if convert_up:
        pump_from, p_from = train_long.center, train_long.peak_power
        pump_to, p_to = train_short.center, train_short.peak_power
    else:
        pump_from, p_from = train_short.center, train_short.peak_power
        pump_to, p_to = train_long.center, train_long.peak_power
    setup = ConversionSetup.from_bs(
        input_src.center, pump_from, pump_to, p_from, p_to, fiber2
    )
    predicted_out = setup.output_omega

    # Efficiency at the operating point plus a short wavelength sweep.
    eta_internal = coupled.pulsed_efficiency(setup, train_short, train_long, input_src.power)
    scan_hw = float(params.get("scan_halfwidth_nm", 2.0)) * 1e-9
    lam_in = omega_to_wavelength(input_src.center)
    lams = np.linspace(lam_in - scan_hw, lam_in + scan_hw, int(params.get("n_points", 81)))
    sweep = coupled.sweep_efficiency(
        setup, "input_wavelength", lams, train_short, train_long, input_src.power
    )
    sweep.write_csv(ctx.emit(sc_dir / "stage2_sweep.csv"), abscissa_label="input_wavelength_m")

    # Assemble output spectra (with input / input blocked), smear with the
    # instrument resolution, and verify the converted peak location.
    duty = metrics.duty_cycle(train_short)
    p_converted = (
        eta_internal * input_src.power * duty * predicted_out / input_src.center
    )
    lam_lo = min(omega_to_wavelength(predicted_out), lam_in) * 0.9
    lam_hi = max(omega_to_wavelength(predicted_out), lam_in) * 1.1
    axis = np.linspace(TWO_PI_C / lam_hi, TWO_PI_C / lam_lo, 20001)
    pump_width = 2.0 * math.pi * 0.44 / pump1.tau_p
    background = float(params.get("background_w", 1e-12))
    blocked_psd = _line_spectrum(
        axis,
        [train_short.center, idler_center, predicted_out],
        [pump_width, pump_width, pump_width],
        [train_short.avg_power, idler_avg_power, background],
    )
    with_input_psd = blocked_psd + _line_spectrum(
        axis,
        [input_src.center, predicted_out],
        [0.0, pump_width * math.sqrt(2.0)],
        [input_src.power, p_converted],
    )
    resolution_nm = float(params.get("osa_resolution_nm", 2.0))
    rec_with = metrics.osa_smooth(
        SpectrumRecord(axis, with_input_psd, axis[1] - axis[0]),
        resolution_nm * 1e-9,
        at_wavelength=omega_to_wavelength(predicted_out),
    )
    rec_blocked = metrics.osa_smooth(
        SpectrumRecord(axis, blocked_psd, axis[1] - axis[0]),
        resolution_nm * 1e-9,
        at_wavelength=omega_to_wavelength(predicted_out),
    )
    metrics.write_spectrum_csv(rec_with, ctx.emit(sc_dir / "stage2_output_spectrum.csv"))
    metrics.write_spectrum_csv(rec_blocked, ctx.emit(sc_dir / "stage2_background_spectrum.csv"))

    # Peak of the converted band on the smoothed record.
    out_hw = 2.0 * math.pi * 5e12
    m = (rec_with.frequencies >= predicted_out - out_hw) & (
        rec_with.frequencies <= predicted_out + out_hw
    )
    peak_omega = float(rec_with.frequencies[m][int(np.argmax(rec_with.psd[m]))])
    peak_nm = omega_to_wavelength(peak_omega) * 1e9
    predicted_nm = omega_to_wavelength(predicted_out) * 1e9

    conv_band = (predicted_out - out_hw, predicted_out + out_hw)
    in_band = (input_src.center - out_hw, input_src.center + out_hw)
    p_sr = metrics.BandPower(
        conv_band,
        metrics.integrate_band_power(rec_with, conv_band),
        metrics.integrate_band_power(rec_blocked, conv_band),
    )
    p_t = metrics.BandPower(in_band, metrics.integrate_band_power(rec_with, in_band))
    if convert_up:
        eta_est = metrics.eta_up(p_sr, p_t, duty, input_src.center, predicted_out)
    else:
        eta_est = metrics.eta_down(p_sr, p_t, duty, predicted_out, input_src.center)

    summary = {
        "stage1_idler_avg_power_mW": idler_avg_power * 1e3,
        "stage1_idler_center_nm": omega_to_wavelength(idler_center) * 1e9,
        "predicted_output_nm": predicted_nm,
        "converted_peak_nm": peak_nm,
        "peak_error_nm": abs(peak_nm - predicted_nm),
        "osa_resolution_nm": resolution_nm,
        "eta_internal_model": eta_internal,
        "eta_internal_estimated": eta_est,
        "sweep_peak_input_nm": float(lams[int(np.argmax(sweep.eta))] * 1e9),
        "rng_seed": rng_seed,
    }
    _write_json(ctx.emit(sc_dir / "summary.json"), summary)
    return summary


def run_estimate_efficiency(ctx: ScenarioContext, sc: Scenario, sc_dir: Path) -> dict:
    """Apply the photon-normalized estimators to spectra read from CSV."""
    params = sc.parameters
    with_input = metrics.read_spectrum_csv(Path(params["with_input_csv"]))
    blocked = metrics.read_spectrum_csv(Path(params["background_csv"]))

    def band_of(prefix):
        center = wavelength_to_omega(float(params[f"{prefix}_center_nm"]) * 1e-9)
        hw = 2.0 * math.pi * float(params.get(f"{prefix}_halfwidth_thz", 1.0)) * 1e12
        return (center - hw, center + hw), center

    sr_band, omega_sr = band_of("sr")
    t_band, omega_t = band_of("t")
    duty = float(params["duty_cycle"])
    direction = params.get("direction", "up")
    if direction == "up":
        p_sr = metrics.BandPower(
            sr_band,
            metrics.integrate_band_power(with_input, sr_band),
            metrics.integrate_band_power(blocked, sr_band),
        )
        p_t = metrics.BandPower(t_band, metrics.integrate_band_power(with_input, t_band))
        eta = metrics.eta_up(p_sr, p_t, duty, omega_t, omega_sr)
    else:
        p_t = metrics.BandPower(
            t_band,
            metrics.integrate_band_power(with_input, t_band),
            metrics.integrate_band_power(blocked, t_band),
        )
        p_sr = metrics.BandPower(sr_band, metrics.integrate_band_power(with_input, sr_band))
        eta = metrics.eta_down(p_t, p_sr, duty, omega_sr, omega_t)
    summary = {"direction": direction, "eta": eta, "duty_cycle": duty}
    _write_json(ctx.emit(sc_dir / "summary.json"), summary)
    return summary


_RUNNERS = {
    "PhaseMatchScan": run_phase_match_scan,
    "PowerSweep": run_power_sweep,
    "WavelengthSweep": run_wavelength_sweep,
    "NoiseEnsemble": run_noise_ensemble,
    "TwoStageChain": run_two_stage_chain,
    "EstimateEfficiency": run_estimate_efficiency,
}


def run_scenarios(
    config: Config,
    out_dir,
    *,
    scenario_filter: str | None = None,
    seed_override: int | None = None,
    config_path: str = "<inline>",
) -> dict:
    """Run selected scenarios; write outputs and the run manifest.

    Returns the manifest dict; overall success is ``manifest["ok"]``.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    selected = [
        sc for sc in config.scenarios
        if scenario_filter is None or sc.name == scenario_filter
    ]
    if scenario_filter is not None and not selected:
        raise KeyError(f"no scenario named {scenario_filter!r} in the config")

    entries = []
    t_start = time.time()
    all_ok = True
    for sc in selected:
        ctx = ScenarioContext(config, out_dir, seed_override)
        sc_dir = out_dir / sc.name
        sc_dir.mkdir(parents=True, exist_ok=True)
        entry = {"name": sc.name, "kind": sc.kind}
        try:
            summary = _RUNNERS[sc.kind](ctx, sc, sc_dir)
            entry["status"] = "ok"
            entry["summary"] = summary
        except Exception as exc:
            all_ok = False
            entry["status"] = "error"
            entry["error"] = {"type": type(exc).__name__, "message": str(exc)}
        entry["outputs"] = [
            {"path": str(p.relative_to(out_dir)), "sha256": _sha256_file(p)}
            for p in ctx.outputs
        ]
        entries.append(entry)

    manifest = {
        "toolkit_version": __version__,
        "config_path": str(config_path),
        "config_sha256": hashlib.sha256(config.raw_text.encode()).hexdigest(),
        "seed_override": seed_override,
        "wall_clock_s": time.time() - t_start,
        "scenarios": entries,
        "ok": all_ok,
        "constants": {
            "c_m_per_s": C_LIGHT,
            "hbar_J_s": HBAR,
            "silica_sellmeier_B": list(SILICA_SELLMEIER_B),
            "silica_sellmeier_C_um2": list(SILICA_SELLMEIER_C_UM2),
            "pulse_shape_peak_factors": SHAPE_PEAK_FACTORS,
        },
    }
    _write_json(out_dir / "manifest.json", manifest)
    return manifest
