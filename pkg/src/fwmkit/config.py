"""Scenario config parsing and validation.

One TOML file drives everything: fiber definitions (with optional
calibration blocks), light sources, a default simulation grid, and a list
of named scenarios.  ``parse_config`` resolves all cross-references and
enforces the physical invariants of the referenced types at parse time, so
a config that parses cleanly will construct valid domain objects.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

try:
    import tomllib  # Python >= 3.11
except ModuleNotFoundError:  # pragma: no cover - depends on interpreter
    import tomli as tomllib

from .core import PulseTrainSpec, TemporalGrid, wavelength_to_omega
from .errors import ConfigError
from .fiber import (
    FiberSpec,
    GroupDelayTarget,
    PhaseMatchTarget,
    calibrate_taylor_from_targets,
)

SCENARIO_KINDS = (
    "PhaseMatchScan",
    "PowerSweep",
    "WavelengthSweep",
    "NoiseEnsemble",
    "TwoStageChain",
    "EstimateEfficiency",
)


@dataclass(frozen=True)
class CwSource:
    center: float  # rad/s
    power: float  # W


@dataclass(frozen=True)
class Scenario:
    name: str
    kind: str
    parameters: dict


@dataclass(frozen=True)
class Config:
    title: str
    grid: TemporalGrid | None
    fibers: dict
    pulsed_sources: dict
    cw_sources: dict
    scenarios: tuple
    raw_text: str


def _require(table: dict, key: str, context: str):
    if key not in table:
        raise ConfigError(f"{context}: missing required key {key!r}")
    return table[key]


def _build_fiber(name: str, table: dict) -> FiberSpec:
    ctx = f"fibers.{name}"
    backend = _require(table, "dispersion", ctx)
    length = float(_require(table, "length_m", ctx))
    gamma = float(_require(table, "gamma_per_W_m", ctx))
    loss = float(table.get("loss_per_m", 0.0))
    try:
        if backend == "geometry":
            spec = FiberSpec.geometry(
                pitch=float(_require(table, "pitch_um", ctx)) * 1e-6,
                hole_diameter=float(_require(table, "hole_diameter_um", ctx)) * 1e-6,
                length=length,
                gamma=gamma,
                loss=loss,
            )
        elif backend == "taylor":
            spec = FiberSpec.from_taylor(
                omega_ref=float(_require(table, "omega_ref_rad_s", ctx)),
                beta_coeffs=[float(c) for c in _require(table, "beta_coeffs", ctx)],
                length=length,
                gamma=gamma,
                loss=loss,
            )
        else:
            raise ConfigError(f"{ctx}: unknown dispersion backend {backend!r}")
    except ValueError as exc:
        raise ConfigError(f"{ctx}: {exc}") from exc

    cal = table.get("calibration")
    if cal is not None:
        spec = _calibrate_fiber(ctx, spec, cal)
    return spec


def _calibrate_fiber(ctx: str, spec: FiberSpec, cal: dict) -> FiberSpec:
    targets = []
    for i, t in enumerate(cal.get("targets", [])):
        tctx = f"{ctx}.calibration.targets[{i}]"
        process = _require(t, "process", tctx)
        wavelengths = tuple(float(x) * 1e-9 for x in _require(t, "wavelengths_nm", tctx))
        powers = tuple(float(x) for x in t.get("pump_peak_powers_W", ()))
        length = float(t["length_m"]) if "length_m" in t else None
        try:
            targets.append(
                PhaseMatchTarget(
                    process=process,
                    wavelengths=wavelengths,
                    pump_peak_powers=powers,
                    length=length,
                )
            )
        except ValueError as exc:
            raise ConfigError(f"{tctx}: {exc}") from exc
    gd_targets = []
    for i, g in enumerate(cal.get("group_delay_targets", [])):
        gctx = f"{ctx}.calibration.group_delay_targets[{i}]"
        gd_targets.append(
            GroupDelayTarget(
                lambda_a=float(_require(g, "wavelength_a_nm", gctx)) * 1e-9,
                lambda_b=float(_require(g, "wavelength_b_nm", gctx)) * 1e-9,
                beta1_difference=float(_require(g, "beta1_difference_ps_per_m", gctx)) * 1e-12,
            )
        )
    if not targets:
        raise ConfigError(f"{ctx}.calibration: at least one target is required")
    kwargs: dict[str, Any] = {}
    if "fit_band_nm" in cal:
        lo, hi = cal["fit_band_nm"]
        kwargs["fit_band"] = (float(lo) * 1e-9, float(hi) * 1e-9)
    if "fit_degree" in cal:
        kwargs["fit_degree"] = int(cal["fit_degree"])
    if "adjust_orders" in cal:
        kwargs["adjust_orders"] = tuple(int(k) for k in cal["adjust_orders"])
    try:
        return calibrate_taylor_from_targets(
            spec, targets, group_delay_targets=tuple(gd_targets), **kwargs
        )
    except Exception as exc:
        raise ConfigError(f"{ctx}.calibration: {exc}") from exc


def _build_sources(tables: dict):
    pulsed, cw = {}, {}
    for name, t in tables.items():
        ctx = f"sources.{name}"
        kind = _require(t, "kind", ctx)
        center = wavelength_to_omega(float(_require(t, "center_nm", ctx)) * 1e-9)
        try:
            if kind == "pulsed":
                pulsed[name] = PulseTrainSpec(
                    tau_p=float(_require(t, "tau_fwhm_ps", ctx)) * 1e-12,
                    rep_rate=float(_require(t, "rep_rate_mhz", ctx)) * 1e6,
                    avg_power=float(_require(t, "avg_power_mw", ctx)) * 1e-3,
                    center=center,
                    shape=t.get("shape", "gaussian"),
                    chirp=float(t.get("chirp", 0.0)),
                )
            elif kind == "cw":
                power = float(_require(t, "power_mw", ctx)) * 1e-3
                if power < 0.0:
                    raise ValueError("power_mw must be non-negative")
                cw[name] = CwSource(center=center, power=power)
            else:
                raise ConfigError(f"{ctx}: unknown source kind {kind!r}")
        except ValueError as exc:
            raise ConfigError(f"{ctx}: {exc}") from exc
    return pulsed, cw


_SCENARIO_REFS = {
    # key in scenario table -> which registry it must resolve in
    "fiber": "fibers",
    "stage1_fiber": "fibers",
    "stage2_fiber": "fibers",
    "pump": "pulsed",
    "pump_short": "pulsed",
    "pump_long": "pulsed",
    "stage1_pump": "pulsed",
    "stage2_pump": "pulsed",
    "seed": "cw",
    "stage1_seed": "cw",
    "input": "cw",
}


def _validate_scenario(sc: dict, index: int, fibers, pulsed, cw) -> Scenario:
    ctx = f"scenarios[{index}]"
    name = _require(sc, "name", ctx)
    kind = _require(sc, "kind", ctx)
    if kind not in SCENARIO_KINDS:
        raise ConfigError(f"{ctx}: unknown scenario kind {kind!r} "
                          f"(expected one of {', '.join(SCENARIO_KINDS)})")
    registries = {"fibers": fibers, "pulsed": pulsed, "cw": cw}
    for key, registry in _SCENARIO_REFS.items():
        if key in sc:
            ref = sc[key]
            if ref not in registries[registry]:
                raise ConfigError(
                    f"{ctx} ({name}): {key} references undefined {registry[:-1]} {ref!r}"
                )
    params = {k: v for k, v in sc.items() if k not in ("name", "kind")}
    return Scenario(name=name, kind=kind, parameters=params)


def parse_config(text: str) -> Config:
    """Parse and validate a scenario config from TOML text.

    Raises ``ConfigError`` carrying line/column information for syntax
    errors and the failing reference or invariant for semantic errors.
    """
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config syntax error: {exc}") from exc

    grid = None
    if "grid" in data:
        g = data["grid"]
        try:
            grid = TemporalGrid(
                n_points=int(_require(g, "n_points", "grid")),
                span=float(_require(g, "span_ps", "grid")) * 1e-12,
                carrier=wavelength_to_omega(float(_require(g, "carrier_nm", "grid")) * 1e-9),
            )
        except ValueError as exc:
            raise ConfigError(f"grid: {exc}") from exc

    fibers = {name: _build_fiber(name, t) for name, t in data.get("fibers", {}).items()}
    pulsed, cw = _build_sources(data.get("sources", {}))

    scenarios = []
    names = set()
    for i, sc in enumerate(data.get("scenarios", [])):
        scenario = _validate_scenario(sc, i, fibers, pulsed, cw)
        if scenario.name in names:
            raise ConfigError(f"duplicate scenario name {scenario.name!r}")
        names.add(scenario.name)
        scenarios.append(scenario)

    return Config(
        title=str(data.get("title", "")),
        grid=grid,
        fibers=fibers,
        pulsed_sources=pulsed,
        cw_sources=cw,
        scenarios=tuple(scenarios),
        raw_text=text,
    )


def load_config(path) -> Config:
    with open(path, "r", encoding="utf-8") as f:
        return parse_config(f.read())
