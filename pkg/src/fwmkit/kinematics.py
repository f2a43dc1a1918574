"""Energy-conservation algebra for the cascaded conversion scheme.

All arithmetic happens in angular frequency; wavelengths are converted at
the boundary so reciprocal-wavelength rounding never accumulates.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import OpticalFrequency, omega_to_wavelength, wavelength_to_omega
from .fiber import FiberSpec


def degenerate_fwm_partner(pump: float, sideband: float) -> OpticalFrequency:
    """Partner sideband of degenerate four-wave mixing: 2*w_pump - w_sideband.

    The two sidebands are mirror images about the pump; applying this twice
    returns the original sideband exactly.
    """
    if sideband == pump:
        raise ValueError("sideband must differ from the pump frequency")
    partner = 2.0 * pump - sideband
    if partner <= 0.0:
        raise ValueError(f"implied partner frequency is non-positive ({partner:.3e} rad/s)")
    return OpticalFrequency(partner)


def bs_fwm_output(input_omega: float, pump_from: float, pump_to: float) -> OpticalFrequency:
    """Output frequency of Bragg-scattering four-wave mixing.

    The input photon is translated by the pump frequency difference, moving
    from the spectral neighbourhood of ``pump_from`` to that of ``pump_to``:
    w_out = w_in + (w_to - w_from).  Energy conservation then reads
    w_in + w_to = w_out + w_from (a pump photon is absorbed at ``pump_to``
    and emitted at ``pump_from``).
    """
    out = input_omega + (pump_to - pump_from)
    if out <= 0.0:
        raise ValueError(f"implied output frequency is non-positive ({out:.3e} rad/s)")
    return OpticalFrequency(out)


def twm_equivalent_pump(lambda_in: float, lambda_out: float) -> float:
    """Pump wavelength a three-wave process would need for the same shift.

    The pump photon energy must equal the in/out energy difference:
    1/lambda_pump = |1/lambda_in - 1/lambda_out|.  Symmetric in its arguments.
    """
    if lambda_in == lambda_out:
        raise ValueError("input and output wavelengths must differ")
    w_in = wavelength_to_omega(lambda_in)
    w_out = wavelength_to_omega(lambda_out)
    return omega_to_wavelength(abs(w_in - w_out))


@dataclass(frozen=True)
class ConversionSetup:
    """The four interacting frequencies of one BS-FWM conversion in a fiber.

    ``pump_short`` is the shorter-wavelength (higher-frequency) pump.  The
    output is snapped to exact frequency conservation at construction, so
    one of the two conservation branches always holds to float precision.
    """

    pump_short: float
    pump_long: float
    input_omega: float
    output_omega: float
    pump_short_peak_power: float
    pump_long_peak_power: float
    fiber: FiberSpec

    def __post_init__(self):
        if self.pump_short <= self.pump_long:
            raise ValueError("pump_short must be the higher-frequency pump")
        freqs = (self.pump_short, self.pump_long, self.input_omega, self.output_omega)
        if any(f <= 0.0 for f in freqs):
            raise ValueError("all frequencies must be positive")
        if len(set(freqs)) != 4:
            raise ValueError("all four frequencies must be distinct")
        if self.pump_short_peak_power < 0.0 or self.pump_long_peak_power < 0.0:
            raise ValueError("pump powers must be non-negative")
        up = self.input_omega + self.pump_short - self.output_omega - self.pump_long
        down = self.input_omega + self.pump_long - self.output_omega - self.pump_short
        # Float-precision conservation: a few ulps of the largest frequency.
        tol = 32.0 * 2.220446049250313e-16 * self.pump_short
        if abs(up) > tol and abs(down) > tol:
            raise ValueError("frequencies do not satisfy either conservation branch")

    @classmethod
    def from_bs(
        cls,
        input_omega: float,
        pump_from: float,
        pump_to: float,
        power_from: float,
        power_to: float,
        fiber: FiberSpec,
    ) -> "ConversionSetup":
        """Build a setup from the BS in/from/to triple, snapping the output."""
        output = bs_fwm_output(input_omega, pump_from, pump_to)
        if pump_from > pump_to:
            p_short, p_long = pump_from, pump_to
            pw_short, pw_long = power_from, power_to
        else:
            p_short, p_long = pump_to, pump_from
            pw_short, pw_long = power_to, power_from
        return cls(
            pump_short=p_short,
            pump_long=p_long,
            input_omega=input_omega,
            output_omega=output,
            pump_short_peak_power=pw_short,
            pump_long_peak_power=pw_long,
            fiber=fiber,
        )

    @property
    def pump_from(self) -> float:
        """The pump spectrally adjacent to the input field."""
        # w_out - w_in = w_to - w_from identifies the branch.
        if self.output_omega > self.input_omega:
            return self.pump_long
        return self.pump_short

    @property
    def pump_to(self) -> float:
        return self.pump_short if self.output_omega > self.input_omega else self.pump_long

    @property
    def power_from(self) -> float:
        return (
            self.pump_long_peak_power
            if self.output_omega > self.input_omega
            else self.pump_short_peak_power
        )

    @property
    def power_to(self) -> float:
        return (
            self.pump_short_peak_power
            if self.output_omega > self.input_omega
            else self.pump_long_peak_power
        )

    def with_input(self, input_omega: float) -> "ConversionSetup":
        """Same pumps and fiber, retuned input (output re-snapped)."""
        return ConversionSetup.from_bs(
            input_omega,
            self.pump_from,
            self.pump_to,
            self.power_from,
            self.power_to,
            self.fiber,
        )


def detuning(setup: ConversionSetup) -> float:
    """Pump frequency separation |w_short - w_long| in rad/s.

    Equals |w_in - w_out| exactly for a setup built by ``from_bs``.
    """
    return abs(setup.pump_short - setup.pump_long)
