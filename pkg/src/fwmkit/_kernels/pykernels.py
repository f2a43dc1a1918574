"""Pure-numpy implementations of the hot inner-loop kernels.

Semantics must match ``_ckernels`` exactly; the parity test compares both
backends element by element.
"""

import numpy as np


def kerr_phase(a: np.ndarray, g: float) -> None:
    """In-place self-phase rotation: a *= exp(-1j * g * |a|^2)."""
    a *= np.exp((-1j * g) * (a.real * a.real + a.imag * a.imag))


def total_power(a: np.ndarray) -> float:
    """Sum of |a|^2 over the array."""
    return float(np.vdot(a, a).real)


def l2_diff(a: np.ndarray, b: np.ndarray) -> float:
    """Sum of |a - b|^2 over the arrays."""
    d = a - b
    return float(np.vdot(d, d).real)


def edge_power(spectrum: np.ndarray, n_edge: int) -> float:
    """Sum of |X|^2 over the n_edge highest-|frequency| FFT bins per side.

    ``spectrum`` is in FFT ordering, so the spectral edges sit around the
    middle of the array.
    """
    n = spectrum.shape[0]
    half = n // 2
    sl = spectrum[half - n_edge : half + n_edge]
    return float(np.vdot(sl, sl).real)
