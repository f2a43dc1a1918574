"""Cascaded four-wave-mixing frequency conversion toolkit.

Simulates a single-pump two-stage scheme in photonic crystal fiber: seeded
degenerate FWM generates a second pump, which then drives Bragg-scattering
FWM conversion between a 1092 nm emission line and the telecom C band.
"""

__version__ = "0.1.0"
