# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled inner-loop kernels for the split-step propagator.

These fuse the elementwise passes that the numpy fallback spreads over
several temporaries; see ``pykernels`` for the reference semantics.
"""

from libc.math cimport cos, sin


def kerr_phase(double complex[::1] a, double g):
    """In-place self-phase rotation: a *= exp(-1j * g * |a|^2)."""
    cdef Py_ssize_t i, n = a.shape[0]
    cdef double re, im, p, c, s
    for i in range(n):
        re = a[i].real
        im = a[i].imag
        p = -g * (re * re + im * im)
        c = cos(p)
        s = sin(p)
        a[i] = (re * c - im * s) + 1j * (re * s + im * c)


def total_power(double complex[::1] a):
    """Sum of |a|^2 over the array."""
    cdef Py_ssize_t i, n = a.shape[0]
    cdef double acc = 0.0, re, im
    for i in range(n):
        re = a[i].real
        im = a[i].imag
        acc += re * re + im * im
    return acc


def l2_diff(double complex[::1] a, double complex[::1] b):
    """Sum of |a - b|^2 over the arrays."""
    cdef Py_ssize_t i, n = a.shape[0]
    if b.shape[0] != n:
        raise ValueError("arrays must have equal length")
    cdef double acc = 0.0, re, im
    for i in range(n):
        re = a[i].real - b[i].real
        im = a[i].imag - b[i].imag
        acc += re * re + im * im
    return acc


def edge_power(double complex[::1] spectrum, Py_ssize_t n_edge):
    """Sum of |X|^2 over the n_edge highest-|frequency| FFT bins per side."""
    cdef Py_ssize_t n = spectrum.shape[0]
    cdef Py_ssize_t half = n // 2
    cdef Py_ssize_t i
    cdef double acc = 0.0, re, im
    for i in range(half - n_edge, half + n_edge):
        re = spectrum[i].real
        im = spectrum[i].imag
        acc += re * re + im * im
    return acc
