"""Derivative helpers shared by the verification code.

All routines take holomorphic callables of one complex variable.  Central
differences carry one Richardson step (error ``O(h^4)``); the contour rule
samples a circle and is spectrally accurate for analytic inputs.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np


def central_diff(f: Callable, x: complex, h: float, order: int = 1) -> complex:
    """Richardson-extrapolated central difference of ``f`` at ``x`` (order 1 or 2)."""
    if order == 1:
        def stencil(step):
            return (f(x + step) - f(x - step)) / (2 * step)
    elif order == 2:
        fx = f(x)

        def stencil(step):
            return (f(x + step) - 2 * fx + f(x - step)) / (step * step)
    else:
        raise ValueError("central_diff supports order 1 or 2")
    coarse = stencil(2 * h)
    fine = stencil(h)
    return (4 * fine - coarse) / 3


def default_step(x: complex, base: float = 1e-5) -> float:
    return base * max(1.0, abs(x))


def contour_derivatives(f: Callable, x: complex, n: int, radius: float = 0.1, points: int = 64) -> list:
    """Derivatives ``f(x), f'(x), ..., f^(n)(x)`` from the Cauchy integral.

    ``f`` must be analytic on the closed disc of the given radius around ``x``.
    The trapezoid rule on the circle converges geometrically in ``points``.
    """
    if n >= points:
        raise ValueError("need more sample points than derivatives")
    theta = 2 * np.pi * np.arange(points) / points
    nodes = x + radius * np.exp(1j * theta)
    vals = np.array([f(z) for z in nodes], dtype=complex)
    coeffs = np.fft.fft(vals) / points  # Taylor coefficients times radius**k
    return [complex(coeffs[k]) * math.factorial(k) / radius**k for k in range(n + 1)]


def gradient(f: Callable, point, h: float = 1e-5) -> np.ndarray:
    """Central-difference gradient of a scalar field on ``C^m`` (holomorphic directions)."""
    p = np.asarray(point, dtype=complex)
    out = np.empty(p.size, dtype=complex)
    for i in range(p.size):
        def fi(z, i=i):
            q = p.copy()
            q[i] = z
            return f(q)
        out[i] = central_diff(fi, p[i], h * max(1.0, abs(p[i])))
    return out
