"""Connections on the upper half-plane and on the torus ``C / (Z + tau Z)``.

Covers the log-derivative bracket and the Schwarzian, the affine
connection ``(pi i / 3) E2`` with its curvature, the Serre derivative, the
genus-one Bergman kernel, Klein bidifferentials and the Wirtinger
projective connections they induce.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from . import elliptic, qseries
from .elliptic import EVEN_CHARS, JACOBI_CHARS, ThetaChar
from .numdiff import contour_derivatives

PI = math.pi

# -- brackets ------------------------------------------------------------------


def _log_derivatives(f: Callable, t, radius: float):
    _, d1, d2, d3 = contour_derivatives(f, complex(t), 3, radius=radius)
    if abs(d1) < 1e-14:
        raise ZeroDivisionError(f"f'(t) vanishes at t={t}")
    return d2 / d1, d3 / d1


def bracket1(f: Callable, t, radius: float = 0.05) -> complex:
    """``{f, t}_1 = (d/dt) log f'``; derivatives come from a Cauchy contour of the given radius."""
    a, _ = _log_derivatives(f, t, radius)
    return a


def schwarzian(f: Callable, t, radius: float = 0.05) -> complex:
    """``{f, t}_2 = (log f')'' - ((log f')')^2 / 2 = f'''/f' - (3/2)(f''/f')^2``."""
    a, b = _log_derivatives(f, t, radius)
    return b - 1.5 * a * a


# -- E2 as an affine connection ------------------------------------------------


def _check_sl2z(m) -> tuple[int, int, int, int]:
    (a, b), (c, d) = m
    if any(int(x) != x for x in (a, b, c, d)):
        raise ValueError("matrix entries must be integers")
    a, b, c, d = (int(x) for x in (a, b, c, d))
    if a * d - b * c != 1:
        raise ValueError("matrix must have determinant 1")
    return a, b, c, d


S = ((0, -1), (1, 0))
T = ((1, 1), (0, 1))


def e2_affine_check(m, tau, order: int = qseries.DEFAULT_ORDER) -> float:
    """``|E2(m tau) (c tau + d)^-2 - E2(tau) - (6 / i pi) c / (c tau + d)|``."""
    a, b, c, d = _check_sl2z(m)
    tau = complex(tau)
    if tau.imag <= 0:
        raise ValueError("tau must lie in the upper half-plane")
    E2 = qseries.eisenstein(2, order)
    j = c * tau + d
    lhs = qseries.evaluate_value(E2, (a * tau + b) / j) / (j * j)
    rhs = qseries.evaluate_value(E2, tau) + 6 / (1j * PI) * c / j
    return abs(lhs - rhs)


def affine_curvature(tau, order: int = qseries.DEFAULT_ORDER) -> complex:
    """``r' - r^2 / 2`` for ``r = (pi i / 3) E2``, derivative in ``tau``."""
    E2 = qseries.eisenstein(2, order)
    r = PI * 1j / 3 * qseries.evaluate_value(E2, tau)
    dr = PI * 1j / 3 * 2j * PI * qseries.evaluate_value(qseries.derive_q(E2), tau)
    return dr - r * r / 2


def curvature_residual(order: int = qseries.DEFAULT_ORDER) -> qseries.QSeries:
    """Exact residual of ``r' - r^2/2 = (pi^2/18) E4`` with constants cleared.

    ``r' = (pi i/3)(2 pi i) D E2 = -(2 pi^2/3) D E2`` and ``r^2 = -(pi^2/9) E2^2``,
    so multiplying through by ``18 / pi^2`` leaves ``-12 D E2 + E2^2 = E4``.
    """
    E2 = qseries.eisenstein(2, order)
    E4 = qseries.eisenstein(4, order)
    return -12 * qseries.derive_q(E2) + E2 * E2 - E4


def serre_derivative(k, s: qseries.QSeries) -> qseries.QSeries:
    """``D s - (k/6) E2 s`` where ``k`` is half the weight."""
    E2 = qseries.eisenstein(2, s.order)
    return qseries.derive_q(s) - Fraction(k) / 6 * E2 * s


def serre_residuals(order: int = qseries.DEFAULT_ORDER) -> tuple[qseries.QSeries, qseries.QSeries]:
    E4, E6 = qseries.eisenstein(4, order), qseries.eisenstein(6, order)
    return (
        serre_derivative(2, E4) + Fraction(1, 3) * E6,
        serre_derivative(3, E6) + Fraction(1, 2) * E4 * E4,
    )


def serre_modularity_residual(tau, order: int = qseries.DEFAULT_ORDER) -> float:
    """``|f(-1/tau) - tau^6 f(tau)|`` for ``f = serre(2, E4)``, relative to ``|tau^6 f(tau)|``."""
    f = serre_derivative(2, qseries.eisenstein(4, order))
    tau = complex(tau)
    expected = tau**6 * qseries.evaluate_value(f, tau)
    return abs(qseries.evaluate_value(f, -1 / tau) - expected) / max(1.0, abs(expected))


# -- bidifferentials -----------------------------------------------------------


@dataclass(frozen=True)
class BidifferentialValue:
    u: complex
    v: complex
    value: complex
    singular: complex
    regular: complex


def eta1_over_omega1(tau, order: int = qseries.DEFAULT_ORDER) -> complex:
    return PI * PI / 3 * qseries.evaluate_value(qseries.eisenstein(2, order), tau)


def _bidifferential(u, v, tau, shift: complex) -> BidifferentialValue:
    u, v = complex(u), complex(v)
    w = u - v
    wp_value = elliptic.wp(w, tau)  # rejects lattice points
    if abs(w) < 0.05:
        regular = elliptic.wp_regular(w, tau) + shift
    else:
        regular = wp_value - 1 / (w * w) + shift
    return BidifferentialValue(u=u, v=v, value=wp_value + shift, singular=1 / (w * w), regular=regular)


def bergman_kernel(u, v, tau, order: int = qseries.DEFAULT_ORDER) -> BidifferentialValue:
    """``K(u, v) = p(u - v) + (pi^2/3) E2(tau)``, split into ``1/(u-v)^2 + H(u, v)``."""
    return _bidifferential(u, v, tau, eta1_over_omega1(tau, order))


def a_period(v, tau, start: float = 0.0, offset: float = 0.1, nodes: int = 64) -> complex:
    """``int K(u, v) du`` over ``u = x + i (Im v + offset)``, ``x`` in ``[start, start + 1]``.

    Gauss-Legendre with ``nodes`` points; the offset keeps the pole off the path.
    """
    v = complex(v)
    x, w = np.polynomial.legendre.leggauss(nodes)
    xs = start + 0.5 * (x + 1)
    level = 1j * (v.imag + offset)
    total = sum(wi * bergman_kernel(xi + level, v, tau).value for xi, wi in zip(xs, w))
    return 0.5 * total


def _require_even(char: ThetaChar, tau) -> complex:
    if not char.is_even:
        raise ValueError(f"characteristic {char} is odd")
    if abs(elliptic.theta_char(char, 0, tau)) < 1e-14:
        raise ValueError(f"theta constant of {char} vanishes at tau={tau}")
    return elliptic.log_theta_d2(char, 0, tau)


def klein_bidifferential(char: ThetaChar, u, v, tau, order: int = qseries.DEFAULT_ORDER) -> BidifferentialValue:
    """Bergman kernel shifted by ``(log theta[char])''(0)``."""
    shift = eta1_over_omega1(tau, order) + _require_even(char, tau)
    return _bidifferential(u, v, tau, shift)


def klein_regular_part(char: ThetaChar, u, v, tau, order: int = qseries.DEFAULT_ORDER) -> complex:
    """``H(u, v)`` of the Klein bidifferential, finite on the diagonal."""
    shift = eta1_over_omega1(tau, order) + _require_even(char, tau)
    return elliptic.wp_regular(complex(u) - complex(v), tau) + shift


def wirtinger_connection(char: ThetaChar, tau, order: int = qseries.DEFAULT_ORDER, at=0.0) -> complex:
    """``6 H(Z, Z)`` for the Klein bidifferential of ``char``."""
    return 6 * klein_regular_part(char, at, at, tau, order)


# Which e_k each even characteristic is paired with.  The first table pairs
# them in the order [0;0], [1;0], [0;1]; the second follows the Jacobi labels
# (theta_i has characteristic JACOBI_CHARS[i] and pairs with e_i).
STATED_PAIRING = {ThetaChar(0, 0): 1, ThetaChar(1, 0): 2, ThetaChar(0, 1): 3}
JACOBI_PAIRING = {JACOBI_CHARS[i]: i for i in (1, 2, 3)}


def wirtinger_errors(tau, pairing=None, order: int = qseries.DEFAULT_ORDER) -> dict[ThetaChar, float]:
    """Error ``|W(char) + 6 e_k| / max(1, |6 e_k|)`` for each even characteristic.

    The floor keeps the measure finite where some ``e_k`` vanishes (``tau = i``).
    """
    pairing = STATED_PAIRING if pairing is None else pairing
    es = elliptic.elliptic_constants(tau, order).e
    out = {}
    for char in EVEN_CHARS:
        target = -6 * es[pairing[char] - 1]
        out[char] = abs(wirtinger_connection(char, tau, order) - target) / max(1.0, abs(target))
    return out


def klein_invariant_connection(tau, order: int = qseries.DEFAULT_ORDER) -> complex:
    """Six times the diagonal finite part of ``K + (1/3)(log theta_1 theta_2 theta_3)''(0)``."""
    avg = sum(elliptic.log_theta_d2(c, 0, tau) for c in EVEN_CHARS) / 3
    return 6 * (elliptic.wp_regular(0, tau) + eta1_over_omega1(tau, order) + avg)


def averaging_residual(tau, order: int = qseries.DEFAULT_ORDER) -> float:
    """``|(1/3) sum (log theta_i)''(0) + eta1/omega1|``."""
    avg = sum(elliptic.log_theta_d2(c, 0, tau) for c in EVEN_CHARS) / 3
    return abs(avg + eta1_over_omega1(tau, order))


def half_period_deviation(i: int, u, tau) -> complex:
    """``p(u) - p(u + omega_i) - (1/u^2 - e_i)``, which is ``O(u^2)``."""
    u = complex(u)
    w = elliptic.half_periods(tau)[i - 1]
    e_i = elliptic.wp(w, tau)
    return elliptic.wp_regular(u, tau) - (elliptic.wp(u + w, tau) - e_i)
