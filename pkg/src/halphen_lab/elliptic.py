"""Genus-one theta functions and the Weierstrass function for the lattice ``Z + tau Z``.

The normalization is fixed throughout: half-periods ``omega1 = 1/2``,
``omega2 = tau/2`` and ``omega3 = omega1 + omega2``.  Other lattices are
handled by homogeneity, see :func:`lattice_e_values`.

Jacobi theta labels follow the characteristic dictionary

    ========  ==============  ==========================
    index     characteristic  series
    ========  ==============  ==========================
    1         [1; 0]          ``2 sum q^{(n+1/2)^2} cos``
    2         [0; 1]          ``1 + 2 sum (-1)^n q^{n^2} cos``
    3         [0; 0]          ``1 + 2 sum q^{n^2} cos``
    4 (odd)   [1; 1]          ``2 sum (-1)^n q^{(n+1/2)^2} sin``
    ========  ==============  ==========================

with ``q = exp(i pi tau)``.  Index 4 is exposed as :func:`theta_odd`.  Note
that the defining characteristic sum gives ``theta[1;1] = -theta_odd``; the
sign is irrelevant for logarithmic derivatives.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from . import qseries

PI = math.pi
MAX_THETA_TERMS = 10_000
MAX_LATTICE_ROWS = 400
POLE_EPS = 1e-12


class ConvergenceError(RuntimeError):
    """A series did not reach its tolerance within the hard iteration cap."""


def _check_tau(tau) -> complex:
    tau = complex(tau)
    if not tau.imag > 0:
        raise ValueError(f"tau={tau} is not in the upper half-plane")
    return tau


@dataclass(frozen=True)
class ModularPoint:
    tau: complex

    def __post_init__(self):
        object.__setattr__(self, "tau", _check_tau(self.tau))

    @property
    def q_theta(self) -> complex:
        """Theta nome ``exp(i pi tau)``."""
        return cmath.exp(1j * PI * self.tau)

    @property
    def q_modular(self) -> complex:
        """Modular nome ``exp(2 i pi tau)``."""
        return cmath.exp(2j * PI * self.tau)

    @property
    def half_periods(self) -> tuple[complex, complex, complex]:
        return half_periods(self.tau)


@dataclass(frozen=True)
class ThetaChar:
    eps: int
    delta: int

    def __post_init__(self):
        if self.eps not in (0, 1) or self.delta not in (0, 1):
            raise ValueError(f"characteristic entries must be 0 or 1, got ({self.eps}, {self.delta})")

    @property
    def parity(self) -> int:
        return (self.eps * self.delta) % 2

    @property
    def is_even(self) -> bool:
        return self.parity == 0

    def __str__(self) -> str:
        return f"[{self.eps};{self.delta}]"


EVEN_CHARS = (ThetaChar(0, 0), ThetaChar(1, 0), ThetaChar(0, 1))
ODD_CHAR = ThetaChar(1, 1)

# jacobi index -> characteristic
JACOBI_CHARS = {1: ThetaChar(1, 0), 2: ThetaChar(0, 1), 3: ThetaChar(0, 0), 4: ThetaChar(1, 1)}


def half_periods(tau) -> tuple[complex, complex, complex]:
    tau = _check_tau(tau)
    return 0.5 + 0j, tau / 2, (1 + tau) / 2


# -- theta functions -----------------------------------------------------------


def theta_char(char: ThetaChar, z, tau, tol: float = 1e-17, derivative: int = 0) -> complex:
    """``theta[eps; delta](z, tau)`` (or its ``derivative``-th z-derivative) from the defining sum.

    The sum ``sum_n exp(i pi (n+a)^2 tau + 2 i pi (n+a)(z+b))`` with ``a = eps/2``,
    ``b = delta/2`` is taken outward from its largest term and stopped on each
    side once the summand bound drops below ``tol`` times the largest summand.
    """
    tau = _check_tau(tau)
    z = complex(z)
    if tol <= 0:
        raise ValueError("tol must be positive")
    a = char.eps / 2
    b = char.delta / 2

    def term(n):
        m = n + a
        w = cmath.exp(1j * PI * m * m * tau + 2j * PI * m * (z + b))
        if derivative:
            w *= (2j * PI * m) ** derivative
        return w

    def bound(n):
        m = n + a
        return math.exp(-PI * tau.imag * m * m - 2 * PI * m * z.imag) * (2 * PI * abs(m) + 1) ** derivative

    center = round(-z.imag / tau.imag - a)
    total = term(center)
    peak = bound(center)
    for direction in (1, -1):
        n = center
        for _ in range(MAX_THETA_TERMS):
            n += direction
            bn = bound(n)
            total += term(n)
            peak = max(peak, bn)
            # past the Gaussian peak the summands shrink faster than geometrically
            if bn < tol * peak and (n - center) * direction > 2:
                break
        else:
            raise ConvergenceError(f"theta series did not converge for tau={tau}")
    return total


def jacobi_theta(k: int, z, tau, derivative: int = 0, tol: float = 1e-17) -> complex:
    """Jacobi theta ``k`` (1..4, see module table) by its cosine/sine series."""
    tau = _check_tau(tau)
    z = complex(z)
    if k not in JACOBI_CHARS:
        raise ValueError(f"jacobi index must be 1..4, got {k}")
    half = k in (1, 4)
    alternating = k in (2, 4)
    trig = cmath.sin if k == 4 else cmath.cos
    phase = derivative * PI / 2

    total = 0j
    if not half and derivative == 0:
        total = 1 + 0j
    start = 0 if half else 1
    peak = 0.0
    for n in range(start, start + MAX_THETA_TERMS):
        m = n + 0.5 if half else n
        freq = 2 * m * PI
        mag = math.exp(-PI * tau.imag * m * m + freq * abs(z.imag)) * (freq + 1) ** derivative
        sign = -1 if alternating and n % 2 else 1
        total += 2 * sign * cmath.exp(1j * PI * tau * m * m) * freq**derivative * trig(freq * z + phase)
        peak = max(peak, mag)
        if mag < tol * peak and m > abs(z.imag) / tau.imag + 1:
            break
    else:
        raise ConvergenceError(f"jacobi theta series did not converge for tau={tau}")
    return total


def theta_odd(z, tau, derivative: int = 0) -> complex:
    """The odd Jacobi theta (index 4, characteristic [1;1] up to sign)."""
    return jacobi_theta(4, z, tau, derivative)


def log_theta_d2(char: ThetaChar, z, tau) -> complex:
    """``d^2/dz^2 log theta[char](z, tau)`` from termwise-differentiated sums."""
    t0 = theta_char(char, z, tau)
    if abs(t0) < 1e-300:
        raise ZeroDivisionError(f"theta{char} vanishes at z={z}")
    t1 = theta_char(char, z, tau, derivative=1)
    t2 = theta_char(char, z, tau, derivative=2)
    return t2 / t0 - (t1 / t0) ** 2


# -- Weierstrass ---------------------------------------------------------------

# 1/sin(y)^2 - 1/y^2 = sum c_k y^(2k)
_CSC2_REGULAR = (
    1 / 3,
    1 / 15,
    2 / 189,
    1 / 675,
    2 / 10395,
    1382 / 58046625,
    4 / 1403325,
    3617 / 10854718875,
    87734 / 2292899734125,
)


def _csc2_row(z: complex) -> complex:
    """``pi^2 / sin(pi z)^2`` via the nome of the half-plane containing ``z``."""
    w = cmath.exp(2j * PI * z) if z.imag >= 0 else cmath.exp(-2j * PI * z)
    return -4 * PI * PI * w / (1 - w) ** 2


def _cot_csc2_row(z: complex) -> complex:
    """``cot(pi z) / sin(pi z)^2`` in the same nome form."""
    if z.imag >= 0:
        w = cmath.exp(2j * PI * z)
        return 4j * w * (1 + w) / (1 - w) ** 3
    w = cmath.exp(-2j * PI * z)
    return -4j * w * (1 + w) / (1 - w) ** 3


def _reduce(u: complex, tau: complex) -> complex:
    n = round(u.imag / tau.imag)
    u = u - n * tau
    return u - round(u.real)


def _check_not_lattice(u: complex, tau: complex) -> None:
    for m in (-1, 0, 1):
        for n in (-1, 0, 1):
            if abs(u - m - n * tau) < POLE_EPS:
                raise ValueError(f"u={u} is (within {POLE_EPS}) a lattice point of (1, tau)")


def _row_count(tau: complex, tol: float) -> int:
    r = math.exp(-2 * PI * tau.imag)
    # each row pair contributes at most 16 pi^2 r^(n-1/2) / (1-r)^2
    const = 16 * PI * PI / ((1 - r) ** 2 * (1 - r)) * r ** (-0.5)
    for n in range(1, MAX_LATTICE_ROWS + 1):
        if const * r ** (n + 1) < tol:
            return n
    raise ConvergenceError(f"lattice sum needs more than {MAX_LATTICE_ROWS} rows at tau={tau}")


def _wp_rows(u: complex, tau: complex, tol: float) -> complex:
    total = 0j
    for n in range(1, _row_count(tau, tol) + 1):
        c = _csc2_row(n * tau)
        total += _csc2_row(u + n * tau) + _csc2_row(u - n * tau) - 2 * c
    return total


def wp(u, tau, tol: float = 1e-16) -> complex:
    """Weierstrass ``p(u)`` for the lattice ``Z + tau Z``.

    Uses the lattice sum with the inner (period-1) direction summed in closed
    form, ``sum_m (u + m)^-2 = pi^2 / sin(pi u)^2``, leaving rows that decay
    like ``|exp(2 pi i tau)|^n``.  The row count is chosen so the tail bound is
    below ``tol``.
    """
    tau = _check_tau(tau)
    u = _reduce(complex(u), tau)
    _check_not_lattice(u, tau)
    main = PI * PI / cmath.sin(PI * u) ** 2 - PI * PI / 3
    return main + _wp_rows(u, tau, tol)


def wp_regular(u, tau, tol: float = 1e-16) -> complex:
    """``p(u) - 1/u^2``, finite at ``u = 0`` (where it vanishes)."""
    tau = _check_tau(tau)
    u = complex(u)
    if abs(u) < 0.05:
        y2 = (PI * u) ** 2
        series = 0j
        for c in reversed(_CSC2_REGULAR):
            series = series * y2 + c
        main = PI * PI * series - PI * PI / 3
        return main + _wp_rows(u, tau, tol)
    return wp(u, tau, tol) - 1 / (u * u)


def wp_prime(u, tau, tol: float = 1e-16) -> complex:
    """Derivative ``p'(u)`` by termwise differentiation of the same row sum."""
    tau = _check_tau(tau)
    u = _reduce(complex(u), tau)
    _check_not_lattice(u, tau)
    total = -2 * PI**3 * cmath.cos(PI * u) / cmath.sin(PI * u) ** 3
    for n in range(1, _row_count(tau, tol) + 1):
        total += -2 * PI**3 * (_cot_csc2_row(u + n * tau) + _cot_csc2_row(u - n * tau))
    return total


# -- constants -----------------------------------------------------------------


@dataclass(frozen=True)
class EllipticConstants:
    """Values at the half-periods and the invariants for ``2 omega1 = 1``, ``2 omega2 = tau``."""

    tau: complex
    e1: complex
    e2: complex
    e3: complex
    g2: complex
    g3: complex
    eta1: complex

    @property
    def e(self) -> tuple[complex, complex, complex]:
        return (self.e1, self.e2, self.e3)

    @property
    def eta1_over_omega1(self) -> complex:
        return 2 * self.eta1


def elliptic_constants(tau, order: int = qseries.DEFAULT_ORDER, tol: float = 1e-16) -> EllipticConstants:
    """``e_k = p(omega_k)`` from the lattice sum; ``g2, g3, eta1`` from Eisenstein series.

    With ``omega1 = 1/2``: ``g2 = (4/3) pi^4 E4``, ``g3 = (8/27) pi^6 E6`` and
    ``eta1 = (pi^2/6) E2``.
    """
    tau = _check_tau(tau)
    es = tuple(wp(w, tau, tol) for w in half_periods(tau))
    E2, E4, E6 = (qseries.evaluate_value(qseries.eisenstein(k, order), tau) for k in (2, 4, 6))
    return EllipticConstants(
        tau=tau,
        e1=es[0],
        e2=es[1],
        e3=es[2],
        g2=4 * PI**4 * E4 / 3,
        g3=8 * PI**6 * E6 / 27,
        eta1=PI * PI * E2 / 6,
    )


def eta1_from_theta(tau) -> complex:
    """``eta1 = -(1/6) theta_odd'''(0) / theta_odd'(0)`` (valid for ``omega1 = 1/2``)."""
    return -theta_odd(0, tau, 3) / theta_odd(0, tau, 1) / 6


def lattice_e_values(omega1, omega2) -> tuple[complex, complex, complex]:
    """``e_k`` for arbitrary half-periods via ``e_k(lambda L) = lambda^-2 e_k(L)``."""
    omega1, omega2 = complex(omega1), complex(omega2)
    tau = omega2 / omega1
    if tau.imag <= 0:
        raise ValueError("omega2/omega1 must lie in the upper half-plane")
    scale = (2 * omega1) ** 2
    return tuple(wp(w, tau) / scale for w in half_periods(tau))


def e_value(k: int, tau) -> complex:
    """``e_k(tau) = p(omega_k)``, holomorphic in ``tau``."""
    tau = _check_tau(tau)
    return wp(half_periods(tau)[k - 1], tau)


def riccati_residuals(tau, order: int = qseries.DEFAULT_ORDER, h: float | None = None) -> tuple[float, float, float]:
    """``|de_k/dtau - (i/pi)(-e_k^2 + (pi^2/3) E2 e_k + (2/9) pi^4 E4)|`` for k = 1, 2, 3."""
    from .numdiff import central_diff, default_step

    tau = _check_tau(tau)
    h = default_step(tau) if h is None else h
    E2, E4 = (qseries.evaluate_value(qseries.eisenstein(k, order), tau) for k in (2, 4))
    out = []
    for k in (1, 2, 3):
        e = e_value(k, tau)
        de = central_diff(lambda t, k=k: e_value(k, t), tau, h)
        rhs = 1j / PI * (-e * e + PI**2 / 3 * E2 * e + 2 * PI**4 / 9 * E4)
        out.append(abs(de - rhs))
    return tuple(out)


def jordan_residual(i: int, u, tau, order: int = qseries.DEFAULT_ORDER) -> float:
    """``|p(u + omega_i) + 2 eta1 + (log theta_i)''(u)|`` with the Jacobi label ``i`` in 1..3."""
    tau = _check_tau(tau)
    u = complex(u)
    eta1 = PI * PI / 6 * qseries.evaluate_value(qseries.eisenstein(2, order), tau)
    lhs = wp(u + half_periods(tau)[i - 1], tau)
    return abs(lhs + 2 * eta1 + log_theta_d2(JACOBI_CHARS[i], u, tau))


def eta1_from_period(tau, nodes: int = 64) -> complex:
    """``eta1 = -(1/2) int_0^1 p(x + i c) dx`` with ``c = Im(tau) / 2`` midway between pole rows."""
    import numpy as np

    tau = _check_tau(tau)
    x, w = np.polynomial.legendre.leggauss(nodes)
    level = 0.5j * tau.imag
    total = sum(wi * wp(0.5 * (xi + 1) + level, tau) for xi, wi in zip(x, w))
    return -0.25 * total
