"""Exact truncated power series in the nome ``q = exp(2 pi i tau)``.

Coefficients are :class:`fractions.Fraction`, so every identity between
Eisenstein series can be checked coefficient by coefficient with no
rounding.  Floating point only enters through :func:`evaluate`.
"""

from __future__ import annotations

import cmath
import math
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence, Union

Scalar = Union[int, Fraction]

DEFAULT_ORDER = 64


class QSeries:
    """Power series ``sum_{n=0}^{order} c_n q^n`` known up to ``O(q^{order+1})``.

    Instances are immutable.  Binary operations truncate to the smaller of
    the two orders, so nothing is ever extrapolated past what is known.
    """

    __slots__ = ("_coeffs",)

    def __init__(self, coeffs: Iterable[Scalar], order: int | None = None):
        cs = tuple(Fraction(c) for c in coeffs)
        if order is not None:
            if order < 0:
                raise ValueError("order must be non-negative")
            if len(cs) < order + 1:
                cs = cs + (Fraction(0),) * (order + 1 - len(cs))
            cs = cs[: order + 1]
        if not cs:
            raise ValueError("a series needs at least the constant coefficient")
        self._coeffs = cs

    @classmethod
    def constant(cls, value: Scalar, order: int) -> "QSeries":
        return cls([value], order)

    @classmethod
    def monomial(cls, power: int, order: int, coeff: Scalar = 1) -> "QSeries":
        cs = [0] * (order + 1)
        if power <= order:
            cs[power] = coeff
        return cls(cs)

    @property
    def coeffs(self) -> tuple[Fraction, ...]:
        return self._coeffs

    @property
    def order(self) -> int:
        return len(self._coeffs) - 1

    def __getitem__(self, n: int) -> Fraction:
        return self._coeffs[n]

    def __len__(self) -> int:
        return len(self._coeffs)

    def __repr__(self) -> str:
        head = ", ".join(str(c) for c in self._coeffs[:6])
        tail = ", ..." if self.order > 5 else ""
        return f"QSeries([{head}{tail}], order={self.order})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, QSeries):
            return NotImplemented
        return self._coeffs == other._coeffs

    def __hash__(self) -> int:
        return hash(self._coeffs)

    def truncate(self, order: int) -> "QSeries":
        if order > self.order:
            raise ValueError(f"cannot extend a series of order {self.order} to {order}")
        return QSeries(self._coeffs[: order + 1])

    def is_zero(self) -> bool:
        return not any(self._coeffs)

    def _coerce(self, other) -> "QSeries":
        if isinstance(other, QSeries):
            return other
        if isinstance(other, (int, Fraction)):
            return QSeries.constant(other, self.order)
        raise TypeError(f"cannot combine QSeries with {type(other).__name__}")

    def __add__(self, other) -> "QSeries":
        other = self._coerce(other)
        n = min(self.order, other.order)
        return QSeries(a + b for a, b in zip(self._coeffs[: n + 1], other._coeffs[: n + 1]))

    __radd__ = __add__

    def __neg__(self) -> "QSeries":
        return QSeries(-c for c in self._coeffs)

    def __sub__(self, other) -> "QSeries":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "QSeries":
        return self._coerce(other) - self

    def __mul__(self, other) -> "QSeries":
        if isinstance(other, (int, Fraction)):
            return scale(self, other)
        other = self._coerce(other)
        n = min(self.order, other.order)
        a, b = self._coeffs, other._coeffs
        out = []
        for k in range(n + 1):
            out.append(sum((a[i] * b[k - i] for i in range(k + 1)), Fraction(0)))
        return QSeries(out)

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> "QSeries":
        if not isinstance(exponent, int) or exponent < 0:
            raise ValueError("only non-negative integer powers are supported")
        result = QSeries.constant(1, self.order)
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result


def add(a: QSeries, b) -> QSeries:
    return a + b


def sub(a: QSeries, b) -> QSeries:
    return a - b


def mul(a: QSeries, b) -> QSeries:
    return a * b


def scale(a: QSeries, c: Scalar) -> QSeries:
    c = Fraction(c)
    return QSeries(c * x for x in a.coeffs)


def sigma(k: int, n: int) -> int:
    """Sum of the ``k``-th powers of the positive divisors of ``n``."""
    if n < 1:
        raise ValueError(f"sigma needs n >= 1, got {n}")
    if k < 1:
        raise ValueError(f"sigma needs k >= 1, got {k}")
    total = 0
    d = 1
    while d * d <= n:
        if n % d == 0:
            total += d**k
            e = n // d
            if e != d:
                total += e**k
        d += 1
    return total


_EISENSTEIN = {2: (-24, 1), 4: (240, 3), 6: (-504, 5)}


@lru_cache(maxsize=None)
def eisenstein(weight: int, order: int = DEFAULT_ORDER) -> QSeries:
    """Normalized Eisenstein series ``E_2``, ``E_4`` or ``E_6`` up to ``q^order``.

    >>> eisenstein(2, 2).coeffs
    (Fraction(1, 1), Fraction(-24, 1), Fraction(-72, 1))
    """
    if weight not in _EISENSTEIN:
        raise ValueError(f"unsupported weight {weight}; expected one of 2, 4, 6")
    if order < 0:
        raise ValueError("order must be non-negative")
    c, k = _EISENSTEIN[weight]
    return QSeries([1] + [c * sigma(k, n) for n in range(1, order + 1)])


def derive_q(s: QSeries) -> QSeries:
    """Modular derivative ``D = q d/dq``, i.e. ``(1/2 pi i) d/dtau``."""
    return QSeries(n * c for n, c in enumerate(s.coeffs))


@lru_cache(maxsize=256)
def _float_coeffs(s: QSeries) -> tuple[float, ...]:
    return tuple(float(c) for c in reversed(s.coeffs))


def evaluate(s: QSeries, tau) -> tuple[complex, float]:
    """Evaluate ``s`` at ``q = exp(2 pi i tau)``.

    Returns the value and a geometric tail estimate
    ``|a_N| |q|^{N+1} / (1 - |q|)`` built from the last retained coefficient.
    ``tau`` may also be a numpy array, in which case arrays are returned.
    """
    try:
        import numpy as np
    except ImportError:  # pragma: no cover
        np = None
    if np is not None and isinstance(tau, np.ndarray):
        if np.any(tau.imag <= 0):
            raise ValueError("tau must lie in the upper half-plane")
        q = np.exp(2j * np.pi * tau)
        acc = np.zeros_like(q)
        for c in _float_coeffs(s):
            acc = acc * q + c
        aq = np.abs(q)
        tail = abs(float(s.coeffs[-1])) * aq ** (s.order + 1) / (1 - aq)
        return acc, tail
    tau = complex(tau)
    if tau.imag <= 0:
        raise ValueError(f"tau={tau} is not in the upper half-plane")
    q = cmath.exp(2j * math.pi * tau)
    acc = 0j
    for c in _float_coeffs(s):
        acc = acc * q + c
    aq = abs(q)
    tail = abs(float(s.coeffs[-1])) * aq ** (s.order + 1) / (1 - aq)
    return acc, tail


def evaluate_value(s: QSeries, tau) -> complex:
    return evaluate(s, tau)[0]


def to_rows(s: QSeries) -> list[tuple[int, int, int]]:
    """``(n, numerator, denominator)`` rows, the CSV dump layout."""
    return [(n, c.numerator, c.denominator) for n, c in enumerate(s.coeffs)]


def from_rows(rows: Sequence[Sequence[int]]) -> QSeries:
    rows = sorted(rows, key=lambda r: r[0])
    if [r[0] for r in rows] != list(range(len(rows))):
        raise ValueError("rows must cover n = 0..N without gaps")
    return QSeries(Fraction(num, den) for _, num, den in rows)


# -- identities checked exactly ------------------------------------------------


def ramanujan_residuals(order: int = DEFAULT_ORDER) -> tuple[QSeries, QSeries, QSeries]:
    """Residual series of the three Ramanujan relations; all zero when they hold."""
    E2, E4, E6 = (eisenstein(w, order) for w in (2, 4, 6))
    return (
        12 * derive_q(E2) - (E2 * E2 - E4),
        3 * derive_q(E4) - (E2 * E4 - E6),
        2 * derive_q(E6) - (E2 * E6 - E4 * E4),
    )


def chazy_residual(order: int = DEFAULT_ORDER) -> QSeries:
    """Residual of the Chazy equation for ``gamma = (pi i / 3) E_2`` with constants cleared.

    With ``d/dtau = 2 pi i D`` we have ``gamma^(k) = (pi i/3)(2 pi i)^k D^k E_2``.
    Substituting into ``gamma''' = 6 gamma gamma'' - 9 gamma'^2`` and dividing by
    ``(pi i / 3)(2 pi i)^2`` leaves
    ``2 pi i D^3 E_2 = 2 pi i E_2 D^2 E_2 - 3 pi i (D E_2)^2``; a final division by
    ``pi i`` gives the rational identity ``2 D^3 E_2 = 2 E_2 D^2 E_2 - 3 (D E_2)^2``.
    """
    E2 = eisenstein(2, order)
    d1 = derive_q(E2)
    d2 = derive_q(d1)
    d3 = derive_q(d2)
    return 2 * d3 - (2 * E2 * d2 - 3 * d1 * d1)
