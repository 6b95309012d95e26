"""Vector fields for the Ramanujan, Halphen and Chazy systems and a complex-time integrator.

Each system lives on its own time variable:

=============  =========================  ==================================
system         state                      time
=============  =========================  ==================================
ramanujan      (E2, E4, E6)               ``t = -2 pi i tau``
rescaled       (x, y, z)                  ``t = (4 i / pi) tau``
lifted         (x1, y1, z1, lam)          ``t = (4 i / pi) tau``
halphen        (N1, N2, N3)               ``tau``
chazy          (g, g', g'')               ``tau``
=============  =========================  ==================================

The right-hand sides use plain arithmetic, so they accept ``Fraction``
inputs and return exact results.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import permutations
from typing import Callable, Sequence

import numpy as np

from . import qseries
from .numdiff import central_diff, gradient

PI = math.pi

# -- right-hand sides ----------------------------------------------------------


def ramanujan_rhs(s):
    X, Y, Z = s
    return ((Y - X * X) / 12, (Z - X * Y) / 3, (Y * Y - X * Z) / 2)


def rescaled_rhs(s):
    x, y, z = s
    return (x * x / 2 - y / 24, 2 * x * y - 3 * z, 3 * x * z - y * y / 6)


def halphen_rhs(s):
    n1, n2, n3 = s
    return (
        -n1 * (n2 + n3) + n2 * n3,
        -n2 * (n1 + n3) + n1 * n3,
        -n3 * (n1 + n2) + n1 * n2,
    )


def halphen_x_rhs(s):
    """Halphen system for ``X = -2N``; equivalently ``(X_i + X_j)' = X_i X_j``."""
    x1, x2, x3 = s
    return (
        (x1 * x2 + x1 * x3 - x2 * x3) / 2,
        (x2 * x1 + x2 * x3 - x1 * x3) / 2,
        (x3 * x1 + x3 * x2 - x1 * x2) / 2,
    )


def chazy_rhs(s):
    g, g1, g2 = s
    return (g1, g2, 6 * g * g2 - 9 * g1 * g1)


def hamiltonian_F(s):
    """Contact Hamiltonian ``q1^2 p1 / 2 - p1^2 p2^8 / 48 + 3 q1 q2 p2``.

    Canonical coordinates are ``q1 = x1``, ``q2 = z1``, ``p1 = lam * y1``, ``p2 = lam``.
    """
    x1, y1, z1, lam = s
    q1, q2, p1, p2 = x1, z1, lam * y1, lam
    return q1 * q1 * p1 / 2 - p1 * p1 * p2**8 / 48 + 3 * q1 * q2 * p2


def lifted_rhs(s):
    x1, y1, z1, lam = s
    if lam == 0:
        raise ValueError("the lifted system lives on lam != 0")
    lam9 = lam**9
    return (
        x1 * x1 / 2 - lam9 * y1 / 24,
        2 * x1 * y1 - 3 * z1,
        -lam9 * y1 * y1 / 6 + 3 * x1 * z1,
        -3 * lam * x1,
    )


def to_canonical(s):
    """``(x1, y1, z1, lam) -> (q1, q2, p1, p2)``."""
    x1, y1, z1, lam = s
    return (x1, z1, lam * y1, lam)


def from_canonical(c):
    q1, q2, p1, p2 = c
    return (q1, p1 / p2, q2, p2)


def hamilton_field_fd(s, h: float = 1e-5) -> np.ndarray:
    """Hamiltonian vector field of ``F`` from a finite-difference gradient, in ``(x1, y1, z1, lam)``.

    Uses ``i_X Omega = -dF`` with ``Omega = dp ^ dq``, i.e. ``q' = dF/dp`` and
    ``p' = -dF/dq``; the momentum rates are then pulled back through ``p1 = lam y1``.
    """
    c = np.asarray(to_canonical(s), dtype=complex)

    def F_canon(v):
        return hamiltonian_F(from_canonical(v))

    dq1, dq2, dp1, dp2 = gradient(F_canon, c, h)
    q1dot, q2dot = dp1, dp2
    p1dot, p2dot = -dq1, -dq2
    x1, y1, z1, lam = s
    return np.array([q1dot, (p1dot - p2dot * y1) / lam, q2dot, p2dot])


SYSTEMS: dict[str, Callable] = {
    "ramanujan": ramanujan_rhs,
    "rescaled": rescaled_rhs,
    "halphen": halphen_rhs,
    "halphen_x": halphen_x_rhs,
    "chazy": chazy_rhs,
    "lifted": lifted_rhs,
}

# t = factor * tau
TIME_FACTOR = {
    "ramanujan": -2j * PI,
    "rescaled": 4j / PI,
    "lifted": 4j / PI,
    "halphen": 1.0 + 0j,
    "halphen_x": 1.0 + 0j,
    "chazy": 1.0 + 0j,
}


def tau_to_time(system: str, tau) -> complex:
    return TIME_FACTOR[system] * complex(tau)


def halphen_to_rescaled(X1, X2, X3):
    """Symmetric substitution from Halphen variables ``X_i`` to ``(x, y, z)``."""
    x = (X1 + X2 + X3) / 3
    y = 4 * (X1 * X1 + X2 * X2 + X3 * X3 - X1 * X2 - X2 * X3 - X3 * X1) / 3
    z = 4 * (2 * X1 - X2 - X3) * (2 * X2 - X3 - X1) * (2 * X3 - X1 - X2) / 27
    return (x, y, z)


def substitution_chain_residual(X0, h: float = 1e-3, cfg: "IntegratorConfig | None" = None) -> np.ndarray:
    """``d/dt halphen_to_rescaled(X(t)) - rescaled_rhs(...)`` at ``t = 0`` along a Halphen trajectory.

    ``X(t)`` comes from integrating :func:`halphen_x_rhs` to ``t = +-h, +-2h``;
    the derivative is a Richardson central difference.
    """
    cfg = cfg or IntegratorConfig(atol=1e-14, rtol=1e-14)
    X0 = np.asarray(X0, dtype=complex)
    at = {0: X0}
    for k in (1, 2, -1, -2):
        at[k] = integrate(halphen_x_rhs, X0, [0, k * h], cfg).final
    S = {k: np.array(halphen_to_rescaled(*v)) for k, v in at.items()}
    d1 = (S[1] - S[-1]) / (2 * h)
    d2 = (S[2] - S[-2]) / (4 * h)
    return (4 * d1 - d2) / 3 - np.array(rescaled_rhs(S[0]))


# -- integrator ----------------------------------------------------------------


def _default_max_steps() -> int:
    return int(os.environ.get("HALPHEN_MAX_STEPS", "200000"))


@dataclass(frozen=True)
class IntegratorConfig:
    atol: float = 1e-12
    rtol: float = 1e-12
    h0: float | None = None
    max_steps: int = field(default_factory=_default_max_steps)

    def __post_init__(self):
        if not (self.atol > 0 and self.rtol > 0):
            raise ValueError("tolerances must be positive")
        if self.max_steps < 1:
            raise ValueError("max_steps must be positive")


@dataclass
class Trajectory:
    params: list[complex]
    states: list[np.ndarray]
    arclength: list[float]
    errors: list[float] = field(default_factory=list)
    accepted: int = 0
    rejected: int = 0

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def __len__(self) -> int:
        return len(self.params)


class IntegrationError(RuntimeError):
    def __init__(self, message: str, trajectory: Trajectory):
        super().__init__(message)
        self.trajectory = trajectory


BLOWUP_NORM = 1e12

# Dormand-Prince 5(4) tableau
_C = np.array([0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1, 1])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0])
_B4 = np.array([5179 / 57600, 0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4


def _dp_step(f, y, h, k1):
    ks = [k1]
    for i in range(1, 7):
        yi = y + h * sum(a * k for a, k in zip(_A[i], ks))
        ks.append(f(yi))
    y5 = y + h * sum(b * k for b, k in zip(_B5, ks) if b)
    err = h * sum(e * k for e, k in zip(_E, ks))
    return y5, err, ks[-1]


def integrate(rhs: Callable, y0: Sequence, path: Sequence, cfg: IntegratorConfig | None = None) -> Trajectory:
    """Integrate the autonomous field ``rhs`` along straight segments of a complex path.

    Each segment ``a -> b`` is parameterised by arclength ``s``, so the real
    Dormand-Prince 5(4) pair integrates ``dy/ds = rhs(y) (b - a)/|b - a|``.
    Steps are rejected when the embedded error exceeds ``atol + rtol |y|``.
    """
    cfg = cfg or IntegratorConfig()
    path = [complex(p) for p in path]
    if not path:
        raise ValueError("path needs at least one waypoint")
    y = np.asarray(y0, dtype=complex).copy()
    traj = Trajectory(params=[path[0]], states=[y.copy()], arclength=[0.0])
    s_total = 0.0
    steps = 0
    for a, b in zip(path[:-1], path[1:]):
        length = abs(b - a)
        if length == 0:
            continue
        direction = (b - a) / length

        def f(v, direction=direction):
            return direction * np.asarray(rhs(v), dtype=complex)

        h = cfg.h0 if cfg.h0 else min(length, 1e-2)
        s = 0.0
        k1 = f(y)
        while s < length:
            if steps >= cfg.max_steps:
                raise IntegrationError(f"max_steps={cfg.max_steps} exhausted at s={s_total + s}", traj)
            steps += 1
            h = min(h, length - s)
            y_new, err_vec, k_last = _dp_step(f, y, h, k1)
            scale = cfg.atol + cfg.rtol * np.maximum(np.abs(y), np.abs(y_new))
            err = float(np.max(np.abs(err_vec) / scale)) if y.size else 0.0
            if not np.all(np.isfinite(y_new)):
                err = math.inf
            if err <= 1.0:
                s = length if length - s - h <= 1e-15 * length else s + h
                y = y_new
                k1 = k_last
                traj.accepted += 1
                traj.params.append(a + direction * s)
                traj.states.append(y.copy())
                traj.arclength.append(s_total + s)
                traj.errors.append(float(np.max(np.abs(err_vec))) if y.size else 0.0)
                if np.linalg.norm(y) > BLOWUP_NORM:
                    raise IntegrationError(f"state norm exceeded {BLOWUP_NORM:g} (movable singularity?)", traj)
                factor = 5.0 if err == 0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
            else:
                traj.rejected += 1
                factor = 0.2 if not math.isfinite(err) else max(0.2, 0.9 * err ** -0.2)
            h *= factor
            if h < 1e-14 * max(1.0, length):
                raise IntegrationError("step size underflow", traj)
        s_total += length
    return traj


# -- Chazy data and the cubic --------------------------------------------------


@lru_cache(maxsize=None)
def _e2_derivatives(order: int) -> tuple[qseries.QSeries, ...]:
    s = qseries.eisenstein(2, order)
    out = [s]
    for _ in range(3):
        s = qseries.derive_q(s)
        out.append(s)
    return tuple(out)


def gamma_data(t3, order: int = qseries.DEFAULT_ORDER) -> tuple[complex, complex, complex, complex]:
    """``gamma = (pi i / 3) E2(t3)`` and its first three ``t3``-derivatives.

    Derivatives come from the exact modular derivative ``D`` since
    ``d/dtau = 2 pi i D``.
    """
    t3 = complex(t3)
    if t3.imag <= 0:
        raise ValueError(f"t3={t3} must lie in the upper half-plane")
    c = PI * 1j / 3
    return tuple(
        c * (2j * PI) ** k * qseries.evaluate_value(s, t3) for k, s in enumerate(_e2_derivatives(order))
    )


class DegenerateRootsError(ValueError):
    """The cubic has (numerically) repeated roots."""


def cubic_roots(g, g1, g2, polish: int = 3) -> tuple[complex, complex, complex]:
    """Roots of ``N^3 + (3/2) g N^2 + (3/2) g1 N + g2 / 4``.

    Cardano on the depressed cubic, taking the square-root sign that avoids
    cancellation, followed by a few Newton steps on the original cubic.
    """
    a, b, c = 1.5 * complex(g), 1.5 * complex(g1), 0.25 * complex(g2)
    shift = a / 3
    p = b - a * a / 3
    q = 2 * a**3 / 27 - a * b / 3 + c
    disc = q * q / 4 + p**3 / 27
    root = disc**0.5
    cube = -q / 2 + root if abs(-q / 2 + root) >= abs(-q / 2 - root) else -q / 2 - root
    scale = max(abs(a), abs(b) ** 0.5, abs(c) ** (1 / 3), 1e-300)
    if abs(cube) < 1e-300:
        raise DegenerateRootsError("triple root")
    u = cube ** (1 / 3)
    omega = complex(-0.5, math.sqrt(3) / 2)
    roots = []
    for k in range(3):
        uk = u * omega**k
        roots.append(uk - p / (3 * uk) - shift)
    for _ in range(polish):
        polished = []
        for r in roots:
            val = ((r + a) * r + b) * r + c
            der = (3 * r + 2 * a) * r + b
            polished.append(r - val / der if der != 0 else r)
        roots = polished
    r1, r2, r3 = roots
    rel_disc = abs((r1 - r2) * (r1 - r3) * (r2 - r3)) ** 2 / scale**6
    if rel_disc < 1e-12:
        raise DegenerateRootsError(f"discriminant vanishes (relative {rel_disc:.3g})")
    return (r1, r2, r3)


def vieta_residuals(roots, g, g1, g2) -> tuple[complex, complex, complex]:
    n1, n2, n3 = roots
    return (
        n1 + n2 + n3 + 1.5 * g,
        n1 * n2 + n1 * n3 + n2 * n3 - 1.5 * g1,
        n1 * n2 * n3 + 0.25 * g2,
    )


def chazy_roots(tau, order: int = qseries.DEFAULT_ORDER) -> tuple[complex, complex, complex]:
    g, g1, g2, _ = gamma_data(tau, order)
    return cubic_roots(g, g1, g2)


class AmbiguousPairingError(RuntimeError):
    pass


def initial_labels(roots, tie: float = 1e-9) -> tuple[complex, complex, complex]:
    """Order roots by descending real part; near-equal real parts by descending imaginary part."""
    scale = max(1.0, max(abs(r) for r in roots))
    ordered = list(roots)
    # insertion sort with a tolerant comparison keeps the rule deterministic
    def before(x, y):
        if abs(x.real - y.real) > tie * scale:
            return x.real > y.real
        return x.imag > y.imag

    for i in range(1, 3):
        j = i
        while j > 0 and before(ordered[j], ordered[j - 1]):
            ordered[j], ordered[j - 1] = ordered[j - 1], ordered[j]
            j -= 1
    return tuple(ordered)


@dataclass
class RootCurve:
    taus: list[complex]
    roots: np.ndarray  # shape (len(taus), 3)

    def branch(self, k: int) -> np.ndarray:
        return self.roots[:, k]


def root_curve(taus: Sequence, order: int = qseries.DEFAULT_ORDER, start: Sequence[int] | None = None) -> RootCurve:
    """Track the three cubic roots along ``taus`` by nearest-neighbour pairing.

    Labels at the first sample follow :func:`initial_labels`, optionally
    permuted by ``start``.
    """
    taus = [complex(t) for t in taus]
    if not taus:
        raise ValueError("empty path")
    first = initial_labels(chazy_roots(taus[0], order))
    if start is not None:
        first = tuple(first[i] for i in start)
    rows = [np.array(first)]
    for t in taus[1:]:
        current = chazy_roots(t, order)
        prev = rows[-1]
        costs = sorted(
            (sum(abs(current[p[k]] - prev[k]) for k in range(3)), p) for p in permutations(range(3))
        )
        if costs[1][0] - costs[0][0] < 1e-12:
            raise AmbiguousPairingError(f"cannot pair roots continuously at tau={t}")
        best = costs[0][1]
        rows.append(np.array([current[best[k]] for k in range(3)]))
    return RootCurve(taus=taus, roots=np.vstack(rows))


def halphen_residual(tau, order: int = qseries.DEFAULT_ORDER, h: float = 1e-4, direction: complex = 1) -> np.ndarray:
    """``dN/dtau - halphen_rhs(N)`` for branch-tracked roots at ``tau``.

    The derivative is a Richardson-extrapolated central difference along
    ``direction`` (the roots are holomorphic in ``tau``).
    """
    tau = complex(tau)
    d = complex(direction) / abs(direction)
    offsets = (-2, -1, 0, 1, 2)
    curve = root_curve([tau + k * h * d for k in (0, 1, 2, -1, -2)], order)
    by_offset = dict(zip((0, 1, 2, -1, -2), curve.roots))
    N = by_offset[0]
    d1 = (by_offset[1] - by_offset[-1]) / (2 * h)
    d2 = (by_offset[2] - by_offset[-2]) / (4 * h)
    deriv = (4 * d1 - d2) / 3 / d
    del offsets
    return deriv - np.array(halphen_rhs(N))


def tracked_halphen_residual(start, end, order: int = qseries.DEFAULT_ORDER, h: float = 1e-4, stride: int = 25) -> float:
    """Largest Halphen residual of branch-tracked roots along the segment ``start -> end``.

    The segment is sampled with spacing ``h``; one root curve is tracked over
    all samples and derivatives use five-point Richardson stencils on it.
    """
    start, end = complex(start), complex(end)
    length = abs(end - start)
    n = max(4, int(math.ceil(length / h)))
    step = (end - start) / n
    curve = root_curve([start + k * step for k in range(n + 1)], order)
    R = curve.roots
    worst = 0.0
    for k in list(range(2, n - 1, stride)) + [n - 2]:
        d1 = (R[k + 1] - R[k - 1]) / (2 * step)
        d2 = (R[k + 2] - R[k - 2]) / (4 * step)
        resid = (4 * d1 - d2) / 3 - np.array(halphen_rhs(R[k]))
        worst = max(worst, float(np.max(np.abs(resid))))
    return worst


# -- Hamiltonian lift of an autonomous system ---------------------------------


def hamiltonian_lift(rhs: Callable, n: int) -> Callable:
    """``H(x, y) = -sum_i y_i X_i(x)`` on the doubled space ``(x_1..x_n, y_1..y_n)``."""

    def H(point):
        point = np.asarray(point)
        x, y = point[:n], point[n:]
        X = np.asarray(rhs(x), dtype=complex)
        return -np.dot(y, X)

    return H


def poisson_bracket(f: Callable, g: Callable, point, h: float = 1e-5) -> complex:
    """``sum_i (df/dx_i dg/dy_i - df/dy_i dg/dx_i)`` by central differences."""
    point = np.asarray(point, dtype=complex)
    if point.size % 2:
        raise ValueError("phase space must be even dimensional")
    n = point.size // 2
    fg = gradient(f, point, h)
    gg = gradient(g, point, h)
    return complex(np.dot(fg[:n], gg[n:]) - np.dot(fg[n:], gg[:n]))


def coordinate(i: int) -> Callable:
    return lambda point: point[i]


def lifted_flow(H: Callable, point, h: float = 1e-5) -> np.ndarray:
    """Flow of ``dx/dt = -dH/dy``, ``dy/dt = dH/dx`` at ``point`` (both halves)."""
    point = np.asarray(point, dtype=complex)
    n = point.size // 2
    grad = gradient(H, point, h)
    return np.concatenate([-grad[n:], grad[:n]])


def fd_derivative(func: Callable, t, h: float = 1e-4) -> complex:
    return central_diff(func, complex(t), h)
