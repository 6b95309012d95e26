"""Three-dimensional Frobenius manifold with potential built from ``gamma = (pi i / 3) E2``.

Flat coordinates are ``(t1, t2, t3)`` in that fixed index order, with
``eta = dt2^2 + 2 dt1 dt3`` and potential

    F = t1^2 t3 / 2 + t1 t2^2 / 2 - t2^4 gamma(t3) / 16.

Tensors are dense numpy arrays indexed from 0, so ``C[i, j, k]`` is
``C_{i+1, j+1}^{k+1}``.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from itertools import permutations

import numpy as np

from . import qseries
from .dynamics import cubic_roots, gamma_data, halphen_rhs
from .numdiff import central_diff

ETA = np.array([[0, 0, 1], [0, 1, 0], [1, 0, 0]], dtype=complex)
ETA_INV = np.linalg.inv(ETA)
EULER_DEGREES = (1.0, 0.5, 0.0)
DISTINCT_GAP = 1e-10

__all__ = [
    "ETA",
    "FlatPoint",
    "CanonicalPoint",
    "OmegaState",
    "gamma_data",
    "potential_F",
    "structure_constants",
    "structure_constants_fd",
    "multiply",
    "associativity_check",
    "algebra_table",
    "intersection_form",
    "intersection_form_contracted",
    "char_poly",
    "char_poly_det",
    "canonical_coords",
    "change_of_basis",
    "omega_solution",
    "omega_residuals",
]


@dataclass(frozen=True)
class FlatPoint:
    t1: complex
    t2: complex
    t3: complex

    def __post_init__(self):
        for name in ("t1", "t2", "t3"):
            object.__setattr__(self, name, complex(getattr(self, name)))
        if self.t3.imag <= 0:
            raise ValueError(f"t3={self.t3} must lie in the upper half-plane")

    def as_array(self) -> np.ndarray:
        return np.array([self.t1, self.t2, self.t3])

    @classmethod
    def from_array(cls, a) -> "FlatPoint":
        return cls(*a)


@dataclass(frozen=True)
class CanonicalPoint:
    u1: complex
    u2: complex
    u3: complex

    def as_array(self) -> np.ndarray:
        return np.array([self.u1, self.u2, self.u3])


def _coerce(p) -> FlatPoint:
    return p if isinstance(p, FlatPoint) else FlatPoint(*p)


def potential_F(p, order: int = qseries.DEFAULT_ORDER) -> complex:
    p = _coerce(p)
    g = gamma_data(p.t3, order)[0]
    return p.t1**2 * p.t3 / 2 + p.t1 * p.t2**2 / 2 - p.t2**4 * g / 16


def euler_residual(p, order: int = qseries.DEFAULT_ORDER, h: float = 1e-4) -> complex:
    """``t1 dF/dt1 + (t2/2) dF/dt2 - 2F`` with derivatives by central differences."""
    p = _coerce(p)
    F1 = central_diff(lambda z: potential_F((z, p.t2, p.t3), order), p.t1, h)
    F2 = central_diff(lambda z: potential_F((p.t1, z, p.t3), order), p.t2, h)
    return p.t1 * F1 + 0.5 * p.t2 * F2 - 2 * potential_F(p, order)


def structure_constants(p, order: int = qseries.DEFAULT_ORDER) -> np.ndarray:
    """Closed-form ``C_ij^k`` as a symmetric 3x3x3 array."""
    p = _coerce(p)
    g, g1, g2, g3 = gamma_data(p.t3, order)
    t2 = p.t2
    C = np.zeros((3, 3, 3), dtype=complex)
    for j in range(3):
        C[0, j, j] = C[j, 0, j] = 1
    C[1, 1] = (-0.75 * t2**2 * g1, -1.5 * t2 * g, 1)
    C[1, 2] = C[2, 1] = (-0.25 * t2**3 * g2, -0.75 * t2**2 * g1, 0)
    C[2, 2] = (-(t2**4) * g3 / 16, -0.25 * t2**3 * g2, 0)
    return C


def third_derivatives_fd(p, order: int = qseries.DEFAULT_ORDER, h: float = 2e-3) -> np.ndarray:
    """All ``d^3 F / dt_i dt_j dt_k`` by nested Richardson central differences."""
    p = _coerce(p)
    base = p.as_array()

    def shifted(f, axis):
        def g(point):
            def along(z):
                q = point.copy()
                q[axis] = z
                return f(q)
            return central_diff(along, point[axis], h)
        return g

    def F(point):
        return potential_F(FlatPoint(*point), order)

    out = np.zeros((3, 3, 3), dtype=complex)
    for i in range(3):
        for j in range(i, 3):
            for k in range(j, 3):
                val = shifted(shifted(shifted(F, k), j), i)(base)
                for a, b, c in set(permutations((i, j, k))):
                    out[a, b, c] = val
    return out


def structure_constants_fd(p, order: int = qseries.DEFAULT_ORDER, h: float = 2e-3) -> np.ndarray:
    """Finite-difference oracle: raise the last index of ``F_ijl`` with ``eta^-1``."""
    return np.einsum("kl,ijl->ijk", ETA_INV, third_derivatives_fd(p, order, h))


def multiply(C: np.ndarray, a, b) -> np.ndarray:
    return np.einsum("i,j,ijk->k", np.asarray(a), np.asarray(b), C)


def algebra_table(p, order: int = qseries.DEFAULT_ORDER, literal: bool = False) -> dict[str, np.ndarray]:
    """Products of the generators written through ``f(x, y) = -x^4 gamma(y) / 16``, ``x = t2, y = t3``.

    ``literal=True`` reproduces the literal table whose ``e2^2`` row carries
    ``f_xyy`` where the structure constants give ``f_xxy``; it exists so the
    discrepancy can be measured.
    """
    p = _coerce(p)
    g, g1, g2, g3 = gamma_data(p.t3, order)
    x = p.t2
    f_xxx = -1.5 * x * g
    f_xxy = -0.75 * x**2 * g1
    f_xyy = -0.25 * x**3 * g2
    f_yyy = -(x**4) * g3 / 16
    return {
        "e2e2": np.array([f_xyy if literal else f_xxy, f_xxx, 1]),
        "e2e3": np.array([f_xyy, f_xxy, 0]),
        "e3e3": np.array([f_yyy, f_xyy, 0]),
    }


def associativity_check(p, order: int = qseries.DEFAULT_ORDER) -> float:
    """Max norm of ``(e2 e2) e3 - e2 (e2 e3)`` and ``(e3 e3) e2 - e3 (e3 e2)``."""
    C = structure_constants(p, order)
    e = np.eye(3)
    r1 = multiply(C, multiply(C, e[1], e[1]), e[2]) - multiply(C, e[1], multiply(C, e[1], e[2]))
    r2 = multiply(C, multiply(C, e[2], e[2]), e[1]) - multiply(C, e[2], multiply(C, e[2], e[1]))
    return float(max(np.max(np.abs(r1)), np.max(np.abs(r2))))


def wdvv_residual(p, order: int = qseries.DEFAULT_ORDER) -> float:
    """Associativity over every basis triple."""
    C = structure_constants(p, order)
    e = np.eye(3)
    worst = 0.0
    for a in range(3):
        for b in range(3):
            for c in range(3):
                lhs = multiply(C, multiply(C, e[a], e[b]), e[c])
                rhs = multiply(C, e[a], multiply(C, e[b], e[c]))
                worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst


def intersection_form(p, order: int = qseries.DEFAULT_ORDER) -> np.ndarray:
    """Closed form of ``g^{ij} = E^l C_l^{ij}``."""
    p = _coerce(p)
    g, g1, g2, _ = gamma_data(p.t3, order)
    t1, t2 = p.t1, p.t2
    g11 = -(t2**4) * g2 / 8
    g12 = -3 * t2**3 * g1 / 8
    return np.array(
        [
            [g11, g12, t1],
            [g12, t1 - 0.75 * t2**2 * g, t2 / 2],
            [t1, t2 / 2, 0],
        ],
        dtype=complex,
    )


def raised_constants(p, order: int = qseries.DEFAULT_ORDER) -> np.ndarray:
    """``C_k^{ij} = eta^{il} C_{lk}^j`` as ``out[k, i, j]``."""
    C = structure_constants(p, order)
    return np.einsum("il,lkj->kij", ETA_INV, C)


def intersection_form_contracted(p, order: int = qseries.DEFAULT_ORDER) -> np.ndarray:
    """``g^{ij}`` by contracting the Euler field ``(t1, t2/2, 0)`` with :func:`raised_constants`."""
    p = _coerce(p)
    E = np.array([p.t1, p.t2 / 2, 0])
    return np.einsum("l,lij->ij", E, raised_constants(p, order))


def char_poly(p, order: int = qseries.DEFAULT_ORDER) -> np.ndarray:
    """Coefficients ``[1, a2, a1, a0]`` of ``det(g - u eta)`` in descending powers of ``u``."""
    p = _coerce(p)
    g, g1, g2, _ = gamma_data(p.t3, order)
    t1, t2 = p.t1, p.t2
    return np.array(
        [
            1,
            -3 * t1 + 0.75 * g * t2**2,
            3 * t1**2 - 1.5 * t1 * t2**2 * g + 0.375 * t2**4 * g1,
            -(t1**3) + 0.75 * t1**2 * t2**2 * g - 0.375 * t2**4 * t1 * g1 + t2**6 * g2 / 32,
        ],
        dtype=complex,
    )


def char_poly_det(p, order: int = qseries.DEFAULT_ORDER) -> np.ndarray:
    """Same coefficients, recovered by interpolating ``det(g - u eta)`` at four values of ``u``."""
    g = intersection_form(p, order)
    us = np.array([-1.0, 0.0, 1.0, 2.0])
    vals = [np.linalg.det(g - u * ETA) for u in us]
    return np.polyfit(us, vals, 3)


def _coefficient_scale(coeffs) -> float:
    return float(max(1.0, max(abs(c) for c in coeffs)))


def _check_distinct(values, what: str):
    scale = max(1.0, max(abs(v) for v in values))
    for a in range(3):
        for b in range(a + 1, 3):
            if abs(values[a] - values[b]) <= DISTINCT_GAP * scale:
                raise ValueError(f"{what} are not distinct (relative gap <= {DISTINCT_GAP:g})")


def chazy_cubic_roots(t3, order: int = qseries.DEFAULT_ORDER):
    g, g1, g2, _ = gamma_data(t3, order)
    return cubic_roots(g, g1, g2)


def canonical_coords(p, order: int = qseries.DEFAULT_ORDER, roots=None) -> CanonicalPoint:
    """``u_k = t1 + t2^2 N_k(t3) / 2`` for the roots ``N_k`` of the Chazy cubic."""
    p = _coerce(p)
    if p.t2 == 0:
        raise ValueError("t2 = 0: canonical coordinates coalesce")
    N = roots if roots is not None else chazy_cubic_roots(p.t3, order)
    u = [p.t1 + 0.5 * p.t2**2 * n for n in N]
    _check_distinct(u, "canonical coordinates")
    return CanonicalPoint(*u)


def char_poly_residuals(p, order: int = qseries.DEFAULT_ORDER) -> np.ndarray:
    """``|char_poly(u_k)| / coefficient scale`` for each canonical coordinate."""
    coeffs = char_poly(p, order)
    u = canonical_coords(p, order).as_array()
    return np.abs(np.polyval(coeffs, u)) / _coefficient_scale(coeffs)


# -- change of basis -----------------------------------------------------------


def _match(reference, values):
    """Permute ``values`` to sit closest to ``reference``."""
    best = min(permutations(range(3)), key=lambda perm: sum(abs(values[perm[k]] - reference[k]) for k in range(3)))
    return np.array([values[best[k]] for k in range(3)])


def jacobian_fd(p, order: int = qseries.DEFAULT_ORDER, h: float = 1e-4) -> np.ndarray:
    """``du_i/dt_j`` by central differences with roots matched to the base point."""
    p = _coerce(p)
    base = p.as_array()
    ref = canonical_coords(p, order).as_array()
    J = np.zeros((3, 3), dtype=complex)
    for j in range(3):
        def u_along(z, j=j):
            q = base.copy()
            q[j] = z
            return _match(ref, canonical_coords(FlatPoint(*q), order).as_array())
        J[:, j] = central_diff(u_along, base[j], h)
    return J


def jacobian(p, order: int = qseries.DEFAULT_ORDER) -> np.ndarray:
    """Analytic ``du_i/dt_j``; ``dN_i/dt3`` is read off the Halphen system."""
    p = _coerce(p)
    N = np.array(chazy_cubic_roots(p.t3, order))
    Ndot = np.array(halphen_rhs(N))
    return np.column_stack([np.ones(3), p.t2 * N, 0.5 * p.t2**2 * Ndot])


def _first_column(N, t2):
    n1, n2, n3 = N
    X = t2**3 / 2 * (n2**2 * (n1 - n3) - n3**2 * (n1 - n2))
    Y = t2**3 / 2 * (n1**2 * (n3 - n2) - n3**2 * (n1 - n2))
    Z_literal = t2**3 / 2 * (n1**2 * (n3 - n2) - n2**2 * (n3 - n2))
    Z = t2**3 / 2 * (n1**2 * (n3 - n2) - n2**2 * (n3 - n1))
    return X, Y, Z, Z_literal


def basis_matrix(p, order: int = qseries.DEFAULT_ORDER, literal: bool = False) -> np.ndarray:
    """Closed-form rows ``d/du_i`` in the ``d/dt`` basis.

    With ``literal=True`` the third entry of the first column keeps the
    literal factor ``(N3 - N2)`` in both terms; the default uses
    ``(N3 - N1)`` in the second term, which is what inverting the Jacobian gives.
    """
    p = _coerce(p)
    N = chazy_cubic_roots(p.t3, order)
    n1, n2, n3 = N
    t2 = p.t2
    if t2 == 0:
        raise ValueError("t2 = 0: change of basis is singular")
    X, Y, Z, Z_lit = _first_column(N, t2)
    prefactor = 1 / (t2**3 * (n2 - n1) * (n1 - n3) * (n2 - n3))
    rows = np.array(
        [
            [X, t2**2 * n1 * (n3 - n2), t2 * (n3 - n2)],
            [Y, t2**2 * n2 * (n1 - n3), t2 * (n1 - n3)],
            [Z_lit if literal else Z, t2**2 * n3 * (n2 - n1), t2 * (n2 - n1)],
        ]
    )
    return prefactor * rows


@dataclass
class ChangeOfBasis:
    M: np.ndarray
    oracle_deviation: float
    literal_deviation: float

    @property
    def literal_matches(self) -> bool:
        return self.literal_deviation < 1e-6


def change_of_basis(p, order: int = qseries.DEFAULT_ORDER, h: float = 1e-4) -> ChangeOfBasis:
    """Closed-form ``M`` plus deviations of ``M J^T`` from the identity, ``J`` the numerical Jacobian.

    ``literal_deviation`` measures the literal first-column entry of the
    third row against the same oracle.
    """
    p = _coerce(p)
    J = jacobian_fd(p, order, h)
    if abs(np.linalg.det(J)) < 1e-14:
        raise ValueError("Jacobian is singular")
    M = basis_matrix(p, order)
    M_lit = basis_matrix(p, order, literal=True)
    eye = np.eye(3)
    return ChangeOfBasis(
        M=M,
        oracle_deviation=float(np.max(np.abs(M @ J.T - eye))),
        literal_deviation=float(np.max(np.abs(M_lit @ J.T - eye))),
    )


# -- the Omega system ------------------------------------------------------------


@dataclass(frozen=True)
class OmegaState:
    omega: tuple[complex, complex, complex]
    s: complex
    roots: tuple[complex, complex, complex]
    radicals: tuple[complex, complex, complex]
    r3_principal: bool
    near_cut: bool

    @property
    def Omega1(self) -> complex:
        return self.omega[0]

    @property
    def Omega2(self) -> complex:
        return self.omega[1]

    @property
    def Omega3(self) -> complex:
        return self.omega[2]


CUT_TOL = 1e-9


def _on_negative_axis(z: complex) -> bool:
    return z.real < 0 and abs(z.imag) <= CUT_TOL * abs(z)


def omega_from_roots(N, reference: OmegaState | None = None) -> OmegaState:
    """``Omega_k = N_k / (2 r_k)`` with ``r_k^2`` the radicands ``(N2-N1)(N1-N3)``, ``(N3-N2)(N2-N1)``, ``(N1-N3)(N3-N2)``.

    Without a reference, ``r1`` and ``r2`` are principal square roots; with one,
    each takes the sign closest to the reference value, which keeps them
    continuous along a path.  ``r3`` is fixed by
    ``r1 r2 r3 = (N2 - N1)(N1 - N3)(N3 - N2)``, the sign coupling the system
    needs, and ``r3_principal`` records whether that agrees with the principal
    root.  ``near_cut`` is set when a radicand sits on the negative real axis,
    where principal roots are ambiguous.
    """
    n1, n2, n3 = (complex(n) for n in N)
    _check_distinct((n1, n2, n3), "cubic roots")
    s = (n3 - n1) / (n2 - n1)
    if s == 0 or s == 1:
        raise ValueError("s must avoid 0 and 1")
    rad1 = (n2 - n1) * (n1 - n3)
    rad2 = (n3 - n2) * (n2 - n1)
    rad3 = (n1 - n3) * (n3 - n2)
    r1 = cmath.sqrt(rad1)
    r2 = cmath.sqrt(rad2)
    if reference is not None:
        ref1, ref2, _ = reference.radicals
        r1 = r1 if abs(r1 - ref1) <= abs(r1 + ref1) else -r1
        r2 = r2 if abs(r2 - ref2) <= abs(r2 + ref2) else -r2
    r3 = (n2 - n1) * (n1 - n3) * (n3 - n2) / (r1 * r2)
    principal = abs(r3 - cmath.sqrt(rad3)) <= 1e-9 * max(1.0, abs(r3))
    omega = (n1 / (2 * r1), n2 / (2 * r2), n3 / (2 * r3))
    return OmegaState(
        omega=omega,
        s=s,
        roots=(n1, n2, n3),
        radicals=(r1, r2, r3),
        r3_principal=principal,
        near_cut=any(_on_negative_axis(r) for r in (rad1, rad2, rad3)),
    )


def omega_solution(t3, order: int = qseries.DEFAULT_ORDER) -> OmegaState:
    from .dynamics import initial_labels

    return omega_from_roots(initial_labels(chazy_cubic_roots(t3, order)))


def omega_residuals(t3, order: int = qseries.DEFAULT_ORDER, h: float = 1e-4) -> dict[str, float]:
    """Residuals of the Omega ODEs in ``s`` and of ``2 (dt3/ds)(N1-N3)(N2-N3)/(N2-N1) = 1``.

    Roots are tracked through a five-point stencil in ``t3`` and every
    ``s``-derivative is ``(d/dt3) / (ds/dt3)``.  The first equation is tested
    with both right-hand sides, ``Omega2 Omega3 / s`` and ``Omega2^2 / s``.
    """
    from .dynamics import root_curve

    t3 = complex(t3)
    offsets = (0, 1, -1, 2, -2)
    curve = root_curve([t3 + k * h for k in offsets], order)
    base_state = omega_from_roots(curve.roots[0])
    states = {k: omega_from_roots(curve.roots[i], reference=base_state) for i, k in enumerate(offsets)}

    def deriv(get):
        d1 = (get(states[1]) - get(states[-1])) / (2 * h)
        d2 = (get(states[2]) - get(states[-2])) / (4 * h)
        return (4 * d1 - d2) / 3

    base = states[0]
    O1, O2, O3 = base.omega
    s = base.s
    ds = deriv(lambda st: st.s)
    dO = [deriv(lambda st, k=k: st.omega[k]) / ds for k in range(3)]
    n1, n2, n3 = base.roots
    return {
        "eq1_corrected": abs(dO[0] - O2 * O3 / s),
        "eq1_literal": abs(dO[0] - O2 * O2 / s),
        "eq2": abs(dO[1] + O1 * O3 / (s - 1)),
        "eq3": abs(dO[2] - O1 * O2 / (s * (s - 1))),
        "identity": abs(2 / ds * (n1 - n3) * (n2 - n3) / (n2 - n1) - 1),
    }
