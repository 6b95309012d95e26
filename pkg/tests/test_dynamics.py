import cmath
import math
from fractions import Fraction
from itertools import permutations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from halphen_lab import dynamics, qseries
from halphen_lab.dynamics import IntegratorConfig, IntegrationError, integrate

PI = math.pi
rationals = st.fractions(min_value=-20, max_value=20, max_denominator=12)
triples = st.tuples(rationals, rationals, rationals)


def series_value(w, tau, order=64):
    return qseries.evaluate_value(qseries.eisenstein(w, order), tau)


# -- vector fields --------------------------------------------------------------


def test_fixed_points():
    assert dynamics.ramanujan_rhs((1, 1, 1)) == (0, 0, 0)
    assert dynamics.ramanujan_rhs((0, 0, 0)) == (0, 0, 0)
    assert dynamics.rescaled_rhs((1, 12, 8)) == (0, 0, 0)
    assert dynamics.rescaled_rhs((0, 0, 0)) == (0, 0, 0)
    assert dynamics.halphen_rhs((0, 0, 0)) == (0, 0, 0)
    assert dynamics.chazy_rhs((0, 0, 0)) == (0, 0, 0)


@given(rationals)
def test_rescaled_fixed_point_family(t):
    assert dynamics.rescaled_rhs((t, 12 * t * t, 8 * t**3)) == (0, 0, 0)


@given(rationals)
def test_halphen_symmetric_locus(c):
    assert dynamics.halphen_rhs((c, c, c)) == (-c * c, -c * c, -c * c)


@given(triples)
def test_rescaling_of_ramanujan_is_exact(s):
    X, Y, Z = s
    lhs = dynamics.rescaled_rhs((X / 6, Y / 3, Z / 27))
    r = dynamics.ramanujan_rhs((X, Y, Z))
    assert lhs == (-r[0] / 6, -r[1] / 3, -r[2] / 27)


@given(triples)
def test_x_form_pair_sums(N):
    X = [-2 * n for n in N]
    dX = dynamics.halphen_x_rhs(X)
    assert list(dX) == [-2 * v for v in dynamics.halphen_rhs(N)]
    for i, j in ((0, 1), (1, 2), (0, 2)):
        assert dX[i] + dX[j] == X[i] * X[j]


def test_ramanujan_rhs_matches_series_derivative():
    from halphen_lab.numdiff import central_diff

    tau = 2j
    E = [series_value(w, tau) for w in (2, 4, 6)]
    rhs = np.array(dynamics.ramanujan_rhs(E)) * dynamics.TIME_FACTOR["ramanujan"]
    for w, r in zip((2, 4, 6), rhs):
        d = central_diff(lambda t, w=w: series_value(w, t), tau, 1e-4)
        assert abs(d - r) < 1e-8


def test_hamiltonian_values():
    assert dynamics.hamiltonian_F((0, 0, 0, Fraction(3))) == 0
    one, zero = Fraction(1), Fraction(0)
    assert dynamics.hamiltonian_F((one, one, zero, one)) == Fraction(23, 48)
    assert dynamics.hamiltonian_F((one, one, one, one)) == Fraction(167, 48)


@given(rationals, rationals, rationals.filter(lambda x: x != 0))
def test_lifted_rhs_on_x_zero(y, z, lam):
    assert dynamics.lifted_rhs((Fraction(0), y, z, lam)) == (-(lam**9) * y / 24, -3 * z, -(lam**9) * y * y / 6, 0)


@given(triples)
def test_lifted_projection_is_rescaled(s):
    assert dynamics.lifted_rhs((*s, 1))[:3] == dynamics.rescaled_rhs(s)


def test_lifted_rejects_zero_lambda():
    with pytest.raises(ValueError):
        dynamics.lifted_rhs((1, 1, 1, 0))


def test_canonical_round_trip():
    s = (0.3 + 0.1j, -0.2, 0.7j, 1.4)
    assert np.allclose(dynamics.from_canonical(dynamics.to_canonical(s)), s)


def test_hamilton_field_matches_lifted_rhs():
    rng = np.random.default_rng(1)
    for _ in range(10):
        s = rng.uniform(-1, 1, 4) + 1j * rng.uniform(-1, 1, 4)
        s[3] += 2
        assert np.max(np.abs(dynamics.hamilton_field_fd(s) - np.array(dynamics.lifted_rhs(s)))) < 1e-7


# -- substitution ----------------------------------------------------------------


@given(rationals)
def test_substitution_diagonal(c):
    assert dynamics.halphen_to_rescaled(c, c, c) == (c, 0, 0)


@given(triples)
def test_substitution_symmetry(X):
    x, y, z = dynamics.halphen_to_rescaled(*X)
    for p in permutations(X):
        xp, yp, _ = dynamics.halphen_to_rescaled(*p)
        assert (xp, yp) == (x, y)
    assert dynamics.halphen_to_rescaled(X[1], X[2], X[0])[2] == z


def test_substitution_chain_rule():
    X0 = -2 * np.array(dynamics.initial_labels(dynamics.chazy_roots(2j)))
    assert np.max(np.abs(dynamics.substitution_chain_residual(X0))) < 1e-6


# -- integrator -------------------------------------------------------------------


def test_zero_field_is_constant():
    y0 = [1 + 1j, 2, -3j]
    traj = integrate(lambda y: np.zeros(3), y0, [0, 1 + 1j])
    assert traj.rejected == 0
    assert np.all(traj.final == np.array(y0))


def test_zero_length_path_returns_initial_state():
    traj = integrate(dynamics.halphen_rhs, [1, 2, 3], [0.5j, 0.5j])
    assert len(traj) == 1
    assert np.all(traj.final == np.array([1, 2, 3]))


def test_exponential_along_complex_path():
    traj = integrate(lambda y: y, [1.0], [0, 1, 1 + 1j])
    assert abs(traj.final[0] - cmath.exp(1 + 1j)) < 1e-10
    assert traj.params[-1] == 1 + 1j


def test_ramanujan_flow_matches_series():
    tau0, tau1 = 2j, 2j + 0.3
    E = [series_value(w, tau0) for w in (2, 4, 6)]
    target = np.array([series_value(w, tau1) for w in (2, 4, 6)])
    path = [dynamics.tau_to_time("ramanujan", tau0), dynamics.tau_to_time("ramanujan", tau1)]
    errs = []
    for tol in (1e-10, 5e-11):
        traj = integrate(dynamics.ramanujan_rhs, E, path, IntegratorConfig(atol=tol, rtol=tol))
        errs.append(np.max(np.abs(traj.final - target)))
    assert errs[0] < 1e-7
    assert errs[1] < errs[0]


def test_rescaled_initial_data_follows_series():
    def state(tau):
        E2, E4, E6 = (series_value(w, tau) for w in (2, 4, 6))
        return np.array([PI**2 * E2 / 12, PI**4 * E4 / 12, PI**6 * E6 / 216])

    path = [dynamics.tau_to_time("rescaled", 2j), dynamics.tau_to_time("rescaled", 2j + 0.2)]
    traj = integrate(dynamics.rescaled_rhs, state(2j), path)
    assert np.max(np.abs(traj.final - state(2j + 0.2))) < 1e-9


@pytest.mark.parametrize("system", ["ramanujan", "rescaled", "halphen", "chazy", "lifted"])
def test_forward_backward_returns(system):
    y0 = {
        "ramanujan": [0.5, 0.2 + 0.1j, -0.3],
        "rescaled": [0.1, 0.2j, -0.1],
        "halphen": [0.3, -0.2 + 0.1j, 0.1],
        "chazy": [0.2, 0.1j, -0.1],
        "lifted": [0.1, 0.2, 0.05j, 1.0],
    }[system]
    cfg = IntegratorConfig(atol=1e-12, rtol=1e-12)
    rhs = dynamics.SYSTEMS[system]
    fwd = integrate(rhs, y0, [0, 0.4 + 0.2j], cfg)
    back = integrate(rhs, fwd.final, [0.4 + 0.2j, 0], cfg)
    tol = 10 * (cfg.atol + cfg.rtol * np.max(np.abs(fwd.final)))
    assert np.max(np.abs(back.final - np.array(y0))) < max(tol, 1e-11)


def test_blowup_is_reported():
    # y' = y^2 blows up at t = 1
    with pytest.raises(IntegrationError) as info:
        integrate(lambda y: y * y, [1.0], [0, 2])
    traj = info.value.trajectory
    assert traj.accepted > 0
    assert abs(traj.params[-1] - 1) < 1e-3


def test_max_steps_is_reported():
    with pytest.raises(IntegrationError, match="max_steps"):
        integrate(lambda y: y, [1.0], [0, 10], IntegratorConfig(max_steps=3))


def test_max_steps_from_environment(monkeypatch):
    monkeypatch.setenv("HALPHEN_MAX_STEPS", "2")
    assert IntegratorConfig().max_steps == 2


def test_config_validation():
    with pytest.raises(ValueError):
        IntegratorConfig(atol=0)
    with pytest.raises(ValueError):
        IntegratorConfig(max_steps=0)


def test_fd_derivative():
    assert abs(dynamics.fd_derivative(cmath.exp, 0.3j) - cmath.exp(0.3j)) < 1e-8


# -- the Chazy cubic ----------------------------------------------------------------


def test_cubic_roots_of_unity():
    roots = dynamics.cubic_roots(0, 0, -4)
    for r in roots:
        assert abs(r**3 - 1) < 1e-14
    assert min(abs(a - b) for a in roots for b in roots if a is not b) > 1


def test_vieta_on_series_data():
    g = dynamics.gamma_data(2j)
    roots = dynamics.cubic_roots(*g[:3])
    scale = max(abs(x) for x in g[:3])
    assert max(abs(r) for r in dynamics.vieta_residuals(roots, *g[:3])) < 1e-10 * scale
    for r in roots:
        assert abs(r**3 + 1.5 * g[0] * r**2 + 1.5 * g[1] * r + 0.25 * g[2]) < 1e-10 * max(1.0, scale)


def test_degenerate_roots_rejected():
    with pytest.raises(dynamics.DegenerateRootsError):
        dynamics.cubic_roots(0, 0, 0)
    # (N + 1)^3 = N^3 + 3N^2 + 3N + 1
    with pytest.raises(dynamics.DegenerateRootsError):
        dynamics.cubic_roots(2, 2, 4)


def test_gamma_data_chazy_and_periodicity():
    g = dynamics.gamma_data(2j)
    assert abs(g[3] - 6 * g[0] * g[2] + 9 * g[1] ** 2) < 1e-8
    assert abs(dynamics.gamma_data(2j + 1)[0] - g[0]) < 1e-10
    g40, g80 = dynamics.gamma_data(2j, 40), dynamics.gamma_data(2j, 80)
    assert max(abs(a - b) for a, b in zip(g40, g80)) < 1e-12
    with pytest.raises(ValueError):
        dynamics.gamma_data(-2j)


def test_roots_closed_form():
    tau = 0.2 + 1.3j
    E2 = series_value(2, tau)
    from halphen_lab import elliptic

    es = elliptic.elliptic_constants(tau).e
    closed = [-1j * PI / 6 * E2 - 1j / (2 * PI) * e for e in es]
    roots = dynamics.chazy_roots(tau)
    best = min(max(abs(roots[p[k]] - closed[k]) for k in range(3)) for p in permutations(range(3)))
    assert best < 1e-10


def test_initial_labels_rule():
    assert dynamics.initial_labels((1, 3, 2)) == (3, 2, 1)
    assert dynamics.initial_labels((1 - 1j, 1 + 1j, 0)) == (1 + 1j, 1 - 1j, 0)


def test_root_curve_constant_path():
    curve = dynamics.root_curve([2j] * 4)
    for row in curve.roots:
        assert np.all(row == curve.roots[0])


def test_root_curve_relabelling_is_equivariant():
    taus = [2j + k * (0.01 + 0.005j) for k in range(10)]
    base = dynamics.root_curve(taus)
    perm = (2, 0, 1)
    moved = dynamics.root_curve(taus, start=perm)
    for k in range(3):
        assert np.allclose(moved.branch(k), base.branch(perm[k]), atol=1e-14)


def test_root_curve_rejects_empty_path():
    with pytest.raises(ValueError):
        dynamics.root_curve([])


@pytest.mark.parametrize("tau", [2j, 1.2j, 0.3 + 1.5j])
def test_tracked_roots_solve_halphen(tau):
    assert np.max(np.abs(dynamics.halphen_residual(tau))) < 1e-6


def test_tracked_halphen_residual_along_path():
    assert dynamics.tracked_halphen_residual(2j, 2j + 0.05 + 0.03j) < 1e-6


# -- Hamiltonian lift ------------------------------------------------------------------


def test_poisson_bracket_basics():
    x1, y1 = dynamics.coordinate(0), dynamics.coordinate(2)
    p = np.array([0.3, -0.1, 0.7, 0.2], dtype=complex)

    def f(v):
        return v[0] ** 2 * v[3] + cmath.sin(v[1])

    assert abs(dynamics.poisson_bracket(x1, y1, p) - 1) < 1e-9
    assert abs(dynamics.poisson_bracket(f, f, p)) < 1e-9
    with pytest.raises(ValueError):
        dynamics.poisson_bracket(f, f, [1, 2, 3])


def test_hamiltonian_lift_examples():
    H0 = dynamics.hamiltonian_lift(lambda x: np.zeros(2), 2)
    assert H0(np.array([1.0, 2.0, 3.0, 4.0])) == 0
    H = dynamics.hamiltonian_lift(lambda x: x, 1)
    p = np.array([0.7, -0.4], dtype=complex)
    assert abs(H(p) - 0.7 * 0.4) < 1e-15
    assert abs(dynamics.lifted_flow(H, p)[0] - 0.7) < 1e-9
    assert abs(dynamics.poisson_bracket(H, H, p)) < 1e-12


def test_halphen_lift_reproduces_field():
    H = dynamics.hamiltonian_lift(dynamics.halphen_rhs, 3)
    rng = np.random.default_rng(7)
    for _ in range(5):
        p = rng.uniform(-1, 1, 6) + 0j
        X = np.array(dynamics.halphen_rhs(p[:3]))
        assert np.max(np.abs(dynamics.lifted_flow(H, p)[:3] - X)) < 1e-8
        for i in range(3):
            assert abs(dynamics.poisson_bracket(H, dynamics.coordinate(i), p) - X[i]) < 1e-8


def test_hamiltonian_conserved_along_lifted_flow():
    s0 = np.array([0.1 + 0.05j, 0.2, 0.05 - 0.02j, 1.0])
    traj = integrate(dynamics.lifted_rhs, s0, [0, 0.5, 0.5 + 0.3j])
    F0 = dynamics.hamiltonian_F(s0)
    assert max(abs(dynamics.hamiltonian_F(s) - F0) for s in traj.states) < 1e-6


@settings(max_examples=20, deadline=None)
@given(st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False))
def test_time_conversion(tau):
    for system, factor in dynamics.TIME_FACTOR.items():
        assert dynamics.tau_to_time(system, tau) == factor * tau
