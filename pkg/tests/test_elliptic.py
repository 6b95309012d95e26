import cmath
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from halphen_lab import elliptic
from halphen_lab.elliptic import EVEN_CHARS, ODD_CHAR, ThetaChar

TAU = 0.3 + 1.1j
Z = 0.2 + 0.1j

# Frozen with mpmath.jtheta(k, pi z, q = exp(i pi tau)) at 30 digits.
MP_THETA = {
    ThetaChar(1, 0): 0.73403335586119733885 + 0.013390755991060509516j,  # jtheta 2
    ThetaChar(0, 1): 0.95363015535196173684 + 0.0046632932552636354571j,  # jtheta 4
    ThetaChar(0, 0): 1.0463725649116859977 - 0.0046566599359187861451j,  # jtheta 3
}
MP_JTHETA1 = 0.45531559393426554754 + 0.33205427862976403703j
MP_ETA1 = 1.6571828979154100949 - 0.03733653955296109877j
MP_WP = 3.565525627100248046 - 11.118580374956541872j  # p(0.23 + 0.17i)
MP_E = (
    6.53099454409831726 + 0.1495304094265654506j,
    -4.7209063211276736105 - 2.0940182880113376618j,
    -1.8100882229706436495 + 1.9444878785847722112j,
)

coords = st.floats(min_value=-0.45, max_value=0.45)
points = st.builds(complex, coords, coords).filter(lambda z: abs(z) > 0.05)


@pytest.mark.parametrize("char", EVEN_CHARS)
def test_theta_char_matches_mpmath(char):
    assert abs(elliptic.theta_char(char, Z, TAU) - MP_THETA[char]) < 1e-14


def test_odd_theta_matches_mpmath_up_to_sign():
    assert abs(elliptic.theta_odd(Z, TAU) - MP_JTHETA1) < 1e-14
    assert abs(elliptic.theta_char(ODD_CHAR, Z, TAU) + MP_JTHETA1) < 1e-14


@pytest.mark.parametrize("k", [1, 2, 3])
def test_jacobi_index_matches_characteristic(k):
    char = elliptic.JACOBI_CHARS[k]
    assert abs(elliptic.jacobi_theta(k, Z, TAU) - elliptic.theta_char(char, Z, TAU)) < 1e-14


def test_theta_constants():
    assert elliptic.theta_char(ODD_CHAR, 0, TAU) == pytest.approx(0, abs=1e-15)
    assert elliptic.theta_odd(0, TAU) == 0
    assert abs(elliptic.theta_char(ThetaChar(0, 0), 0, 2j) - elliptic.jacobi_theta(3, 0, 2j)) < 1e-15
    assert abs(elliptic.jacobi_theta(3, 0, 2j) - 1.003734885487739091) < 1e-15
    assert abs(elliptic.jacobi_theta(1, 0, 1j)) > 0.1


@settings(max_examples=30, deadline=None)
@given(points, st.sampled_from(EVEN_CHARS + (ODD_CHAR,)))
def test_theta_parity(z, char):
    sign = -1 if char.parity else 1
    assert abs(elliptic.theta_char(char, -z, TAU) - sign * elliptic.theta_char(char, z, TAU)) < 1e-13


def test_theta_derivative_matches_finite_difference():
    from halphen_lab.numdiff import central_diff

    char = ThetaChar(1, 0)
    d = central_diff(lambda z: elliptic.theta_char(char, z, TAU), Z, 1e-4)
    assert abs(elliptic.theta_char(char, Z, TAU, derivative=1) - d) < 1e-9


def test_bad_characteristic_and_tau():
    with pytest.raises(ValueError):
        ThetaChar(2, 0)
    with pytest.raises(ValueError):
        elliptic.theta_char(ThetaChar(0, 0), 0, -1j)
    with pytest.raises(ValueError):
        elliptic.jacobi_theta(5, 0, 1j)


def test_wp_matches_mpmath():
    assert abs(elliptic.wp(0.23 + 0.17j, TAU) - MP_WP) < 1e-11


@settings(max_examples=30, deadline=None)
@given(points)
def test_wp_even_and_periodic(u):
    w = elliptic.wp(u, TAU)
    scale = max(1.0, abs(w))
    assert abs(elliptic.wp(-u, TAU) - w) < 1e-12 * scale
    assert abs(elliptic.wp(u + 1, TAU) - w) < 1e-12 * scale
    assert abs(elliptic.wp(u + TAU, TAU) - w) < 1e-11 * scale


@settings(max_examples=30, deadline=None)
@given(points)
def test_wp_prime_odd_and_ode(u):
    c = elliptic.elliptic_constants(TAU)
    p, dp = elliptic.wp(u, TAU), elliptic.wp_prime(u, TAU)
    assert abs(elliptic.wp_prime(-u, TAU) + dp) < 1e-12 * max(1.0, abs(dp))
    assert abs(dp**2 - (4 * p**3 - c.g2 * p - c.g3)) < 1e-8 * max(1.0, abs(dp) ** 2)


def test_wp_laurent_behaviour():
    u = 1e-3
    c = elliptic.elliptic_constants(TAU)
    assert abs(elliptic.wp(u, TAU) - 1 / u**2 - c.g2 / 20 * u**2) < 1e-9
    assert abs(elliptic.wp_regular(u, TAU) - c.g2 / 20 * u**2) < 1e-9


def test_wp_prime_vanishes_at_half_periods():
    for w in elliptic.half_periods(TAU):
        assert abs(elliptic.wp_prime(w, TAU)) < 1e-9


def test_wp_rejects_lattice_points():
    for u in (0, 1, TAU, 2 + TAU, 1e-13):
        with pytest.raises(ValueError):
            elliptic.wp(u, TAU)


def test_constants_match_mpmath():
    c = elliptic.elliptic_constants(TAU)
    for a, b in zip(c.e, MP_E):
        assert abs(a - b) < 1e-12
    assert abs(c.eta1 - MP_ETA1) < 1e-13


@pytest.mark.parametrize("tau", [1j, 2j, 0.5 + 1j, 1 / 3 + 1.2j])
def test_constants_are_cubic_roots(tau):
    c = elliptic.elliptic_constants(tau)
    assert abs(sum(c.e)) < 1e-10
    for e in c.e:
        assert abs(4 * e**3 - c.g2 * e - c.g3) < 1e-8
    E2 = 1 - 24 * sum(
        sum(d for d in range(1, n + 1) if n % d == 0) * cmath.exp(2j * math.pi * tau * n) for n in range(1, 60)
    )
    assert abs(c.eta1_over_omega1 - math.pi**2 * E2 / 3) < 1e-9


@pytest.mark.parametrize("tau", [1j, 2j, TAU])
def test_eta1_routes_agree(tau):
    c = elliptic.elliptic_constants(tau)
    assert abs(elliptic.eta1_from_theta(tau) - c.eta1) < 1e-9
    assert abs(elliptic.eta1_from_period(tau) - c.eta1) < 1e-9


def test_lattice_homogeneity():
    base = elliptic.elliptic_constants(TAU).e
    lam = 0.7 - 0.4j
    scaled = elliptic.lattice_e_values(lam / 2, lam * TAU / 2)
    for a, b in zip(scaled, base):
        assert abs(a - b / lam**2) < 1e-11


def test_square_lattice_has_vanishing_middle_root():
    assert abs(elliptic.elliptic_constants(1j).e3) < 1e-12


@pytest.mark.parametrize("tau", [1j, 2j, 0.5 + 1j])
def test_riccati_residuals(tau):
    assert max(elliptic.riccati_residuals(tau)) < 1e-6


@pytest.mark.parametrize("i", [1, 2, 3])
def test_half_period_shift_formula(i):
    for u in (0.1 + 0.05j, 0.3 - 0.2j):
        assert elliptic.jordan_residual(i, u, TAU) < 1e-8


def test_log_theta_d2_matches_finite_difference():
    from halphen_lab.numdiff import central_diff

    char = ThetaChar(0, 1)
    d = central_diff(lambda z: cmath.log(elliptic.theta_char(char, z, TAU)), Z, 1e-3, order=2)
    assert abs(elliptic.log_theta_d2(char, Z, TAU) - d) < 1e-7
