import pytest
from gmpy2 import mpq

from ellgen.coeff import CycNumber
from ellgen.errors import ThetaVanishes, Unsupported
from ellgen.genus import elliptic_law_defect, law_precision
from ellgen.series import CohomologyModel, QYSeries, first_difference, invert, subst_monomial
from ellgen.theta import (ThetaArg, eta_tilde, g2_series, qjacobi_generator, t_series, theta_at,
                          theta_inverse)
from oracles import eval_series, theta_T

h = mpq(1, 2)
ONE = CycNumber.from_rational(1)


def test_t_series_low_slices():
    t = t_series(3)
    assert t.q_slice(0) == QYSeries.from_dict({(0, h): 1, (0, -h): -1})
    # -(y^{1/2} - y^{-1/2})(y + y^{-1})
    want = QYSeries.from_dict({(0, mpq(3, 2)): -1, (0, h): 1, (0, -h): -1, (0, mpq(-3, 2)): 1})
    assert t.q_slice(1) == want


def test_oddness():
    t = t_series(12)
    assert subst_monomial(t, ONE, 0, -1) == -t


def test_quasi_periodicity_to_q20():
    t = t_series(law_precision(h, 20))
    lhs = subst_monomial(t, ONE, 1, 1, tail_index=h)
    assert lhs.q_max >= 20
    rhs = t * QYSeries.monomial(-1, -h, -1)
    assert first_difference(lhs, rhs, 20) is None


def test_theta_at_plain_argument_is_t_series():
    assert theta_at(ThetaArg((), 1), 8) == t_series(8)


def test_tau_shift_matches_substitution():
    got = theta_at(ThetaArg((), 1, 0, -1, 1), 10)
    ref = subst_monomial(t_series(law_precision(h, 10)), ONE, 1, 1, tail_index=h)
    assert first_difference(got, ref, 10) is None


@pytest.mark.parametrize("c", [mpq(k, n) for n in range(1, 13) for k in range(1, n + 1)
                               if k == n or __import__("math").gcd(k, n) == 1][::3])
def test_reduced_shift_equals_substitution(c):
    got = theta_at(ThetaArg.from_shift((), 1, 0, c), 6)
    ref = subst_monomial(t_series(law_precision(h, 8)), ONE, -c, 1, tail_index=h)
    bound = min(got.q_max, ref.q_max)
    assert first_difference(got, ref, bound) is None


def test_half_period_slice():
    got = theta_at(ThetaArg((), h, 1, 0, 2), 2).q_slice(0)
    z4 = CycNumber.root_of_unity(1, 4)
    assert got == QYSeries.from_dict({(0, mpq(1, 4)): z4, (0, mpq(-1, 4)): z4})


def test_negated_argument_is_negative():
    arg = ThetaArg((), mpq(1, 3), 1, 1, 5)
    assert theta_at(arg.negated(), 5) == -theta_at(arg, 5)


def test_linear_coefficient_is_eta_squared():
    model = CohomologyModel([3])
    val = theta_at(ThetaArg((1,), 0), 20, model)
    assert val.constant_term().is_zero()
    eta = eta_tilde(20)
    assert first_difference(val.coeffs[(1,)], eta * eta, 20) is None


def test_lattice_point_vanishes():
    with pytest.raises(ThetaVanishes):
        theta_at(ThetaArg((), 0, 2, 0, 2), 3)


def test_eta_tilde():
    assert eta_tilde(5) == QYSeries.from_dict({(0, 0): 1, (1, 0): -1, (2, 0): -1, (5, 0): 1},
                                              q_max=5)
    cube = (eta_tilde(3) ** 3)
    assert cube == QYSeries.from_dict({(0, 0): 1, (1, 0): -3, (3, 0): 5}, q_max=3)
    e = eta_tilde(10)
    assert e * invert(e) == QYSeries.one().truncate(10)


def test_g2_series():
    g = g2_series(4)
    assert g == QYSeries.from_dict({(0, 0): mpq(-1, 24), (1, 0): 1, (2, 0): 3, (3, 0): 4,
                                    (4, 0): 7}, q_max=4)


TAU = 0.55j + 0.1
Z = 0.21 + 0.05j


def test_t_series_against_numeric_theta():
    val = eval_series(t_series(16), TAU, Z)
    assert abs(val - theta_T(Z, TAU)) < 1e-10


@pytest.mark.parametrize("cz,a,b,n", [(h, 3, 2, 6), (1, 1, 3, 4), (mpq(-1, 3), 2, -1, 5)])
def test_shifted_theta_against_numeric(cz, a, b, n):
    val = eval_series(theta_at(ThetaArg((), cz, a, b, n), 16), TAU, Z)
    u = float(cz) * Z + (a - b * TAU) / n
    assert abs(val - theta_T(u, TAU)) < 1e-9


def test_inverse_of_non_unit_theta():
    # 1/T(z) as a fraction over (1 - y): times T gives 1
    inv = theta_inverse(ThetaArg((), 1), 6)
    t = t_series(6)
    prod = inv.scale(t).value()
    assert first_difference(prod, QYSeries.one(), prod.q_max) is None


def test_qjacobi_leading_slices():
    e2 = qjacobi_generator(2, 4)
    assert e2.value.scale(24).q_slice(0) == QYSeries.from_dict({(0, -1): 2, (0, 0): 20,
                                                                 (0, 1): 2})
    e1 = qjacobi_generator(1, 4)
    assert e1.value.q_slice(0) == QYSeries.from_dict({(0, h): h, (0, -h): h})
    assert (e1.depth, e2.depth) == ((1, 0), (0, 1))
    assert (e1 * e2).depth == (1, 1) and (e1 * e2).weight == 3
    with pytest.raises(Unsupported):
        qjacobi_generator(5, 2)


def test_weierstrass_relation():
    # -2 E3 eta~^2 = D(E2) T - 2 E2 D(T): the derivative of the P-function
    e2 = qjacobi_generator(2, 8).value
    e3 = qjacobi_generator(3, 8).value
    t = t_series(8)
    eta = eta_tilde(8)
    lhs = (e3 * eta * eta).scale(-2)
    rhs = e2.derivative() * t - (e2 * t.derivative()).scale(2)
    assert first_difference(lhs, rhs, 6) is None


@pytest.mark.parametrize("n,sign", [(2, 1), (3, -1), (4, 1)])
def test_generator_elliptic_laws(n, sign):
    t = mpq(n, 2)
    e = qjacobi_generator(n, law_precision(t, 6)).value
    assert elliptic_law_defect(e, t, 6) is None


def test_e1_fails_the_elliptic_law():
    e1 = qjacobi_generator(1, law_precision(h, 4)).value
    assert elliptic_law_defect(e1, h, 4) is not None
