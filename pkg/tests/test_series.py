import random

import pytest
from gmpy2 import mpq

from ellgen.coeff import CycNumber
from ellgen.errors import BeyondTruncation, FractionalRootOfUnit, NotExact, NotInvertible
from ellgen.series import (CohomologyModel, Precision, QYSeries, RootOfUnity, XSeries,
                           YFraction, d_log, divide_one_minus_y, exp_nilpotent, invert, mul,
                           subst_monomial, sum_fractions)
from ellgen import series as S

h = mpq(1, 2)


def poly(d, q_max=None):
    return QYSeries.from_dict(d, q_max=q_max)


def test_difference_of_squares():
    a = poly({(0, h): 1, (0, -h): -1})
    b = poly({(0, h): 1, (0, -h): 1})
    assert a * b == poly({(0, 1): 1, (0, -1): -1})


def test_geometric_telescoping():
    a = poly({(0, 0): 1, (1, 1): -1})
    b = poly({(0, 0): 1, (1, 1): 1, (2, 2): 1})
    assert a * b == poly({(0, 0): 1, (3, 3): -1})


def test_geometric_series_times_one_minus_q():
    geo = poly({(k, 0): 1 for k in range(11)}, q_max=10)
    out = geo * poly({(0, 0): 1, (1, 0): -1})
    assert out == QYSeries.one().truncate(10)


def test_truncation_rule():
    a = poly({(-1, 0): 1, (2, 0): 3}, q_max=4)
    b = poly({(1, 1): 1}, q_max=2)
    # min(4 + 1, 2 - 1)
    assert mul(a, b).q_max == 1


def test_invert_one_minus_q():
    a = poly({(0, 0): 1, (1, 0): -1}, q_max=3)
    assert invert(a) == poly({(k, 0): 1 for k in range(4)}, q_max=3)


def test_invert_requires_monomial_leading():
    with pytest.raises(NotInvertible):
        invert(poly({(0, h): 1, (0, -h): -1}, q_max=3))
    ok = poly({(-h, h): 1, (h, -h): -1}, q_max=4)
    w = invert(ok)
    assert w.coefficient(h, -h) == CycNumber.from_rational(1)
    assert (w * ok).agrees_with(QYSeries.one(), upto=w.q_max + ok.q_min)


def test_subst_examples():
    a = poly({(0, h): 1, (0, -h): -1})
    one = CycNumber.from_rational(1)
    assert subst_monomial(a, one, 1, 1) == poly({(h, h): 1, (-h, -h): -1})
    assert subst_monomial(poly({(0, 1): 1, (0, -1): -1}), RootOfUnity(1, 2), 0, 0) == 0
    b = poly({(0, 0): 1, (1, 1): 1})
    got = subst_monomial(b, RootOfUnity(1, 3), mpq(1, 3), 1)
    assert got == poly({(0, 0): 1, (mpq(4, 3), 1): CycNumber.root_of_unity(1, 3)})


def test_subst_rejects_fractional_powers_without_branch():
    with pytest.raises(FractionalRootOfUnit):
        subst_monomial(poly({(0, h): 1}), CycNumber.from_rational(-1), 0, 0)


def test_subst_with_fractional_branch():
    got = subst_monomial(poly({(0, h): 1}), RootOfUnity(1, 2), 0, 0)
    assert got == QYSeries.constant(CycNumber.root_of_unity(1, 4))


def test_d_log_examples():
    assert d_log(poly({(0, mpq(3, 2)): 5})) == QYSeries.constant(mpq(3, 2))
    got = d_log(poly({(0, 0): 1, (1, 1): -1}, q_max=4))
    assert got == poly({(k, k): -1 for k in range(1, 5)}, q_max=4)


def test_coefficient_and_truncation():
    a = poly({(0, 0): 1, (1, 1): -1}, q_max=1)
    assert a.coefficient(1, 1) == CycNumber.from_rational(-1)
    assert a.coefficient(1, 0) == CycNumber.from_rational(0)
    with pytest.raises(BeyondTruncation):
        a.coefficient(2, 0)


def test_canonicalization_is_idempotent_and_minimal():
    a = poly({(mpq(2, 4), mpq(2, 4)): 1, (1, 0): 2})
    assert a.M == 2
    assert a.canonical() == a
    z = CycNumber.root_of_unity(1, 12) ** 4
    b = QYSeries.constant(z)
    assert b.canonical().N == 3


def test_json_round_trip():
    a = poly({(mpq(-1, 2), mpq(1, 3)): CycNumber.root_of_unity(1, 5), (2, 0): mpq(7, 3)},
             q_max=mpq(5, 2))
    assert QYSeries.from_json(a.to_json()) == a
    assert a.to_json()["terms"] == sorted(a.to_json()["terms"])


def test_divide_one_minus_y():
    num = poly({(0, 0): 1, (0, 3): -1, (1, mpq(1, 2)): 2, (1, mpq(7, 2)): -2})
    got = divide_one_minus_y(num, 1)
    assert got == poly({(0, 0): 1, (0, 1): 1, (0, 2): 1,
                        (1, mpq(1, 2)): 2, (1, mpq(3, 2)): 2, (1, mpq(5, 2)): 2})
    with pytest.raises(NotExact):
        divide_one_minus_y(poly({(0, 0): 1}), 1)


def _random_terms(rng, n, m):
    return {(mpq(rng.randint(0, 40), m), mpq(rng.randint(-30, 30), m)):
            mpq(rng.randint(-50, 50), rng.randint(1, 3)) for _ in range(n)}


@pytest.mark.parametrize("seed", range(6))
def test_kronecker_kernel_matches_loop(seed):
    rng = random.Random(seed)
    m = rng.choice([1, 2, 3])
    a = poly(_random_terms(rng, 120, m), q_max=40)
    b = poly(_random_terms(rng, 90, m), q_max=35)
    z = CycNumber.root_of_unity(1, 5) if seed % 2 else None
    if z is not None:
        a = a * QYSeries.constant(z)
    mm = max(a.M, b.M)
    at = S._convert_terms(a._terms, a.M, a.N, mm, a.N)
    bt = S._convert_terms(b._terms, b.M, b.N, mm, a.N)
    cut = 30 * mm
    assert S._mul_kronecker(at, bt, a.N, cut) == S._mul_loop(at, bt, a.N, cut)


def test_nilpotent_model():
    model = CohomologyModel([3])
    x = model.generator(0)
    assert (x ** 3).coeffs == {}
    e = exp_nilpotent(x)
    assert e.integrate() == QYSeries.constant(mpq(1, 2))
    u = XSeries.scalar(model, poly({(0, 0): 2})) + x
    inv = u.inverse()
    assert (inv * u).integrate() == 0
    assert (inv * u).constant_term() == QYSeries.one()


def test_yfraction_sum_and_value():
    one_minus = poly({(0, 0): 1, (0, 1): -1})
    model = CohomologyModel([1])
    a = YFraction(XSeries.scalar(model, one_minus), {1: 1})
    b = YFraction(XSeries.scalar(model, poly({(0, 0): 2})), {})
    total = sum_fractions([a, b])
    assert total.integrate().value() == QYSeries.constant(3)


def test_precision_validation():
    with pytest.raises(Exception):
        Precision(-1)
    assert Precision(3, 2).working == 5
