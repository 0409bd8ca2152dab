import cmath

import pytest
from gmpy2 import mpq
from hypothesis import given, settings, strategies as st

from ellgen.coeff import (CycNumber, canonical_order, cyc_embed, cyc_try_rational,
                          cyclotomic_poly, totient)
from ellgen.errors import IncompatibleOrder, NotRational
from oracles import cyc_value, cyclotomic_coeffs


@pytest.mark.parametrize("n", list(range(1, 41)) + [60, 84, 105])
def test_cyclotomic_polynomials_match_sympy(n):
    assert tuple(cyclotomic_poly(n)) == cyclotomic_coeffs(n)
    assert len(cyclotomic_poly(n)) - 1 == totient(n)


def test_canonical_order_skips_2_mod_4():
    assert canonical_order(2) == 1
    assert canonical_order(6) == 3
    assert canonical_order(12) == 12
    assert canonical_order(10) == 5


def test_embed_examples():
    minus_one = CycNumber.root_of_unity(1, 2)
    assert cyc_embed(minus_one, 4) == CycNumber.from_rational(-1)
    z4 = CycNumber.root_of_unity(1, 4)
    assert cyc_embed(z4, 8) == CycNumber.root_of_unity(2, 8)
    x = CycNumber.from_rational(1) + CycNumber.root_of_unity(1, 3)
    big = cyc_embed(x, 12)
    assert big == CycNumber.from_rational(1) + CycNumber.root_of_unity(4, 12)
    assert abs(cyc_value(big) - (1 + cmath.exp(2j * cmath.pi / 3))) < 1e-12


def test_embed_rejects_non_multiple():
    with pytest.raises(IncompatibleOrder):
        cyc_embed(CycNumber.root_of_unity(1, 3), 4)


def test_try_rational():
    total = sum((CycNumber.root_of_unity(a, 5) for a in range(5)), CycNumber.from_rational(0))
    assert cyc_try_rational(total * mpq(1, 5)) == 0
    with pytest.raises(NotRational):
        cyc_try_rational(CycNumber.root_of_unity(1, 4))
    z6 = CycNumber.root_of_unity(1, 6)
    assert cyc_try_rational(z6 + z6.inverse()) == 1


@pytest.mark.parametrize("n", [3, 4, 5, 7, 8, 9, 12, 15])
def test_roots_of_unity_sums(n):
    z = CycNumber.root_of_unity(1, n)
    assert z ** n == CycNumber.from_rational(1)
    for k in range(n):
        s = sum((CycNumber.root_of_unity(a * k, n) for a in range(n)),
                CycNumber.from_rational(0))
        assert s == CycNumber.from_rational(n if k == 0 else 0)


orders = st.sampled_from([1, 3, 4, 5, 7, 8, 9, 12, 15, 16, 20, 24])
small = st.fractions(min_value=-5, max_value=5, max_denominator=6)


@st.composite
def cyc(draw, order=None):
    n = draw(orders) if order is None else order
    coords = draw(st.lists(small, min_size=totient(n), max_size=totient(n)))
    return CycNumber(n, [mpq(c.numerator, c.denominator) for c in coords])


@settings(max_examples=300)
@given(cyc(), cyc(), cyc())
def test_field_axioms(a, b, c):
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a + b == b + a
    if not a.is_zero():
        assert a * a.inverse() == CycNumber.from_rational(1)


@settings(max_examples=300)
@given(cyc(), cyc())
def test_numeric_value_is_a_ring_map(a, b):
    assert abs(cyc_value(a * b) - cyc_value(a) * cyc_value(b)) < 1e-8
    assert abs(cyc_value(a + b) - cyc_value(a) - cyc_value(b)) < 1e-8


@settings(max_examples=200)
@given(st.data())
def test_embed_commutes_with_arithmetic(data):
    n = data.draw(st.sampled_from([3, 4, 5, 8]))
    k = data.draw(st.sampled_from([2, 3, 4]))
    a, b = data.draw(cyc(n)), data.draw(cyc(n))
    big = n * k
    assert cyc_embed(a * b, big) == cyc_embed(a, big) * cyc_embed(b, big)
    assert cyc_embed(a + b, big) == cyc_embed(a, big) + cyc_embed(b, big)
    assert abs(cyc_value(cyc_embed(a, big)) - cyc_value(a)) < 1e-9


def test_json_round_trip():
    x = CycNumber.root_of_unity(1, 12) * mpq(3, 7) + 2
    assert CycNumber.from_json(x.to_json()) == x
