import json

import pytest
from gmpy2 import mpq
from hypothesis import given, settings, strategies as st

from ellgen.errors import ValidationError
from ellgen.genus import ell_hypersurface, ell_projective
from ellgen.series import QYSeries
from ellgen.symprod import EllCoefficients, dmvv_expand, euler_degeneration
from oracles import partition_product


@pytest.fixture(scope="module")
def k3():
    return EllCoefficients.from_series(ell_hypersurface(4, 4, 8))


def test_entry_one_reproduces_input(k3):
    entries = dmvv_expand(k3, 3, 8)
    assert entries[0] == QYSeries.one().truncate(8)
    assert entries[1] == k3.series()


def test_k3_euler_degeneration(k3):
    got = euler_degeneration(dmvv_expand(k3, 3, 8))
    assert got == partition_product(24, 3) == [1, 24, 324, 3200]


def test_hilbert_square_of_k3_leading_slice(k3):
    # Hodge numbers of the Hilbert scheme of two points on a K3 surface
    entry = dmvv_expand(k3, 2, 2)[2]
    expected = QYSeries.from_dict({(0, -2): 3, (0, -1): 42, (0, 0): 234, (0, 1): 42,
                                   (0, 2): 3})
    assert entry.q_slice(0) == expected


@pytest.mark.parametrize("chi", [1, 2, 3, -2, 24])
def test_point_like_input_gives_partition_counts(chi):
    c = EllCoefficients({(0, 0): chi}, 0)
    got = euler_degeneration(dmvv_expand(c, 5, 0))
    assert got == partition_product(chi, 5)


def test_truncation_of_entries(k3):
    entries = dmvv_expand(EllCoefficients(k3.coeffs, 2, q_max=4), 3, 8)
    assert [e.q_max for e in entries] == [8, 4, 2, mpq(4, 3)]


def test_integrality():
    src = EllCoefficients.from_series(ell_projective(3, 3))
    for e in dmvv_expand(src, 3, 3):
        assert all(c.to_rational().denominator == 1 for _, _, c in e.items())


def test_json_round_trip(k3):
    doc = json.loads(json.dumps(k3.to_json()))
    back = EllCoefficients.from_json(doc)
    assert back == k3
    assert back.series() == k3.series()


def test_validation():
    with pytest.raises(ValidationError):
        EllCoefficients({(0, 0): mpq(1, 2)}, 0)
    with pytest.raises(ValidationError):
        EllCoefficients({(mpq(1, 2), 0): 1}, 0)
    with pytest.raises(ValidationError):
        EllCoefficients.from_json({"coeffs": [[0, "0", 1]]})
    with pytest.raises(ValidationError):
        dmvv_expand(EllCoefficients({}, 0), -1, 1)
    with pytest.raises(ValidationError):
        EllCoefficients.from_series(QYSeries.one())


@settings(max_examples=200)
@given(st.dictionaries(st.tuples(st.integers(0, 2), st.integers(-2, 2)),
                       st.integers(-3, 3), max_size=5))
def test_first_entries_by_hand(coeffs):
    # p^1 is the input; p^2 is Sym^2-type: (c(q,y)^2 + c(q^2,y^2))/2 + c(q^2, y) terms
    c = EllCoefficients(coeffs, 0, q_max=4)
    entries = dmvv_expand(c, 2, 4)
    s = c.series()
    assert entries[1] == s
    square = s * s
    doubled = QYSeries.from_dict({(2 * m, 2 * l): v for (m, l), v in c.coeffs.items()})
    halved = QYSeries.from_dict({(m // 2, l): v for (m, l), v in c.coeffs.items() if m % 2 == 0})
    expected = ((square + doubled).scale(mpq(1, 2)) + halved).truncate(2)
    assert entries[2] == expected
