import pytest
import sympy as sp
from gmpy2 import mpq

from ellgen.errors import ValidationError
from ellgen.genus import (ell_bidegree, ell_complete_intersection, ell_hypersurface, ell_product,
                          ell_projective, elliptic_law_defect, hypersurface_euler, law_precision,
                          root_factor, specialize_chi_y, specialize_euler, specialize_torsion,
                          surface_qjacobi_decompose)
from ellgen.series import CohomologyModel, QYSeries
from ellgen.theta import qjacobi_generator
from oracles import ci_chi_y, ci_euler

Y = sp.Symbol("y", positive=True)


def to_sympy(s):
    """Exact Laurent polynomial in y from a q^0 slice with rational coefficients."""
    out = 0
    for alpha, beta, c in s.items():
        assert alpha == 0
        r = c.to_rational()
        out += sp.Rational(int(r.numerator), int(r.denominator)) * Y ** sp.Rational(
            int(beta.numerator), int(beta.denominator))
    return sp.expand(out)


def oracle_slice(n, degrees):
    dim = n - 1 - len(degrees)
    poly = ci_chi_y(n, degrees)
    return sp.expand(sum(c * Y ** k for k, c in poly.items()) * Y ** sp.Rational(-dim, 2))


# K3 genus 2*phi_{0,1}, coefficients of q^0..q^2 (Eichler-Zagier)
K3 = {
    (0, -1): 2, (0, 0): 20, (0, 1): 2,
    (1, -2): 20, (1, -1): -128, (1, 0): 216, (1, 1): -128, (1, 2): 20,
    (2, -3): 2, (2, -2): 216, (2, -1): -1026, (2, 0): 1616, (2, 1): -1026, (2, 2): 216,
    (2, 3): 2,
}


def test_root_factor_leading_slice():
    model = CohomologyModel([4])
    r = root_factor((1,), 3, model)
    x = sp.Symbol("x")
    ref = sp.series(Y ** sp.Rational(-1, 2) * x * (1 - Y * sp.exp(-x)) / (1 - sp.exp(-x)),
                    x, 0, 4).removeO()
    for k in range(4):
        got = to_sympy(r.coeffs.get((k,), QYSeries.zero()).q_slice(0))
        assert sp.simplify(got - sp.expand(ref.coeff(x, k))) == 0


def test_trivial_root_is_one():
    model = CohomologyModel([3])
    assert root_factor((0,), 2, model).constant_term() == QYSeries.one()


def test_point():
    assert ell_projective(1, 3).series == QYSeries.one().truncate(3)


@pytest.mark.parametrize("n", range(2, 7))
def test_projective_leading_slice_and_euler(n):
    g = ell_projective(n, 1)
    assert to_sympy(specialize_chi_y(g)) == oracle_slice(n, [])
    assert specialize_euler(g) == n


def test_projective_plane_leading_slice():
    assert to_sympy(specialize_chi_y(ell_projective(3, 0))) == sp.expand(Y ** -1 + 1 + Y)


@pytest.mark.parametrize("n,degrees", [(4, [4]), (5, [5]), (4, [2, 2]), (5, [2, 2]),
                                       (6, [2, 3]), (5, [3]), (4, [1]), (4, [3]), (6, [2, 2, 2])])
def test_complete_intersection_leading_slice(n, degrees):
    g = ell_complete_intersection(n, degrees, 0)
    assert to_sympy(specialize_chi_y(g)) == oracle_slice(n, degrees)
    assert specialize_euler(g) == ci_euler(n, degrees)


def test_k3_coefficients():
    g = ell_hypersurface(4, 4, 2)
    assert g.series == QYSeries.from_dict(K3, q_max=2)
    assert specialize_euler(g) == 24


def test_k3_is_24_e2():
    e2 = qjacobi_generator(2, 6).value
    assert ell_hypersurface(4, 4, 6).series == e2.scale(24)


@pytest.mark.parametrize("n,d", [(3, 3), (4, 4), (5, 5), (5, 2), (6, 3), (4, 1), (6, 6)])
def test_hypersurface_euler_closed_form(n, d):
    assert hypersurface_euler(n, d) == ci_euler(n, [d])


def test_hyperplane_is_projective_plane():
    assert ell_hypersurface(4, 1, 3).series == ell_projective(3, 3).series


def test_singleton_complete_intersection_is_hypersurface():
    assert ell_complete_intersection(5, [3], 2).series == ell_hypersurface(5, 3, 2).series


def test_elliptic_curve_genus_vanishes():
    assert ell_hypersurface(3, 3, 4).series.is_zero()
    assert specialize_euler(ell_hypersurface(3, 3, 0)) == 0


def test_product_is_multiplicative():
    a = ell_projective(2, 3).series
    b = ell_projective(3, 3).series
    assert ell_product((2, 3), 3).series == a * b


def test_bidegree_22_curve_vanishes():
    assert ell_bidegree(2, 2, 3).series.is_zero()


def test_integrality():
    for g in (ell_hypersurface(5, 5, 3), ell_complete_intersection(6, [2, 3], 2),
              ell_projective(4, 3), ell_hypersurface(4, 3, 3)):
        shifted = g.series.shift(0, mpq(g.dim, 2))
        assert all(c.to_rational().denominator == 1 for _, _, c in shifted.items())


@pytest.mark.parametrize("n,degrees", [(6, [3, 3]), (6, [2, 4]), (4, [4]), (5, [5]), (6, [2, 2, 2]),
                                       (5, [2, 3])])
def test_calabi_yau_elliptic_law(n, degrees):
    dim = n - 1 - len(degrees)
    t = mpq(dim, 2)
    g = ell_complete_intersection(n, degrees, law_precision(t, 3))
    assert elliptic_law_defect(g.series, t, 3) is None


@pytest.mark.parametrize("n,degrees", [(4, [3]), (6, [2, 3])])
def test_non_cy_violates_elliptic_law(n, degrees):
    # degrees sum to n - 1: c_1 = h, so no index makes the cocycle hold
    t = mpq(n - 1 - len(degrees), 2)
    g = ell_complete_intersection(n, degrees, law_precision(t, 2))
    assert elliptic_law_defect(g.series, t, 2) is not None


@pytest.mark.parametrize("d,c1,c2", [(1, mpq(9, 2), mpq(-3, 2)), (4, 0, 24)])
def test_surface_decomposition_examples(d, c1, c2):
    got1, got2, residual = surface_qjacobi_decompose(ell_hypersurface(4, d, 4))
    assert (got1, got2) == (c1, c2)
    assert residual.is_zero()


def test_surface_decomposition_of_basis_element():
    c1, c2, residual = surface_qjacobi_decompose(qjacobi_generator(2, 4).value.scale(24))
    assert (c1, c2) == (0, 24) and residual.is_zero()


def test_torsion_specialization():
    k3 = ell_hypersurface(4, 4, 6)
    s = specialize_torsion(k3, 1, 0, 2)
    assert s.coefficient(0, 0).to_rational() == 16
    assert specialize_torsion(QYSeries.one(), 1, 1, 3) == QYSeries.one()
    assert specialize_torsion(ell_hypersurface(3, 3, 3), 1, 1, 3).is_zero()
    with pytest.raises(ValidationError):
        specialize_torsion(k3, 0, 3, 3)


def test_torsion_specialization_with_q_shift_is_honest():
    k3 = ell_hypersurface(4, 4, 8)
    s = specialize_torsion(k3, 1, 1, 3)
    # y -> zeta_3 q^{1/3}: q^{-1/3} from 2 y^{-1} is the leading term
    assert s.q_min == mpq(-1, 3)
    assert s.q_max <= 8


def test_validation():
    with pytest.raises(ValidationError):
        ell_complete_intersection(3, [1, 1, 1], 1)
    with pytest.raises(ValidationError):
        ell_hypersurface(1, 1, 1)
