"""Elliptic genera of projective spaces, complete intersections and their products.

The genus of X is the integral over X of prod R(x_i) over the Chern roots x_i
of TX, with the per-root factor

    R(x) = x T(x - z) / T(x),     R(x)|_{q=0} = y^{-1/2} x (1 - y e^{-x}) / (1 - e^{-x}).

On P^{n-1} the Euler sequence gives TP + O = O(1)^n, so the tangent roots
contribute R(h)^n / R(0) with R(0) = T(-z)/eta~^2.  A complete intersection of
degrees d_i picks up d_i h / R(d_i h) = T(d_i h)/T(d_i h - z) per equation.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

from gmpy2 import mpq

from .coeff import ONE, ZERO, CycNumber, as_rational, fmt_rational
from .errors import DecompositionFailed, ValidationError
from .series import (CohomologyModel, Precision, QYSeries, RootOfUnity, XSeries, YFraction,
                     _tail_bound, as_precision, first_difference, subst_monomial)
from .theta import (ThetaArg, eta_tilde, linear_over_theta, qjacobi_generator, theta_at,
                    theta_inverse)

CONVENTION = "normalized"

__all__ = [
    "CohomologyModel", "GenusValue", "XSeries", "root_factor", "ell_projective",
    "ell_product", "ell_hypersurface", "ell_complete_intersection",
    "surface_qjacobi_decompose", "specialize_chi_y", "specialize_euler",
    "specialize_torsion", "elliptic_law_defect", "law_precision", "hypersurface_euler",
    "adaptive",
]


@dataclass(frozen=True)
class GenusValue:
    series: QYSeries
    dim: int
    precision: Precision
    convention: str = CONVENTION
    meta: dict = dc_field(default_factory=dict, compare=False)

    @property
    def q_max(self):
        return self.series.q_max

    def to_json(self) -> dict:
        out = {
            "dim": self.dim,
            "convention": self.convention,
            "qMax": None if self.series.q_max is None else fmt_rational(self.series.q_max),
            "series": self.series.to_json(),
        }
        if self.meta:
            out["meta"] = dict(self.meta)
        return out


def adaptive(compute, prec) -> QYSeries:
    """Run ``compute(Precision)`` raising the guard until q^q_order is reached."""
    prec = as_precision(prec)
    guard = prec.guard
    for _ in range(32):
        res = compute(Precision(prec.q_order, guard))
        if res.q_max is None or res.q_max >= prec.q_order:
            return res.truncate(prec.q_order) if res.q_max is not None else res
        guard += 1 + (prec.q_order - res.q_max)
    raise RuntimeError("precision loop did not converge")


def _line(model: CohomologyModel, cx):
    cx = tuple(as_rational(c) for c in cx)
    if len(cx) != model.rank:
        raise ValidationError("linear form does not match the model", form=[str(c) for c in cx])
    return cx


def root_factor(ell, prec, model: CohomologyModel, trivial: bool = False) -> XSeries:
    """R(l) = l T(l - z)/T(l) for the linear form ``ell`` (coefficients on the model generators).

    A trivial root (flag, or l = 0) contributes 1.
    """
    if trivial or not any(as_rational(c) for c in ell):
        return XSeries.scalar(model, QYSeries.one())
    cx = _line(model, ell)
    top = theta_at(ThetaArg(cx, -1), prec, model)
    return top * linear_over_theta(cx, prec, model)


def _inverse_trivial_root(prec) -> YFraction:
    """1/R(0) = eta~^2 / T(-z)."""
    eta = eta_tilde(Precision(as_precision(prec).working))
    return theta_inverse(ThetaArg((), -1), prec).scale(eta * eta)


def _normal_factor(cx, prec, model) -> YFraction:
    """l / R(l) = T(l)/T(l - z) for a normal-bundle root l."""
    top = theta_at(ThetaArg(cx, 0), prec, model)
    return YFraction.of(top) * theta_inverse(ThetaArg(cx, -1), prec, model)


def _projective_integral(dims, degrees, prec) -> QYSeries:
    """int over prod P^{n_j - 1} of prod_j R(h_j)^{n_j} / R(0)^k times prod normal factors."""
    model = CohomologyModel(dims)
    k = len(dims)
    integrand = XSeries.scalar(model, QYSeries.one())
    for j, n in enumerate(dims):
        cx = tuple(ONE if i == j else ZERO for i in range(k))
        integrand = integrand * (root_factor(cx, prec, model) ** n)
    frac = YFraction.of(integrand)
    seen = {}
    for deg in degrees:
        cx = _line(model, deg)
        seen[cx] = seen.get(cx, 0) + 1
    for cx, mult in sorted(seen.items()):
        frac = frac * (_normal_factor(cx, prec, model) ** mult)
    total = frac.integrate() * (_inverse_trivial_root(prec) ** k)
    return total.value()


def _genus(dims, degrees, prec, meta=None) -> GenusValue:
    prec = as_precision(prec)
    dim = sum(n - 1 for n in dims) - len(degrees)
    if dim < 0:
        raise ValidationError("more equations than ambient dimension", dims=list(dims))
    series = adaptive(lambda p: _projective_integral(dims, degrees, p), prec)
    return GenusValue(series.canonical(), dim, prec, meta=meta or {})


def ell_projective(n: int, prec) -> GenusValue:
    """Genus of P^{n-1}."""
    if n < 1:
        raise ValidationError("n must be >= 1", n=n)
    return _genus((n,), (), prec, {"space": f"P^{n - 1}"})


def ell_product(dims, prec) -> GenusValue:
    """Genus of P^{n_1 - 1} x ... x P^{n_k - 1}."""
    dims = tuple(int(n) for n in dims)
    if not dims or any(n < 1 for n in dims):
        raise ValidationError("dimensions must be positive", dims=list(dims))
    return _genus(dims, (), prec)


def ell_hypersurface(n: int, d: int, prec) -> GenusValue:
    """Genus of a smooth degree-d hypersurface in P^{n-1}."""
    if n < 2 or d < 1:
        raise ValidationError("need n >= 2 and d >= 1", n=n, d=d)
    return _genus((n,), ((d,),), prec, {"n": n, "degrees": [d]})


def ell_complete_intersection(n: int, degrees, prec) -> GenusValue:
    """Genus of a smooth complete intersection of the given degrees in P^{n-1}."""
    degrees = [int(d) for d in degrees]
    if not degrees or len(degrees) >= n or any(d < 1 for d in degrees):
        raise ValidationError("need 1 <= r < n equations of positive degree",
                              n=n, degrees=degrees)
    return _genus((n,), tuple((d,) for d in degrees), prec, {"n": n, "degrees": degrees})


def ell_bidegree(n: int, m: int, prec) -> GenusValue:
    """Genus of a smooth bidegree-(n, m) hypersurface in P^{n-1} x P^{m-1}."""
    return _genus((n, m), ((n, m),), prec, {"n": n, "m": m})


# ---------------------------------------------------------------------------


def specialize_chi_y(g) -> QYSeries:
    """The q^0 slice, y^{-dim/2} chi_{-y}."""
    series = g.series if isinstance(g, GenusValue) else g
    return series.q_slice(0)


def specialize_euler(g) -> mpq:
    """y^{dim/2} (q^0 slice) at y = 1."""
    chi = specialize_chi_y(g)
    val = subst_monomial(chi, CycNumber.from_rational(1), 0, 0)
    return val.coefficient(0, 0).to_rational()


def specialize_torsion(g, a: int, b: int, n: int) -> QYSeries:
    """Substitute y -> zeta_n^a q^{b/n} (fractional y-powers use exp(2 pi i a beta/n))."""
    if (a % n, b % n) == (0, 0):
        raise ValidationError("torsion point must be nonzero mod n", a=a, b=b, n=n)
    if isinstance(g, GenusValue):
        return subst_monomial(g.series, RootOfUnity(a, n), mpq(b, n), 0,
                              tail_index=mpq(g.dim, 2))
    return subst_monomial(g, RootOfUnity(a, n), mpq(b, n), 0)


def elliptic_law_defect(series: QYSeries, index, upto=None):
    """First discrepancy of f(q, qy) = (-1)^{2t} q^{-t} y^{-2t} f(q, y), or None.

    Compared up to ``upto`` (default: the truncation of the substituted side).
    """
    t = as_rational(index)
    lhs = subst_monomial(series, CycNumber.from_rational(1), 1, 1, tail_index=t)
    sign = -1 if (2 * t) % 2 else 1
    rhs = series * QYSeries.monomial(sign, -t, -2 * t)
    bound = lhs.q_max if upto is None else as_rational(upto)
    if rhs.q_max is not None and bound is not None and bound > rhs.q_max:
        bound = rhs.q_max
    return first_difference(lhs, rhs, bound)


def law_precision(index, target, dq=1) -> int:
    """Smallest integer order P whose y -> q^dq y image is honest up to ``target``
    for a series of the given weak-Jacobi index."""
    t = as_rational(index)
    target = as_rational(target)
    p = int(-(-target.numerator // target.denominator))
    while _tail_bound(mpq(p), abs(as_rational(dq)), t, 1) < target:
        p += 1
    return p


def hypersurface_euler(n: int, d: int) -> mpq:
    """((1 - d)^n + n d - 1)/d, the Euler number of a smooth degree-d hypersurface in P^{n-1}."""
    return mpq((1 - d) ** n + n * d - 1, d)


# ---------------------------------------------------------------------------


def surface_qjacobi_decompose(g):
    """Write a surface genus as c1*E1^2 + c2*E2; returns (c1, c2, residual)."""
    series = g.series if isinstance(g, GenusValue) else g
    if isinstance(g, GenusValue) and g.dim != 2:
        raise ValidationError("surface decomposition needs dim = 2", dim=g.dim)
    q_order = series.q_max if series.q_max is not None else ZERO
    e1 = qjacobi_generator(1, q_order).value
    e2 = qjacobi_generator(2, q_order).value
    basis = [e1 * e1, e2]
    monos = [(ZERO, mpq(-1)), (ZERO, ZERO), (ZERO, ONE)]
    rows = []
    rhs = []
    for alpha, beta in monos:
        rows.append([b.coefficient(alpha, beta).to_rational() for b in basis])
        rhs.append(series.coefficient(alpha, beta).to_rational())
    sol = None
    for i in range(len(rows)):
        for j in range(i + 1, len(rows)):
            (a, b), (c, d) = rows[i], rows[j]
            det = a * d - b * c
            if det:
                c1 = (rhs[i] * d - b * rhs[j]) / det
                c2 = (a * rhs[j] - c * rhs[i]) / det
                sol = (c1, c2)
                break
        if sol:
            break
    if sol is None:
        raise DecompositionFailed("singular system for the surface decomposition")
    c1, c2 = sol
    residual = series - basis[0].scale(c1) - basis[1].scale(c2)
    return c1, c2, residual
