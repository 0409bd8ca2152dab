"""Elliptic genera of Landau-Ginzburg, orbifold, hybrid and bidegree phases.

Every sector below is a product of shifted theta quotients

    T(l + s_num z + alpha - beta tau) / T(l + s_den z + alpha - beta tau) * y^beta

with as many thetas on top as below, so the reduced theta T can be used
throughout.  Sectors are summed as fractions over a shared denominator and
divided exactly at the end; orbifold averages are required to come out with
rational coefficients.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from math import gcd, prod

from gmpy2 import mpq

from .coeff import ONE, ZERO, CycNumber, as_rational, fmt_rational, lcm
from .errors import (InvalidWeights, MissingGradingElement, NotExact, NotRational,
                     ThetaVanishes, Unsupported, ValidationError)
from .genus import (GenusValue, _inverse_trivial_root, adaptive, ell_bidegree,
                    hypersurface_euler, root_factor)
from .series import (CohomologyModel, Precision, QYSeries, XSeries, YFraction, as_precision,
                     divide_one_minus_y, one_minus_y, sum_fractions)
from .theta import ThetaArg, theta_at, theta_inverse

__all__ = [
    "WeightedAction", "AbelianOrbifoldData", "SpectrumResult", "lg_trivial_sector",
    "lg_sector", "lg_genus", "lg_orbifoldized", "sigma_orbifold_genus", "spectrum",
    "lg_chi_y_orbifold", "numeric_invariants", "hybrid_ci_genus", "bidegree_genera",
    "orbifold_euler",
]


def _threads() -> int:
    raw = os.environ.get("ELLGEN_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ValidationError("ELLGEN_THREADS must be a positive integer", value=raw)
    if n < 1:
        raise ValidationError("ELLGEN_THREADS must be a positive integer", value=raw)
    return n


def _map(fn, items):
    """Ordered map; uses a thread pool when ELLGEN_THREADS > 1."""
    items = list(items)
    n = _threads()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def _frac(x) -> mpq:
    x = as_rational(x)
    return x - (x.numerator // x.denominator)


# ---------------------------------------------------------------------------
# data


@dataclass(frozen=True)
class WeightedAction:
    """Weights w_1..w_n and degree D of the dilation action."""

    weights: tuple
    degree: int

    def __post_init__(self):
        w = tuple(int(x) for x in self.weights)
        if not w or any(x < 1 for x in w):
            raise InvalidWeights("weights must be positive integers", weights=list(w))
        if int(self.degree) < 1:
            raise InvalidWeights("degree must be a positive integer", degree=self.degree)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "degree", int(self.degree))

    @property
    def n(self) -> int:
        return len(self.weights)

    @property
    def is_cy(self) -> bool:
        return sum(self.weights) == self.degree

    @property
    def pairwise_coprime(self) -> bool:
        w = self.weights
        return all(gcd(w[i], w[j]) == 1 for i in range(len(w)) for j in range(i + 1, len(w)))

    @property
    def grading_element(self) -> tuple:
        return tuple(_frac(mpq(w, self.degree)) for w in self.weights)

    def charges(self) -> tuple:
        return tuple(mpq(w, self.degree) for w in self.weights)


@dataclass(frozen=True)
class AbelianOrbifoldData:
    """Diagonal abelian group given by generator character vectors in [0, 1)^n."""

    ambient_dim: int
    generators: tuple
    twist_degree: int = 0

    def __post_init__(self):
        gens = []
        for g in self.generators:
            g = tuple(_frac(x) for x in g)
            if len(g) != self.ambient_dim:
                raise ValidationError("generator length must equal the ambient dimension",
                                      generator=[fmt_rational(x) for x in g])
            gens.append(g)
        object.__setattr__(self, "generators", tuple(gens))

    def elements(self) -> list:
        zero = tuple([ZERO] * self.ambient_dim)
        seen = {zero}
        frontier = [zero]
        while frontier:
            nxt = []
            for e in frontier:
                for g in self.generators:
                    s = tuple(_frac(a + b) for a, b in zip(e, g))
                    if s not in seen:
                        seen.add(s)
                        nxt.append(s)
            frontier = nxt
        return sorted(seen)

    @property
    def order(self) -> int:
        return len(self.elements())

    def exponent(self) -> int:
        e = 1
        for g in self.generators:
            for x in g:
                e = lcm(e, int(x.denominator))
        return e

    def contains(self, element) -> bool:
        element = tuple(_frac(x) for x in element)
        return element in set(self.elements())


@dataclass(frozen=True)
class SpectrumResult:
    entries: tuple  # (exponent, multiplicity), sorted
    milnor: int
    symmetric: bool

    def generating_polynomial(self, n: int) -> QYSeries:
        """Xi(y) = y^{-n/2} sum y^{q_l}."""
        return QYSeries.from_dict({(0, q - mpq(n, 2)): k for q, k in self.entries})

    def flat(self) -> list:
        out = []
        for q, k in self.entries:
            out.extend([q] * k)
        return out


# ---------------------------------------------------------------------------
# sector building blocks


def _quotient(cx, s_num, s_den, alpha, beta, prec, model=None, period=None):
    """T(l + s_num z + alpha - beta tau)/T(l + s_den z + alpha - beta tau) * y^beta."""
    num = ThetaArg.from_shift(cx, s_num, alpha, beta)
    den = ThetaArg.from_shift(cx, s_den, alpha, beta)
    top = theta_at(num, prec, model)
    if model is None:
        top = XSeries.scalar(CohomologyModel(()), top)
    bottom = theta_inverse(den, prec, model if model is not None else None, period=period)
    phase = QYSeries.monomial(1, 0, beta)
    if isinstance(bottom, YFraction):
        return (bottom * top).scale(phase)
    if model is None:
        bottom = XSeries.scalar(CohomologyModel(()), bottom)
    return YFraction.of((top * bottom).scale(phase))


def _product(factors):
    """Multiply (YFraction, multiplicity) pairs."""
    out = None
    for fr, k in factors:
        term = fr ** k if k != 1 else fr
        out = term if out is None else out * term
    return out


def _finish(total: YFraction, scale) -> QYSeries:
    value = total.scale(scale).value()
    value = value.canonical()
    if value.N != 1:
        raise NotRational("orbifold average did not collapse to rational coefficients",
                          cycOrder=value.N)
    return value


def _lg_product(charges, pairs, prec, period):
    """prod_i T((c_i - 1) z + alpha_i - beta_i tau)/T(c_i z + alpha_i - beta_i tau) y^{beta_i}."""
    grouped = {}
    for c, (alpha, beta) in zip(charges, pairs):
        key = (c, alpha, beta)
        grouped[key] = grouped.get(key, 0) + 1
    factors = []
    for (c, alpha, beta), k in sorted(grouped.items()):
        if c - 1 == 0 and _frac(alpha) == 0 and _frac(beta) == 0:
            raise ThetaVanishes("numerator theta vanishes: weight equals the degree",
                                charge=fmt_rational(c))
        factors.append((_quotient((), c - 1, c, alpha, beta, prec, period=period), k))
    return _product(factors)


def lg_sector(act: WeightedAction, a: int, b: int, prec) -> YFraction:
    """The (a, b) summand of the LG genus before the 1/D average, as a fraction."""
    d = act.degree
    charges = act.charges()
    pairs = [(mpq(w * a, d), mpq(w * b, d)) for w in act.weights]
    return _lg_product(charges, pairs, prec, period=d)


def _check_lg(act: WeightedAction):
    for w in act.weights:
        if w % act.degree == 0:
            raise ThetaVanishes("a weight divisible by the degree makes a theta vanish",
                                weight=w, degree=act.degree)


def lg_trivial_sector(act: WeightedAction, prec) -> QYSeries:
    """prod_j T((w_j/D - 1) z)/T(w_j z/D); its q^0 slice is (-1)^n Xi(y)."""
    _check_lg(act)
    return adaptive(lambda p: lg_sector(act, 0, 0, p).value(), prec)


def lg_genus(act: WeightedAction, prec) -> QYSeries:
    """(1/D) sum_{0 <= a, b < D} prod_i T((w_i/D - 1)z + w_i(a - b tau)/D)
    / T(w_i z/D + w_i(a - b tau)/D) * y^{b w_i/D}."""
    _check_lg(act)
    d = act.degree
    sectors = [(a, b) for a in range(d) for b in range(d)]

    def compute(p):
        parts = _map(lambda ab: lg_sector(act, ab[0], ab[1], p), sectors)
        return _finish(sum_fractions(parts), mpq(1, d))
    return adaptive(compute, prec)


def lg_orbifoldized(act: WeightedAction, group: AbelianOrbifoldData, prec) -> QYSeries:
    """(1/|G|) sum_{g, h} prod_i T((w_i/D - 1)z + l_i(g) - l_i(h) tau)
    / T(w_i z/D + l_i(g) - l_i(h) tau) * y^{l_i(h)}.

    The group must contain the grading element (w_1/D, ..., w_n/D).
    """
    _check_lg(act)
    if group.ambient_dim != act.n:
        raise ValidationError("group acts on a space of the wrong dimension",
                              groupDim=group.ambient_dim, n=act.n)
    if not group.contains(act.grading_element):
        raise MissingGradingElement("group does not contain the grading element",
                                    element=[fmt_rational(x) for x in act.grading_element])
    elements = group.elements()
    period = lcm(group.exponent(), act.degree)
    charges = act.charges()
    sectors = [(g, h) for g in elements for h in elements]

    def one(gh):
        g, h = gh
        return _lg_product(charges, list(zip(g, h)), p_holder[0], period)

    def compute(p):
        p_holder[0] = p
        parts = _map(one, sectors)
        return _finish(sum_fractions(parts), mpq(1, len(elements)))
    p_holder = [None]
    return adaptive(compute, prec)


# ---------------------------------------------------------------------------
# sigma-model orbifold phase


def _components(chars_g, chars_h):
    """Coordinates grouped by their (g, h) character pair."""
    classes = {}
    for i, pair in enumerate(zip(chars_g, chars_h)):
        classes.setdefault(pair, []).append(i)
    return sorted(classes.items())


def _twisted_root(cx, alpha, beta, prec, model, period):
    """Contribution of a root l twisted by (alpha, beta) != (0, 0)."""
    return _quotient(cx, -1, 0, alpha, beta, prec, model, period)


def _sector_over_component(model, n_roots, twists, normal, prec, period):
    """Integrand on a component P^{k-1}: untwisted roots, twisted roots and normal factor.

    ``twists`` maps (alpha, beta) -> multiplicity for roots h + twist.
    ``normal`` is None or (degree, alpha, beta) for a normal root D h with that twist.
    """
    h = (ONE,)
    integrand = YFraction.of(root_factor(h, prec, model) ** n_roots)
    for (alpha, beta), k in sorted(twists.items()):
        integrand = integrand * (_twisted_root(h, alpha, beta, prec, model, period) ** k)
    if normal is not None:
        deg, alpha, beta = normal
        cx = (mpq(deg),)
        if alpha == 0 and beta == 0:
            top = theta_at(ThetaArg(cx, 0), prec, model)
            bottom = theta_inverse(ThetaArg(cx, -1), prec, model)
            integrand = integrand * (YFraction.of(top) * bottom)
        else:
            integrand = integrand * _inverse_twisted(cx, alpha, beta, prec, model, period)
    return integrand.integrate()


def _inverse_twisted(cx, alpha, beta, prec, model, period):
    num = ThetaArg.from_shift(cx, 0, alpha, beta)
    den = ThetaArg.from_shift(cx, -1, alpha, beta)
    top = theta_at(num, prec, model)
    bottom = theta_inverse(den, prec, model, period=period)
    phase = QYSeries.monomial(1, 0, -beta)
    if isinstance(bottom, YFraction):
        return (bottom * top).scale(phase)
    return YFraction.of((top * bottom).scale(phase))


def sigma_orbifold_genus(orb: AbelianOrbifoldData, prec) -> QYSeries:
    """Orbifold genus of a degree-D hypersurface in P^{n-1} modulo a diagonal group.

    For each commuting pair (g, h) the fixed locus in P^{n-1} splits into
    components P^{|S|-1}, S a class of coordinates with equal character pair.
    On such a component the tangent roots are h + (l_j - l_S); the twisted
    ones contribute T(x + a - b tau - z)/T(x + a - b tau) y^b, the untwisted
    ones R(x), the trivial root 1/R(0), and the normal root D h carries the
    character -D l_S.
    """
    n = orb.ambient_dim
    d = orb.twist_degree
    if d < 1:
        raise ValidationError("twist degree must be positive", degree=d)
    elements = orb.elements()
    period = orb.exponent()
    sectors = []
    for g in elements:
        for h in elements:
            for (lg, lh), coords in _components(g, h):
                twists = {}
                for j in range(n):
                    if j in coords:
                        continue
                    key = (_frac(g[j] - lg), _frac(h[j] - lh))
                    twists[key] = twists.get(key, 0) + 1
                normal = (d, _frac(-d * lg), _frac(-d * lh))
                sectors.append((len(coords), tuple(sorted(twists.items())), normal))

    def compute(p):
        def one(sec):
            k, twists, normal = sec
            model = CohomologyModel([k])
            return _sector_over_component(model, k, dict(twists), normal, p, period)
        parts = _map(one, sectors)
        total = sum_fractions(parts) * (_inverse_trivial_root(p))
        return _finish(total, mpq(1, len(elements)))
    return adaptive(compute, prec)


def orbifold_euler(orb: AbelianOrbifoldData) -> mpq:
    """(1/|G|) sum_{g,h} e(X^{g,h}) by counting fixed components directly."""
    elements = orb.elements()
    d = orb.twist_degree
    total = ZERO
    for g in elements:
        for h in elements:
            for (lg, lh), coords in _components(g, h):
                k = len(coords)
                if _frac(d * lg) == 0 and _frac(d * lh) == 0:
                    total += hypersurface_euler(k, d) if k >= 1 else 0
                else:
                    total += k
    return total / len(elements)


# ---------------------------------------------------------------------------
# q^0 data


def spectrum(act: WeightedAction) -> SpectrumResult:
    """Exponents q_l with sum y^{q_l} = prod_j (y^{w_j/D} - y)/(1 - y^{w_j/D})."""
    d = act.degree
    if any(w >= d for w in act.weights):
        raise InvalidWeights("need w_j < D for an isolated singularity",
                             weights=list(act.weights), degree=d)
    milnor_q = prod(Fraction(d, w) - 1 for w in act.weights)
    if milnor_q.denominator != 1:
        raise InvalidWeights("Milnor number is not an integer", value=str(milnor_q))
    num = QYSeries.one()
    for w in act.weights:
        c = mpq(w, d)
        num = num * QYSeries.from_dict({(0, c): 1, (0, 1): -1})
    try:
        for w in act.weights:
            num = divide_one_minus_y(num, mpq(w, d))
    except NotExact:
        raise InvalidWeights("spectrum generating function is not a polynomial",
                             weights=list(act.weights), degree=d)
    entries = []
    for _, beta, c in num.items():
        k = c.to_rational()
        if k.denominator != 1 or k < 0:
            raise InvalidWeights("spectrum has non-positive multiplicities")
        entries.append((beta, int(k)))
    entries.sort()
    total = sum(k for _, k in entries)
    n = act.n
    mirror = sorted((n - q, k) for q, k in entries)
    return SpectrumResult(tuple(entries), total, mirror == entries)


def _roots_sum(w, a, d):
    """zeta = e^{2 pi i a w/D} as a CycNumber."""
    return CycNumber.root_of_unity(a * w, d)


def lg_chi_y_orbifold(act: WeightedAction) -> QYSeries:
    """Closed form of the q^0 slice of the LG genus.

    (1/D) y^{-n/2} sum_{a, b} prod_{i: D | b w_i} (zeta y^{w_i/D} - y)/(zeta y^{w_i/D} - 1)
    * prod_{i: D does not divide b w_i} y^{frac(b w_i/D)},  zeta = e^{2 pi i a w_i/D}.
    """
    d = act.degree
    n = act.n
    _check_lg(act)
    # common denominator prod_i (1 - y^{w_i}) built from 1/(zeta Y - 1) = -sum (zeta Y)^k/(1 - Y^D)
    den = {}
    for w in act.weights:
        den[mpq(w)] = den.get(mpq(w), 0) + 1
    total = QYSeries.zero()
    for a in range(d):
        for b in range(d):
            term = QYSeries.one()
            used = {}
            for w in act.weights:
                c = _frac(mpq(b * w, d))
                if c:
                    term = term * QYSeries.monomial(1, 0, c)
                    continue
                zeta = _roots_sum(w, a, d)
                y_w = QYSeries.monomial(zeta, 0, mpq(w, d))
                geo = QYSeries.zero()
                p = QYSeries.one()
                for _ in range(d):
                    geo = geo + p
                    p = p * y_w
                term = term * ((y_w - QYSeries.monomial(1, 0, 1)) * (-geo))
                used[mpq(w)] = used.get(mpq(w), 0) + 1
            for m, k in den.items():
                extra = k - used.get(m, 0)
                if extra:
                    term = term * one_minus_y(m, extra)
            total = total + term
    for m, k in sorted(den.items()):
        total = divide_one_minus_y(total, m, k)
    total = total.shift(0, -mpq(n, 2)).scale(mpq(1, d)).canonical()
    if total.N != 1:
        raise NotRational("closed-form average is not rational")
    return total


def numeric_invariants(act: WeightedAction) -> dict:
    """Milnor number, orbifold LG Euler number and the matching hypersurface Euler number."""
    d, n = act.degree, act.n
    milnor_q = prod(Fraction(d, w) - 1 for w in act.weights)
    chi = lg_chi_y_orbifold(act)
    lg_euler = sum((c.to_rational() for _, _, c in chi.items()), ZERO)
    out = {
        "milnor": int(milnor_q) if milnor_q.denominator == 1 else None,
        "lgEuler": lg_euler,
        "hypersurfaceEuler": hypersurface_euler(n, d),
        "pairwiseCoprime": act.pairwise_coprime,
        "calabiYau": act.is_cy,
    }
    if all(w == 1 for w in act.weights) and n == d:
        out["lgEulerClosedForm"] = mpq((1 - d) ** d + d * d - 1, d)
    return out


# ---------------------------------------------------------------------------
# hybrid phases


def _weighted_poles(qs):
    """Points u = alpha - beta tau of (C/Lambda) where some T(-q_i u) vanishes,
    with the set S of coordinates vanishing there."""
    poles = {}
    for q in qs:
        for a in range(q):
            for b in range(q):
                pt = (mpq(a, q), mpq(b, q))
                if pt not in poles:
                    poles[pt] = tuple(i for i, qi in enumerate(qs)
                                      if (qi * pt[0]).denominator == 1
                                      and (qi * pt[1]).denominator == 1)
    return sorted(poles.items())


def hybrid_ci_genus(n: int, r: int, qs, prec) -> QYSeries:
    """Hybrid phase of a complete intersection of degrees qs in P^{n-1}.

    The base is the weighted projective stack P(D, ..., D) (all degrees
    equal to D) and the fibers are O(-1)^n with the LG factor
    T(x + (1/D - 1)z + l)/T(x + z/D + l) y^beta.  The base is localized at the points u = alpha - beta tau
    where a coordinate section T(-q_i u) vanishes: coordinates with q_i u in
    the lattice give tangent roots R(-q_i h) on P^{|S|-1}, the others twisted
    roots of character (-q_i alpha, -q_i beta).  Each point is weighted by
    -1/prod_{i in S}(-q_i).
    """
    qs = tuple(int(q) for q in qs)
    if not qs or any(q < 1 for q in qs) or n < 1:
        raise ValidationError("need n >= 1 and positive degrees", n=n, qs=list(qs))
    if len(qs) != r:
        raise ValidationError("r must equal the number of degrees", r=r, qs=list(qs))
    d = reduce(gcd, qs)
    if any(q != d for q in qs):
        # unequal degrees force nonzero R-charges on the base coordinates
        raise Unsupported("hybrid model needs equal degrees", qs=list(qs))
    period = d
    poles = _weighted_poles(qs)
    inv_d = mpq(1, d)

    def compute(p):
        def one(pole):
            (alpha, beta), fixed = pole
            k = len(fixed)
            model = CohomologyModel([k])
            h = (ONE,)
            integrand = YFraction.of(XSeries.scalar(model, QYSeries.one()))
            weight = mpq(-1)
            for i, q in enumerate(qs):
                if i in fixed:
                    integrand = integrand * YFraction.of(root_factor((-q,), p, model))
                    weight /= -q
                else:
                    integrand = integrand * _quotient((-q,), -1, 0, -q * alpha, -q * beta,
                                                      p, model, period)
            fiber = _quotient(h, inv_d - 1, inv_d, alpha, beta, p, model, period)
            integrand = integrand * (fiber ** n)
            return integrand.integrate().scale(weight)
        parts = _map(one, poles)
        total = sum_fractions(parts) * _inverse_trivial_root(p)
        return _finish(total, ONE)
    return adaptive(compute, prec)


def _bidegree_hybrid(n: int, m: int, prec, fiber_scale) -> QYSeries:
    """(1/n) sum_{a,b < n} (T(-s h + (1/n - 1)z + (a - b tau)/n)
    / T(-s h + z/n + (a - b tau)/n) y^{b/n})^n  R(h)^m / R(0)  over P^{m-1}."""
    model = CohomologyModel([m])
    h = (ONE,)
    cx = (-as_rational(fiber_scale),)
    inv = mpq(1, n)

    def compute(p):
        def one(ab):
            a, b = ab
            fiber = _quotient(cx, inv - 1, inv, mpq(a, n), mpq(b, n), p, model, n)
            return (fiber ** n * root_factor(h, p, model) ** m).integrate()
        parts = _map(one, [(a, b) for a in range(n) for b in range(n)])
        total = sum_fractions(parts) * _inverse_trivial_root(p)
        return _finish(total, inv)
    return adaptive(compute, prec)


def bidegree_genera(n: int, m: int, prec) -> dict:
    """Genera of the three phases of a bidegree-(n, m) hypersurface in P^{n-1} x P^{m-1}.

    ``hybrid1`` is the mu_n-orbifold LG fibration over P^{m-1} (fiber root -m h),
    ``hybrid2`` the mu_m one over P^{n-1} (fiber root -n h).
    """
    if n < 2 or m < 2:
        raise ValidationError("need n, m >= 2", n=n, m=m)
    cy = ell_bidegree(n, m, prec)
    return {
        "cy": cy.series,
        "hybrid1": _bidegree_hybrid(n, m, prec, mpq(m, n)),
        "hybrid2": _bidegree_hybrid(m, n, prec, mpq(n, m)),
        "dim": cy.dim,
    }
