"""Reduced theta series and the quasi-Jacobi generators.

Everything is expressed through

    T(u) = (X^{1/2} - X^{-1/2}) prod_{n>=1} (1 - q^n X)(1 - q^n X^{-1}),   X = e^{2 pi i u},

which is the odd theta function with its transcendental prefactor and the
eta factor stripped off.  Quotients with as many thetas on top as below do
not see the stripped factors, so every genus below is assembled from T.

Arguments are ``l + s*z + (a - b*tau)/N`` with ``l`` a nilpotent linear form.
The tau-part is reduced with T(u - tau) = -q^{-1/2} e^{2 pi i u} T(u), so no
product factor with a non-positive q-power is ever expanded.

>>> t = t_series(3)
>>> t.q_slice(0)
QYSeries((-1)*q^0*y^-1/2 + (1)*q^0*y^1/2)
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from math import factorial, gcd

from gmpy2 import mpq

from .coeff import ONE, ZERO, CycNumber, as_rational, divisors
from .errors import NotInvertible, ThetaVanishes, Unsupported
from .series import (CohomologyModel, Precision, QYSeries, RootOfUnity, XSeries, YFraction,
                     as_precision, exp_nilpotent, invert, subst_monomial)

_lock = threading.RLock()
_cache: dict = {}


def _memo(key, build):
    with _lock:
        if key not in _cache:
            _cache[key] = build()
        return _cache[key]


def clear_cache():
    with _lock:
        _cache.clear()


def _floor(r: mpq) -> int:
    return int(r.numerator // r.denominator)


# ---------------------------------------------------------------------------
# products in X = e^{2 pi i u}; the X-exponent is stored in the y slot


def _pi_product(c: mpq, rel) -> QYSeries:
    """prod_{n>=1} (1 - q^{n-c} X)(1 - q^{n+c} X^{-1}) known up to q^rel, 0 <= c < 1."""
    def build():
        acc = QYSeries.one().truncate(rel)
        n = 1
        while n - c <= rel:
            acc = acc * QYSeries.from_dict({(0, 0): 1, (n - c, 1): -1})
            if n + c <= rel:
                acc = acc * QYSeries.from_dict({(0, 0): 1, (n + c, -1): -1})
            n += 1
        return acc
    return _memo(("pi", c, rel), build)


def _universal(beta: mpq, rel) -> QYSeries:
    """T at X q^{-beta} as a series in (q, X)."""
    def build():
        m = _floor(beta)
        c = beta - m
        half = mpq(1, 2)
        pre = QYSeries.from_dict({(-c / 2, half): 1, (c / 2, -half): -1})
        cocycle = QYSeries.monomial(-1 if m % 2 else 1, -m * c - mpq(m * m, 2), m)
        return cocycle * (pre * _pi_product(c, rel))
    return _memo(("U", beta, rel), build)


def _universal_inverse_unit(m: int, rel) -> QYSeries:
    """(-1)^m X^{1/2-m} q^{m^2/2} / prod(1 - q^n X)(1 - q^n X^{-1}).

    Multiplying by 1/(X - 1) gives 1/T at X q^{-m}.
    """
    def build():
        inv = invert(_pi_product(ZERO, rel))
        mono = QYSeries.monomial(-1 if m % 2 else 1, mpq(m * m, 2), mpq(1, 2) - m)
        return mono * inv
    return _memo(("V", m, rel), build)


def _derived(series_key, base: QYSeries, k: int) -> QYSeries:
    if k == 0:
        return base
    return _memo(("D", series_key, k), lambda: base.map_y_exponent_weight(k))


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ThetaArg:
    """The argument cx.x + cz*z + (a - b*tau)/n of a theta factor."""

    cx: tuple = ()
    cz: mpq = ZERO
    a: int = 0
    b: int = 0
    n: int = 1

    def __post_init__(self):
        object.__setattr__(self, "cx", tuple(as_rational(c) for c in self.cx))
        object.__setattr__(self, "cz", as_rational(self.cz))
        if self.n < 1:
            raise ValueError("shift denominator must be positive")

    @classmethod
    def from_shift(cls, cx=(), cz=0, alpha=0, beta=0) -> "ThetaArg":
        """Argument cx.x + cz*z + alpha - beta*tau for rational alpha, beta."""
        alpha, beta = as_rational(alpha), as_rational(beta)
        n = int(alpha.denominator) * int(beta.denominator) // gcd(int(alpha.denominator),
                                                                  int(beta.denominator))
        return cls(cx, cz, int(alpha * n), int(beta * n), n)

    def negated(self) -> "ThetaArg":
        return ThetaArg(tuple(-c for c in self.cx), -self.cz, -self.a, -self.b, self.n)

    def reduced(self):
        """(sign, arg) with 0 <= a < n, using T(u + 1) = -T(u)."""
        k, a = divmod(self.a, self.n)
        sign = -1 if k % 2 else 1
        return sign, ThetaArg(self.cx, self.cz, a, self.b, self.n)

    @property
    def tau_shift(self) -> mpq:
        return mpq(self.b, self.n)

    def has_nilpotent(self) -> bool:
        return any(self.cx)


def t_series(prec) -> QYSeries:
    """T(z) expanded to q^prec."""
    prec = as_precision(prec)
    return _universal(ZERO, prec.working).truncate(prec.q_order)


def eta_tilde(prec) -> QYSeries:
    """prod_{n>=1} (1 - q^n) to q^prec, via the pentagonal number theorem."""
    prec = as_precision(prec)
    bound = prec.q_order
    terms = {}
    k = 0
    while True:
        k += 1
        e1 = k * (3 * k - 1) // 2
        if e1 > bound:
            break
        s = -1 if k % 2 else 1
        terms[(e1, 0)] = s
        e2 = k * (3 * k + 1) // 2
        if e2 <= bound:
            terms[(e2, 0)] = s
    terms[(0, 0)] = 1
    return QYSeries.from_dict(terms, q_max=bound)


def g2_series(prec) -> QYSeries:
    """-1/24 + sum sigma_1(n) q^n."""
    prec = as_precision(prec)
    bound = _floor(prec.q_order)
    terms = {(0, 0): mpq(-1, 24)}
    for n in range(1, bound + 1):
        terms[(n, 0)] = sum(divisors(n))
    return QYSeries.from_dict(terms, q_max=prec.q_order)


def _nilpotent_taylor(model, cx, base_key, base: QYSeries, image, shift=0) -> XSeries:
    """sum_k l^k/k! * (D^{k+shift} base)(X -> image) with l = cx.x.

    ``image`` is (RootOfUnity or CycNumber, dy).
    """
    c, dy = image
    l_form = model.linear_form(cx) if model.rank else XSeries(model, {})
    power = XSeries.scalar(model, QYSeries.one())
    out = XSeries(model, {})
    for k in range(model.top_degree + 1):
        coeff = subst_monomial(_derived(base_key, base, k + shift), c, 0, dy)
        out = out + power.scale(coeff.scale(mpq(1, factorial(k + shift))))
        power = power * l_form
        if not power.coeffs:
            break
    return out


def _check_model(arg: ThetaArg, model):
    if model is None:
        if arg.has_nilpotent():
            raise ValueError("a nilpotent argument needs a cohomology model")
        return CohomologyModel(())
    if arg.cx and len(arg.cx) != model.rank:
        raise ValueError("argument length does not match the model rank")
    return model


def _cx(arg, model):
    return arg.cx if arg.cx else tuple([ZERO] * model.rank)


def theta_at(arg: ThetaArg, prec, model: CohomologyModel = None):
    """T(arg) as an XSeries over ``model`` (a QYSeries when no model is given)."""
    rel = as_precision(prec).working
    bare = model is None
    model = _check_model(arg, model)
    sign, arg = arg.reduced()
    beta = arg.tau_shift
    if arg.cz == 0 and not arg.has_nilpotent() and beta.denominator == 1 and arg.a == 0:
        raise ThetaVanishes("theta argument is a lattice point", arg=repr(arg))
    base = _universal(beta, rel)
    out = _nilpotent_taylor(model, _cx(arg, model), ("U", beta, rel), base,
                            (RootOfUnity(arg.a, arg.n), arg.cz))
    if sign < 0:
        out = -out
    return out.constant_term() if bare else out


def _invertible_constant(arg: ThetaArg) -> bool:
    c = arg.tau_shift - _floor(arg.tau_shift)
    if c:
        return True
    return arg.cz == 0 and arg.a % arg.n != 0


def theta_inverse(arg: ThetaArg, prec, model: CohomologyModel = None, period: int = None):
    """1/T(arg).

    Returns an XSeries when the constant term is a unit.  When the constant
    term is T(s*z + a/N) with s != 0 (not a unit: its q^0 slice has two
    y-monomials) the result is a YFraction over powers of (1 - y^t), where
    t = |s| * period and ``period`` (default: the order of e^{2 pi i a/N})
    must be a multiple of that order.  Sums over many sectors pass a common
    period so that all terms share one denominator.
    """
    rel = as_precision(prec).working
    bare = model is None
    model = _check_model(arg, model)
    sign, arg = arg.reduced()
    beta = arg.tau_shift
    if beta.denominator == 1 and arg.cz == 0 and arg.a == 0:
        if arg.has_nilpotent():
            raise NotInvertible("T(l) is nilpotent; use ell_over_theta", arg=repr(arg))
        raise ThetaVanishes("theta argument is a lattice point", arg=repr(arg))
    if _invertible_constant(arg):
        val = theta_at(arg, prec, model).inverse()
        if sign < 0:
            val = -val
        return val.constant_term() if bare else val
    m = int(beta)
    base = _universal_inverse_unit(m, rel)
    cx = _cx(arg, model)
    root = RootOfUnity(arg.a, arg.n)
    unit = _nilpotent_taylor(model, cx, ("V", m, rel), base, (root, arg.cz))
    # 1/(e^l Y - 1) with Y = zeta^a y^s
    y_mono = subst_monomial(QYSeries.monomial(1, 0, 1), root, 0, arg.cz)
    order = arg.n // gcd(arg.a, arg.n)
    if period is not None:
        if period % order:
            raise ValueError("period must be a multiple of the root order")
        order = period
    t = arg.cz * order
    geo = QYSeries.zero()
    yp = QYSeries.one()
    for _ in range(order):
        geo = geo + yp
        yp = yp * y_mono
    if t > 0:
        numer = -geo
    else:
        numer = geo.shift(0, -t)
        t = -t
    one_minus = QYSeries.from_dict({(0, 0): 1, (0, t): -1})
    if any(cx):
        l_form = model.linear_form(cx)
        delta = (exp_nilpotent(l_form) - XSeries.scalar(model, QYSeries.one())).scale(y_mono)
        depth = model.top_degree + 1
    else:
        delta = XSeries(model, {})
        depth = 1
    total = XSeries(model, {})
    term = XSeries.scalar(model, QYSeries.one())
    for j in range(depth):
        piece = term.scale(numer ** (j + 1) * one_minus ** (depth - 1 - j))
        total = total + piece
        term = -(term * delta)
        if not term.coeffs:
            break
    fr = YFraction(unit * total, {t: depth})
    if sign < 0:
        fr = -fr
    return fr


def theta_over_linear(cx, prec, model: CohomologyModel) -> XSeries:
    """T(l)/l for the nilpotent linear form l = cx.x; constant term is eta~^2."""
    rel = as_precision(prec).working
    base = _universal(ZERO, rel)
    return _nilpotent_taylor(model, tuple(as_rational(c) for c in cx), ("U", ZERO, rel), base,
                             (CycNumber.from_rational(1), 0), shift=1)


def linear_over_theta(cx, prec, model: CohomologyModel) -> XSeries:
    """l/T(l), the inverse of :func:`theta_over_linear`."""
    return theta_over_linear(cx, prec, model).inverse()


def theta_quotient(num: ThetaArg, den: ThetaArg, prec, model: CohomologyModel = None):
    """T(num)/T(den), an XSeries or a YFraction."""
    top = theta_at(num, prec, model if model is not None else None)
    bottom = theta_inverse(den, prec, model)
    if isinstance(bottom, YFraction):
        if not isinstance(top, XSeries):
            top = XSeries.scalar(CohomologyModel(()), top)
        return bottom * top
    return top * bottom


# ---------------------------------------------------------------------------
# quasi-Jacobi generators


@dataclass(frozen=True)
class QJacElement:
    """A series tagged with weight, depth (s, t) and a label."""

    value: QYSeries
    weight: int
    depth: tuple
    label: str

    def __mul__(self, other):
        if isinstance(other, QJacElement):
            return QJacElement(self.value * other.value, self.weight + other.weight,
                               (self.depth[0] + other.depth[0], self.depth[1] + other.depth[1]),
                               f"{self.label}*{other.label}")
        return QJacElement(self.value * other, self.weight, self.depth, self.label)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = self
        for _ in range(k - 1):
            out = out * self
        label = f"{self.label}^{k}"
        return QJacElement(out.value, out.weight, out.depth, label)


_DEPTHS = {1: (1, 0), 2: (0, 1), 3: (0, 0), 4: (0, 0)}


def _numerators(rel, upto: int):
    """N_1 = DT and N_{k+1} = -(1/k)(D N_k * T - k N_k * DT), so E_k = N_k/T^k."""
    def build():
        t = _universal(ZERO, rel)
        dt = t.derivative()
        nums = [None, dt]
        for k in range(1, 4):
            nk = nums[k]
            nums.append((nk.derivative() * t - (nk * dt).scale(k)).scale(mpq(-1, k)))
        return nums
    return _memo(("N", rel), build)[: upto + 1]


def qjacobi_generator(n: int, prec) -> QJacElement:
    """The weight-n generator E^_n of the quasi-Jacobi algebra, expanded to q^prec."""
    if n not in (1, 2, 3, 4):
        raise Unsupported("generator index must be 1..4", n=n)
    prec = as_precision(prec)
    rel = prec.working
    nums = _numerators(rel, n)
    eta = eta_tilde(Precision(rel))
    top = nums[n]
    if n == 2:
        t = _universal(ZERO, rel)
        top = top - (g2_series(Precision(rel)) * t * t).scale(2)
    value = top * invert(eta ** (2 * n))
    labels = {1: "E1", 2: "E2", 3: "E3", 4: "E4"}
    return QJacElement(value.truncate(prec.q_order), n, _DEPTHS[n], labels[n])
