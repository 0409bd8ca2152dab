"""Truncated bivariate Laurent series in q and y with rational exponents.

A :class:`QYSeries` stores a sparse map from scaled exponent pairs
``(alpha*M, beta*M)`` to nonzero coefficients in Q(zeta_N), together with
the truncation order ``q_max``: coefficients of q^alpha with
``alpha > q_max`` are unknown rather than zero.  ``q_max = None`` marks an
exact (untruncated) series such as a Laurent polynomial.

:class:`XSeries` adjoins nilpotent cohomology generators
``x_1..x_k`` with ``x_j^{n_j} = 0`` and QYSeries coefficients, and
:class:`YFraction` keeps a numerator over a product of factors
``(1 - y^m)^k`` until the final exact division.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product as iproduct
from math import gcd

import gmpy2
import numpy as np
from gmpy2 import mpq

from .coeff import (ONE, ZERO, CycNumber, as_rational, canonical_order, convert_coords,
                    descend_coords, field, fmt_rational, lcm, minimal_order)
from .errors import (BeyondTruncation, FractionalRootOfUnit, NotExact, NotInvertible,
                     ValidationError)

_KRONECKER_THRESHOLD = 3000


@dataclass(frozen=True)
class Precision:
    """Target truncation ``q_order`` plus ``guard`` orders carried internally."""

    q_order: mpq
    guard: mpq = ZERO

    def __post_init__(self):
        object.__setattr__(self, "q_order", as_rational(self.q_order))
        object.__setattr__(self, "guard", as_rational(self.guard))
        if self.q_order < 0 or self.guard < 0:
            raise ValidationError("precision orders must be non-negative")

    @property
    def working(self) -> mpq:
        return self.q_order + self.guard

    def widened(self, extra=1) -> "Precision":
        return Precision(self.q_order, self.guard + as_rational(extra))


def as_precision(prec) -> Precision:
    if isinstance(prec, Precision):
        return prec
    return Precision(as_rational(prec))


@dataclass(frozen=True)
class RootOfUnity:
    """exp(2 pi i k/n), with the branch y^beta = exp(2 pi i k beta/n) for rational beta."""

    k: int
    n: int

    def value(self) -> CycNumber:
        return CycNumber.root_of_unity(self.k, self.n)


# ---------------------------------------------------------------------------
# coefficient helpers: scalars (mpq) when N == 1, coordinate tuples otherwise


def _c_zero(c, n):
    return (not c) if n == 1 else (not any(c))


def _c_add(a, b, n):
    if n == 1:
        return a + b
    return tuple(x + y for x, y in zip(a, b))


def _c_neg(a, n):
    if n == 1:
        return -a
    return tuple(-x for x in a)


def _c_scale(a, r, n):
    if n == 1:
        return a * r
    return tuple(x * r for x in a)


def _c_mul(a, b, n):
    if n == 1:
        return a * b
    return field(n).mul(a, b)


def _c_from_cyc(c: CycNumber, n: int):
    if n == 1:
        if not c.is_rational():
            raise ValueError("irrational coefficient in a rational series")
        return c.coords[0]
    if c.is_rational():
        return field(n).from_rational(c.coords[0])
    return convert_coords(c.coords, c.order, n)


def _c_to_cyc(c, n) -> CycNumber:
    if n == 1:
        return CycNumber(1, (c,))
    return CycNumber(n, c).canonical()


def _convert_terms(terms, m_from, n_from, m_to, n_to):
    if m_from == m_to and n_from == n_to:
        return terms
    s = m_to // m_from
    if n_from == n_to:
        return {(qi * s, yi * s): c for (qi, yi), c in terms.items()}
    if n_from == 1:
        f = field(n_to)
        tail = f.zero[1:]
        return {(qi * s, yi * s): (c,) + tail for (qi, yi), c in terms.items()}
    return {(qi * s, yi * s): convert_coords(c, n_from, n_to) for (qi, yi), c in terms.items()}


def _scaled(r: mpq, m: int) -> int:
    v = r * m
    if v.denominator != 1:
        raise ValueError("exponent not representable over the common denominator")
    return int(v.numerator)


# ---------------------------------------------------------------------------
# multiplication kernels


def _mul_terms(at, bt, n, cut):
    """Product of two term maps over the same (M, N); drop q-index above ``cut``."""
    if not at or not bt:
        return {}
    if cut is not None:
        aq = min(k[0] for k in at)
        bq = min(k[0] for k in bt)
        at = {k: v for k, v in at.items() if k[0] + bq <= cut}
        bt = {k: v for k, v in bt.items() if k[0] + aq <= cut}
        if not at or not bt:
            return {}
    phi = 1 if n == 1 else field(n).phi
    if len(at) * len(bt) * phi * phi >= _KRONECKER_THRESHOLD and len(at) > 4 and len(bt) > 4:
        return _mul_kronecker(at, bt, n, cut)
    return _mul_loop(at, bt, n, cut)


def _mul_loop(at, bt, n, cut):
    if len(at) > len(bt):
        at, bt = bt, at
    groups = {}
    for (qb, yb), cb in bt.items():
        groups.setdefault(qb, []).append((yb, cb))
    keys = sorted(groups)
    res = {}
    if n == 1:
        for (qa, ya), ca in at.items():
            for qb in keys:
                q = qa + qb
                if cut is not None and q > cut:
                    break
                for yb, cb in groups[qb]:
                    k = (q, ya + yb)
                    v = res.get(k)
                    res[k] = ca * cb if v is None else v + ca * cb
        return {k: v for k, v in res.items() if v}
    f = field(n)
    phi = f.phi
    width = 2 * phi - 1
    for (qa, ya), ca in at.items():
        nz = [(i, x) for i, x in enumerate(ca) if x]
        for qb in keys:
            q = qa + qb
            if cut is not None and q > cut:
                break
            for yb, cb in groups[qb]:
                k = (q, ya + yb)
                acc = res.get(k)
                if acc is None:
                    acc = [ZERO] * width
                    res[k] = acc
                for j, y in enumerate(cb):
                    if y:
                        for i, x in nz:
                            acc[i + j] += x * y
    out = {}
    for k, acc in res.items():
        c = f.reduce(acc)
        if any(c):
            out[k] = c
    return out


def _to_integer_layout(terms, n):
    """Common denominator and integer coordinate lists."""
    den = 1
    if n == 1:
        for c in terms.values():
            d = int(c.denominator)
            if d != 1:
                den = lcm(den, d)
        ints = {k: (int(c * den),) for k, c in terms.items()}
    else:
        for c in terms.values():
            for x in c:
                d = int(x.denominator)
                if d != 1:
                    den = lcm(den, d)
        ints = {k: tuple(int(x * den) for x in c) for k, c in terms.items()}
    return den, ints


def _pack(ints, q0, y0, wy, w, nbytes):
    qmax = max(k[0] for k in ints)
    nslots = ((qmax - q0) * wy + wy) * w
    pos = bytearray(nslots * nbytes)
    neg = bytearray(nslots * nbytes)
    for (qi, yi), coords in ints.items():
        base = ((qi - q0) * wy + (yi - y0)) * w
        for j, v in enumerate(coords):
            if v:
                off = (base + j) * nbytes
                if v > 0:
                    pos[off:off + nbytes] = v.to_bytes(nbytes, "little")
                else:
                    neg[off:off + nbytes] = (-v).to_bytes(nbytes, "little")
    val = int.from_bytes(pos, "little") - int.from_bytes(neg, "little")
    return gmpy2.mpz(val), nslots


def _mul_kronecker(at, bt, n, cut):
    """Kronecker substitution: pack both operands into big integers and multiply once."""
    phi = 1 if n == 1 else field(n).phi
    w = 1 if phi == 1 else 2 * phi - 1
    den_a, ia = _to_integer_layout(at, n)
    den_b, ib = _to_integer_layout(bt, n)
    qa0 = min(k[0] for k in ia)
    qb0 = min(k[0] for k in ib)
    ya0 = min(k[1] for k in ia)
    ya1 = max(k[1] for k in ia)
    yb0 = min(k[1] for k in ib)
    yb1 = max(k[1] for k in ib)
    wy = (ya1 - ya0) + (yb1 - yb0) + 1
    max_a = max(abs(v) for c in ia.values() for v in c)
    max_b = max(abs(v) for c in ib.values() for v in c)
    bound = max_a * max_b * min(len(ia), len(ib)) * phi
    nbytes = (bound.bit_length() + 2 + 7) // 8
    a_val, na = _pack(ia, qa0, ya0, wy, w, nbytes)
    b_val, nb = _pack(ib, qb0, yb0, wy, w, nbytes)
    prod = int(a_val * b_val)
    nslots = na + nb
    pattern = b"\x00" * (nbytes - 1) + b"\x80"
    bias = int.from_bytes(pattern * nslots, "little")
    buf = (prod + bias).to_bytes(nslots * nbytes, "little")
    arr = np.frombuffer(buf, dtype=np.uint8).reshape(nslots, nbytes)
    pat = np.frombuffer(pattern, dtype=np.uint8)
    live = np.nonzero((arr != pat).any(axis=1))[0]
    half = 1 << (8 * nbytes - 1)
    den = den_a * den_b
    gathered = {}
    for i in live.tolist():
        v = int.from_bytes(buf[i * nbytes:(i + 1) * nbytes], "little") - half
        j = i % w
        rest = i // w
        q = rest // wy + qa0 + qb0
        if cut is not None and q > cut:
            continue
        y = rest % wy + ya0 + yb0
        if phi == 1:
            gathered[(q, y)] = v
        else:
            acc = gathered.get((q, y))
            if acc is None:
                acc = [0] * w
                gathered[(q, y)] = acc
            acc[j] = v
    out = {}
    if phi == 1:
        for k, v in gathered.items():
            if v:
                out[k] = mpq(v, den)
        return out
    f = field(n)
    table = f.table
    for k, acc in gathered.items():
        red = acc[:phi]
        for j in range(phi, w):
            c = acc[j]
            if c:
                row = table[j]
                for i in range(phi):
                    if row[i]:
                        red[i] += c * row[i]
        if any(red):
            out[k] = tuple(mpq(x, den) for x in red)
    return out


# ---------------------------------------------------------------------------


def _min_qmax(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return a if a <= b else b


class QYSeries:
    """Immutable truncated series sum c(alpha, beta) q^alpha y^beta."""

    __slots__ = ("_terms", "M", "N", "q_max")

    def __init__(self, terms=None, q_max=None):
        """Build from a mapping ``{(alpha, beta): coefficient}`` with rational exponents."""
        built = QYSeries.from_dict(terms or {}, q_max=q_max)
        object.__setattr__(self, "_terms", built._terms)
        object.__setattr__(self, "M", built.M)
        object.__setattr__(self, "N", built.N)
        object.__setattr__(self, "q_max", built.q_max)

    def __setattr__(self, name, value):
        raise AttributeError("QYSeries is immutable")

    # -- construction -----------------------------------------------------

    @classmethod
    def _raw(cls, terms, m, n, q_max, check_order=False):
        """Internal constructor: canonicalize M, N and drop truncated terms."""
        if q_max is not None:
            q_max = as_rational(q_max)
            lim = q_max * m
            if any(qi > lim for qi, _ in terms):
                terms = {k: v for k, v in terms.items() if k[0] <= lim}
        if n != 1:
            if n % 4 == 2:
                half = n // 2
                terms = {k: convert_coords(c, n, half) for k, c in terms.items()}
                n = half
            if all(not any(c[1:]) for c in terms.values()):
                terms = {k: c[0] for k, c in terms.items()}
                n = 1
            elif check_order:
                d = minimal_order(list(terms.values()), n)
                if d != n:
                    terms = {k: descend_coords(c, n, d) for k, c in terms.items()}
                    n = d
        g = m
        for qi, yi in terms:
            g = gcd(g, gcd(qi, yi))
            if g == 1:
                break
        if g > 1:
            terms = {(qi // g, yi // g): c for (qi, yi), c in terms.items()}
            m //= g
        if not terms:
            m = 1
            if n != 1:
                n = 1
        obj = object.__new__(cls)
        object.__setattr__(obj, "_terms", terms)
        object.__setattr__(obj, "M", m)
        object.__setattr__(obj, "N", n)
        object.__setattr__(obj, "q_max", q_max)
        return obj

    @classmethod
    def from_dict(cls, terms, q_max=None) -> "QYSeries":
        rat = {}
        m = 1
        n = 1
        for (alpha, beta), c in dict(terms).items():
            alpha, beta = as_rational(alpha), as_rational(beta)
            c = CycNumber.coerce(c)
            if c.is_zero():
                continue
            m = lcm(m, lcm(int(alpha.denominator), int(beta.denominator)))
            n = lcm(n, canonical_order(c.order))
            key = (alpha, beta)
            rat[key] = rat[key] + c if key in rat else c
        n = canonical_order(n)
        raw = {}
        for (alpha, beta), c in rat.items():
            if c.is_zero():
                continue
            raw[(_scaled(alpha, m), _scaled(beta, m))] = _c_from_cyc(c, n)
        return cls._raw(raw, m, n, q_max, check_order=True)

    @classmethod
    def zero(cls, q_max=None) -> "QYSeries":
        return cls._raw({}, 1, 1, q_max)

    @classmethod
    def one(cls) -> "QYSeries":
        return cls._raw({(0, 0): ONE}, 1, 1, None)

    @classmethod
    def constant(cls, c, q_max=None) -> "QYSeries":
        return cls.monomial(c, 0, 0, q_max)

    @classmethod
    def monomial(cls, c, alpha=0, beta=0, q_max=None) -> "QYSeries":
        return cls.from_dict({(alpha, beta): c}, q_max=q_max)

    # -- inspection -------------------------------------------------------

    @property
    def exp_denom(self) -> int:
        return self.M

    @property
    def cyc_order(self) -> int:
        return self.N

    @property
    def q_min(self) -> mpq:
        if self._terms:
            return mpq(min(k[0] for k in self._terms), self.M)
        if self.q_max is not None:
            return self.q_max
        return ZERO

    def is_exact(self) -> bool:
        return self.q_max is None

    def is_zero(self) -> bool:
        return not self._terms

    def __len__(self):
        return len(self._terms)

    def __bool__(self):
        return bool(self._terms)

    def items(self):
        """Yield ``(alpha, beta, CycNumber)`` sorted by exponents."""
        m, n = self.M, self.N
        for (qi, yi) in sorted(self._terms):
            yield mpq(qi, m), mpq(yi, m), _c_to_cyc(self._terms[(qi, yi)], n)

    def support(self):
        return [(mpq(qi, self.M), mpq(yi, self.M)) for qi, yi in sorted(self._terms)]

    def coefficient(self, alpha, beta) -> CycNumber:
        alpha, beta = as_rational(alpha), as_rational(beta)
        if self.q_max is not None and alpha > self.q_max:
            raise BeyondTruncation(f"q^{fmt_rational(alpha)} lies beyond the truncation order",
                                   alpha=fmt_rational(alpha), qMax=fmt_rational(self.q_max))
        qa, yb = alpha * self.M, beta * self.M
        if qa.denominator != 1 or yb.denominator != 1:
            return CycNumber.from_rational(0)
        c = self._terms.get((int(qa), int(yb)))
        if c is None:
            return CycNumber.from_rational(0)
        return _c_to_cyc(c, self.N)

    def q_exponents(self):
        return sorted({mpq(qi, self.M) for qi, _ in self._terms})

    def q_slice(self, alpha) -> "QYSeries":
        """The q^alpha slice as an exact Laurent polynomial in y (q-exponent 0)."""
        alpha = as_rational(alpha)
        if self.q_max is not None and alpha > self.q_max:
            raise BeyondTruncation("slice beyond truncation order", alpha=fmt_rational(alpha))
        qa = alpha * self.M
        if qa.denominator != 1:
            return QYSeries.zero()
        qi0 = int(qa)
        terms = {(0, yi): c for (qi, yi), c in self._terms.items() if qi == qi0}
        return QYSeries._raw(terms, self.M, self.N, None, check_order=True)

    def y_range(self):
        ys = [yi for _, yi in self._terms]
        if not ys:
            return None
        return mpq(min(ys), self.M), mpq(max(ys), self.M)

    def is_rational(self) -> bool:
        return self.N == 1

    # -- arithmetic -------------------------------------------------------

    def _common(self, other):
        m = lcm(self.M, other.M)
        n = canonical_order(lcm(self.N, other.N))
        return (m, n, _convert_terms(self._terms, self.M, self.N, m, n),
                _convert_terms(other._terms, other.M, other.N, m, n))

    @staticmethod
    def coerce(x) -> "QYSeries":
        if isinstance(x, QYSeries):
            return x
        return QYSeries.constant(CycNumber.coerce(x))

    def __add__(self, other):
        other = QYSeries.coerce(other)
        m, n, at, bt = self._common(other)
        res = dict(at)
        for k, c in bt.items():
            v = res.get(k)
            if v is None:
                res[k] = c
            else:
                s = _c_add(v, c, n)
                if _c_zero(s, n):
                    del res[k]
                else:
                    res[k] = s
        return QYSeries._raw(res, m, n, _min_qmax(self.q_max, other.q_max))

    __radd__ = __add__

    def __neg__(self):
        n = self.N
        return QYSeries._raw({k: _c_neg(c, n) for k, c in self._terms.items()},
                             self.M, n, self.q_max)

    def __sub__(self, other):
        return self + (-QYSeries.coerce(other))

    def __rsub__(self, other):
        return QYSeries.coerce(other) - self

    def scale(self, r) -> "QYSeries":
        """Multiply by a scalar (rational or CycNumber)."""
        if isinstance(r, CycNumber) and not r.is_rational():
            return self * QYSeries.constant(r)
        r = as_rational(r) if not isinstance(r, CycNumber) else r.coords[0]
        if not r:
            return QYSeries.zero(self.q_max)
        n = self.N
        return QYSeries._raw({k: _c_scale(c, r, n) for k, c in self._terms.items()},
                             self.M, n, self.q_max)

    def __mul__(self, other):
        if not isinstance(other, QYSeries):
            try:
                return self.scale(other)
            except TypeError:
                return NotImplemented
        return mul(self, other)

    def __rmul__(self, other):
        return self.__mul__(other)

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return invert(self) ** (-k)
        result = QYSeries.one()
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def shift(self, alpha=0, beta=0) -> "QYSeries":
        """Multiply by the monomial q^alpha y^beta."""
        alpha, beta = as_rational(alpha), as_rational(beta)
        m = lcm(self.M, lcm(int(alpha.denominator), int(beta.denominator)))
        s = m // self.M
        da, db = _scaled(alpha, m), _scaled(beta, m)
        terms = {(qi * s + da, yi * s + db): c for (qi, yi), c in self._terms.items()}
        qm = None if self.q_max is None else self.q_max + alpha
        return QYSeries._raw(terms, m, self.N, qm)

    def truncate(self, q_max) -> "QYSeries":
        q_max = as_rational(q_max)
        return QYSeries._raw(dict(self._terms), self.M, self.N, _min_qmax(self.q_max, q_max))

    def with_exact(self) -> "QYSeries":
        """Forget the truncation marker (caller asserts the series is a polynomial)."""
        return QYSeries._raw(dict(self._terms), self.M, self.N, None)

    def derivative(self) -> "QYSeries":
        """D = y d/dy: multiply each coefficient by its y-exponent."""
        m, n = self.M, self.N
        terms = {}
        for (qi, yi), c in self._terms.items():
            if yi:
                terms[(qi, yi)] = _c_scale(c, mpq(yi, m), n)
        return QYSeries._raw(terms, m, n, self.q_max)

    def map_y_exponent_weight(self, k: int) -> "QYSeries":
        """Multiply each coefficient by beta^k."""
        if k == 0:
            return self
        m, n = self.M, self.N
        terms = {}
        for (qi, yi), c in self._terms.items():
            if yi:
                terms[(qi, yi)] = _c_scale(c, mpq(yi, m) ** k, n)
        return QYSeries._raw(terms, m, n, self.q_max)

    def canonical(self) -> "QYSeries":
        return QYSeries._raw(dict(self._terms), self.M, self.N, self.q_max, check_order=True)

    def rational_coefficients(self) -> bool:
        """True when every coefficient lies in Q (the series collapses to N = 1)."""
        return self.canonical().N == 1

    def at_y_one(self) -> "QYSeries":
        """Substitute y = 1."""
        return subst_monomial(self, CycNumber.from_rational(1), 0, 0)

    # -- comparison -------------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, QYSeries):
            try:
                other = QYSeries.coerce(other)
            except (TypeError, ValueError):
                return NotImplemented
        if self.q_max != other.q_max:
            return False
        _, _, at, bt = self._common(other)
        return at == bt

    def __hash__(self):
        c = self.canonical()
        return hash((c.M, c.N, c.q_max, frozenset(c._terms.items())))

    def agrees_with(self, other, upto=None) -> bool:
        """Equal coefficients for all q-exponents up to ``upto`` (default: common truncation)."""
        other = QYSeries.coerce(other)
        bound = _min_qmax(self.q_max, other.q_max)
        if upto is not None:
            upto = as_rational(upto)
            if bound is not None and upto > bound:
                raise BeyondTruncation("comparison order exceeds available truncation",
                                       upto=fmt_rational(upto), available=fmt_rational(bound))
            bound = upto
        return first_difference(self, other, bound) is None

    def __repr__(self):
        parts = []
        for alpha, beta, c in list(self.items())[:12]:
            parts.append(f"({_fmt_c(c)})*q^{fmt_rational(alpha)}*y^{fmt_rational(beta)}")
        if len(self._terms) > 12:
            parts.append("...")
        body = " + ".join(parts) or "0"
        tail = "" if self.q_max is None else f" + O(q^{fmt_rational(self.q_max)})"
        return f"QYSeries({body}{tail})"

    # -- serialization ----------------------------------------------------

    def to_json(self) -> dict:
        s = self.canonical()
        terms = []
        for (qi, yi) in sorted(s._terms):
            c = s._terms[(qi, yi)]
            coeff = fmt_rational(c) if s.N == 1 else CycNumber(s.N, c).to_json()
            terms.append([qi, yi, coeff])
        return {
            "expDenom": s.M,
            "cycOrder": s.N,
            "qMax": None if s.q_max is None else fmt_rational(s.q_max),
            "terms": terms,
        }

    @classmethod
    def from_json(cls, obj) -> "QYSeries":
        m = int(obj["expDenom"])
        q_max = obj.get("qMax")
        terms = {}
        for qi, yi, coeff in obj["terms"]:
            key = (mpq(int(qi), m), mpq(int(yi), m))
            terms[key] = CycNumber.from_json(coeff)
        return cls.from_dict(terms, q_max=None if q_max is None else as_rational(q_max))


def _fmt_c(c: CycNumber) -> str:
    if c.is_rational():
        return fmt_rational(c.coords[0])
    return repr(c)[10:-1]


def first_difference(a: QYSeries, b: QYSeries, upto=None):
    """First monomial (alpha, beta, a_coeff, b_coeff) where a and b differ up to ``upto``."""
    m = lcm(a.M, b.M)
    n = canonical_order(lcm(a.N, b.N))
    at = _convert_terms(a._terms, a.M, a.N, m, n)
    bt = _convert_terms(b._terms, b.M, b.N, m, n)
    lim = None if upto is None else as_rational(upto) * m
    keys = sorted(set(at) | set(bt))
    zero = ZERO if n == 1 else field(n).zero
    for k in keys:
        if lim is not None and k[0] > lim:
            break
        x, y = at.get(k, zero), bt.get(k, zero)
        if x != y:
            return (mpq(k[0], m), mpq(k[1], m), _c_to_cyc(x, n), _c_to_cyc(y, n))
    return None


# ---------------------------------------------------------------------------
# module-level operations


def mul(a: QYSeries, b: QYSeries) -> QYSeries:
    """Product with honest truncation min(a.qMax + b.qMin, b.qMax + a.qMin)."""
    m = lcm(a.M, b.M)
    n = canonical_order(lcm(a.N, b.N))
    at = _convert_terms(a._terms, a.M, a.N, m, n)
    bt = _convert_terms(b._terms, b.M, b.N, m, n)
    q_max = None
    if a.q_max is not None:
        q_max = a.q_max + b.q_min
    if b.q_max is not None:
        q_max = _min_qmax(q_max, b.q_max + a.q_min)
    cut = None
    if q_max is not None:
        v = q_max * m
        cut = int(v.numerator // v.denominator)
    return QYSeries._raw(_mul_terms(at, bt, n, cut), m, n, q_max)


def _leading(a: QYSeries):
    if not a._terms:
        raise NotInvertible("cannot invert the zero series")
    q0 = min(k[0] for k in a._terms)
    lead = [(k, c) for k, c in a._terms.items() if k[0] == q0]
    if len(lead) != 1:
        raise NotInvertible("leading q-slice is not a single monomial",
                            leading=[[fmt_rational(mpq(k[1], a.M))] for k, _ in lead])
    return lead[0]


def invert(a: QYSeries) -> QYSeries:
    """Inverse of a monomial-leading series, truncated consistently with ``a``."""
    (q0, y0), c = _leading(a)
    m, n = a.M, a.N
    cinv = (1 / c) if n == 1 else field(n).inv(c)
    # u = a / (c q^q0 y^y0) = 1 + v with v of positive q-order
    u_terms = {(qi - q0, yi - y0): _c_mul(x, cinv, n) for (qi, yi), x in a._terms.items()}
    lead_inv = QYSeries._raw({(-q0, -y0): cinv}, m, n, None)
    if a.q_max is None:
        if len(u_terms) == 1:
            return lead_inv
        raise NotInvertible("inverse of an exact non-monomial series needs a truncation order")
    rel = a.q_max - mpq(q0, m)
    u = QYSeries._raw(u_terms, m, n, rel)
    w = _newton_inverse(u, rel)
    return mul(w, lead_inv)


def _newton_inverse(u: QYSeries, rel) -> QYSeries:
    """Inverse of u = 1 + (positive q-order) to absolute precision ``rel``."""
    pos = [qi for qi, _ in u._terms if qi > 0]
    w = QYSeries.one()
    if not pos:
        return w.truncate(rel)
    # w is exact below ``good``; each Newton step doubles it
    good = mpq(min(pos), u.M)
    while good <= rel:
        good = 2 * good
        bound = good if good < rel else rel
        ut = u.truncate(bound)
        e = QYSeries.one() - (ut * w.with_exact()).truncate(bound)
        w = (w.with_exact() + (w.with_exact() * e)).truncate(bound)
    return w.truncate(rel)


def derivative(a: QYSeries) -> QYSeries:
    return a.derivative()


def d_log(a: QYSeries) -> QYSeries:
    """D(a)/a with D = y d/dy, for monomial-leading a."""
    return mul(a.derivative(), invert(a))


def coefficient(a: QYSeries, alpha, beta) -> CycNumber:
    return a.coefficient(alpha, beta)


def subst_monomial(a: QYSeries, c, dq=0, dy=1, tail_index=None) -> QYSeries:
    """Substitute y -> c q^dq y^dy.

    ``c`` is a :class:`RootOfUnity` (fractional powers use the branch
    exp(2 pi i k beta/n)) or a CycNumber/rational, in which case every
    y-exponent must be an integer unless c == 1.

    When dq != 0 the unknown tail beyond ``q_max`` can move below it.  By
    default the tail is assumed to keep the y-range of the stored support,
    giving ``q_max + min(0, min beta*dq)``.  Passing ``tail_index=t`` instead
    assumes the weak-Jacobi support bound beta^2 <= 4 t alpha + t^2 on the
    tail, which is what theta series (t = 1/2) and genera of dimension d
    (t = d/2) satisfy; the result is then honest for those inputs.
    """
    dq, dy = as_rational(dq), as_rational(dy)
    m = a.M
    m2 = lcm(m * int(dq.denominator), m * int(dy.denominator))
    s = m2 // m
    dq_num = dq * m2
    dy_num = dy * m2
    # coefficient factor c^beta
    if isinstance(c, RootOfUnity):
        root_n = m * c.n
        target = canonical_order(lcm(a.N, root_n))
        big = lcm(target, root_n)
        scale_pow = big // root_n

        def factor(yi):
            k = (c.k * yi * scale_pow) % big
            return field(big).power(k) if big > 1 else (ONE,)
        work_n = big
    else:
        cv = CycNumber.coerce(c)
        one = cv == 1
        work_n = canonical_order(lcm(a.N, canonical_order(cv.order)))
        cv_coords = _c_from_cyc(cv, work_n) if work_n > 1 else (cv.coords[0],)
        cache = {}

        def factor(yi):
            if one:
                return None
            if yi % m:
                raise FractionalRootOfUnit("fractional power of a coefficient without a branch",
                                           beta=fmt_rational(mpq(yi, m)))
            e = yi // m
            if e not in cache:
                cache[e] = _cyc_pow(cv_coords, e, work_n)
            return cache[e]
    terms = {}
    shift_min = ZERO
    for (qi, yi), x in a._terms.items():
        beta_dq = mpq(yi, m) * dq
        if beta_dq < shift_min:
            shift_min = beta_dq
        nq = qi * s + int(yi * dq_num / m) if dq else qi * s
        ny = int(yi * dy_num / m) if dy else 0
        if work_n == 1:
            f = factor(yi)
            val = x if f is None else x * f[0]
            key = (nq, ny)
            prev = terms.get(key)
            terms[key] = val if prev is None else prev + val
        else:
            xv = x if a.N == work_n else _c_lift(x, a.N, work_n)
            f = factor(yi)
            val = xv if f is None else field(work_n).mul(xv, f)
            key = (nq, ny)
            prev = terms.get(key)
            terms[key] = val if prev is None else field(work_n).add(prev, val)
    terms = {k: v for k, v in terms.items() if not _c_zero(v, work_n)}
    if a.q_max is None:
        q_max = None
    elif tail_index is not None and dq:
        q_max = _tail_bound(a.q_max, abs(dq), as_rational(tail_index), m2)
    else:
        q_max = a.q_max + shift_min
    return QYSeries._raw(terms, m2, work_n, q_max, check_order=True)


def _tail_bound(q_max, s, t, m):
    """Lower bound of alpha - s*sqrt(4 t alpha + t^2) over alpha > q_max, rounded down to 1/m."""
    if t == 0:
        return q_max
    turn = t * (4 * s * s - 1) / 4
    if q_max >= turn:
        x = 4 * t * q_max + t * t
        scale = 1 << 40
        num = x.numerator * x.denominator * scale * scale
        root = gmpy2.isqrt(num)
        if root * root < num:
            root += 1
        bound = q_max - s * mpq(int(root), int(x.denominator) * scale)
    else:
        bound = -t * (4 * s * s + 1) / 4
    v = bound * m
    return mpq(int(v.numerator // v.denominator), m)


def _c_lift(x, n_from, n_to):
    if n_from == 1:
        return field(n_to).from_rational(x)
    return convert_coords(x, n_from, n_to)


def _cyc_pow(coords, e, n):
    f = field(n) if n > 1 else None
    if n == 1:
        return ((coords[0] ** e) if e >= 0 else (1 / coords[0]) ** (-e),)
    base = coords if e >= 0 else f.inv(coords)
    e = abs(e)
    result = f.one
    while e:
        if e & 1:
            result = f.mul(result, base)
        e >>= 1
        if e:
            base = f.mul(base, base)
    return result


def divide_one_minus_y(a: QYSeries, m, k: int = 1) -> QYSeries:
    """Exact quotient a / (1 - y^m)^k, slice by slice; NotExact on a remainder."""
    m = as_rational(m)
    if m <= 0:
        raise ValueError("m must be positive")
    big = lcm(a.M, int(m.denominator))
    terms = _convert_terms(a._terms, a.M, a.N, big, a.N)
    step = _scaled(m, big)
    n = a.N
    for _ in range(k):
        classes = {}
        for (qi, yi), c in terms.items():
            classes.setdefault((qi, yi % step), []).append((yi, c))
        out = {}
        for (qi, _r), items in classes.items():
            items.sort()
            lo, hi = items[0][0], items[-1][0]
            vals = dict(items)
            run = ZERO if n == 1 else field(n).zero
            yi = lo
            while yi <= hi:
                c = vals.get(yi)
                if c is not None:
                    run = _c_add(run, c, n)
                if yi > hi - step:
                    if not _c_zero(run, n):
                        raise NotExact("series is not divisible by (1 - y^m)",
                                       m=fmt_rational(m), q=fmt_rational(mpq(qi, big)))
                elif not _c_zero(run, n):
                    out[(qi, yi)] = run
                yi += step
        terms = out
    return QYSeries._raw(terms, big, n, a.q_max)


def one_minus_y(m, k: int = 1) -> QYSeries:
    base = QYSeries.from_dict({(0, 0): 1, (0, m): -1})
    return base ** k


# ---------------------------------------------------------------------------
# nilpotent extension


class CohomologyModel:
    """Truncated polynomial ring Q[x_1..x_k]/(x_j^{n_j}), i.e. H* of a product of P^{n_j - 1}.

    ``integrate`` extracts the coefficient of prod x_j^{n_j - 1}.
    """

    __slots__ = ("dims",)

    def __init__(self, dims=()):
        dims = tuple(int(d) for d in dims)
        if any(d < 1 for d in dims):
            raise ValidationError("model dimensions must be positive", dims=list(dims))
        object.__setattr__(self, "dims", dims)

    def __setattr__(self, name, value):
        raise AttributeError("CohomologyModel is immutable")

    def __eq__(self, other):
        return isinstance(other, CohomologyModel) and self.dims == other.dims

    def __hash__(self):
        return hash(self.dims)

    def __repr__(self):
        return f"CohomologyModel({list(self.dims)})"

    @property
    def rank(self) -> int:
        return len(self.dims)

    @property
    def top(self) -> tuple:
        return tuple(d - 1 for d in self.dims)

    @property
    def top_degree(self) -> int:
        return sum(self.top)

    @property
    def dimension(self) -> int:
        return self.top_degree

    def monomials(self):
        return list(iproduct(*[range(d) for d in self.dims]))

    def generator(self, j: int) -> "XSeries":
        if self.dims[j] == 1:
            return XSeries(self, {})
        e = tuple(1 if i == j else 0 for i in range(self.rank))
        return XSeries(self, {e: QYSeries.one()})

    def linear_form(self, coeffs) -> "XSeries":
        """sum_j coeffs[j] * x_j."""
        coeffs = [as_rational(c) for c in coeffs]
        if len(coeffs) != self.rank:
            raise ValidationError("linear form length does not match the model rank")
        out = {}
        for j, c in enumerate(coeffs):
            if c and self.dims[j] > 1:
                e = tuple(1 if i == j else 0 for i in range(self.rank))
                out[e] = QYSeries.constant(c)
        return XSeries(self, out)

    def integrate(self, x: "XSeries") -> QYSeries:
        if x.model != self:
            raise ValidationError("class belongs to a different model")
        return x.coeffs.get(self.top, QYSeries.zero(x.q_max_hint()))


class XSeries:
    """Polynomial in nilpotent generators with QYSeries coefficients."""

    __slots__ = ("model", "coeffs")

    def __init__(self, model: CohomologyModel, coeffs=None):
        clean = {}
        for e, c in (coeffs or {}).items():
            e = tuple(e)
            if any(ei >= d for ei, d in zip(e, model.dims)):
                continue
            if c.is_zero() and c.q_max is None:
                continue
            clean[e] = c
        self.model = model
        self.coeffs = clean

    @classmethod
    def scalar(cls, model: CohomologyModel, s: QYSeries) -> "XSeries":
        return cls(model, {tuple([0] * model.rank): QYSeries.coerce(s)})

    def constant_term(self) -> QYSeries:
        return self.coeffs.get(tuple([0] * self.model.rank), QYSeries.zero(self.q_max_hint()))

    def q_max_hint(self):
        qm = None
        for c in self.coeffs.values():
            qm = _min_qmax(qm, c.q_max)
        return qm

    def __repr__(self):
        return f"XSeries({self.model!r}, {self.coeffs!r})"

    def __add__(self, other):
        if not isinstance(other, XSeries):
            other = XSeries.scalar(self.model, QYSeries.coerce(other))
        out = dict(self.coeffs)
        for e, c in other.coeffs.items():
            out[e] = out[e] + c if e in out else c
        return XSeries(self.model, out)

    __radd__ = __add__

    def __neg__(self):
        return XSeries(self.model, {e: -c for e, c in self.coeffs.items()})

    def __sub__(self, other):
        if not isinstance(other, XSeries):
            other = XSeries.scalar(self.model, QYSeries.coerce(other))
        return self + (-other)

    def scale(self, s) -> "XSeries":
        if isinstance(s, QYSeries):
            return XSeries(self.model, {e: c * s for e, c in self.coeffs.items()})
        return XSeries(self.model, {e: c.scale(s) for e, c in self.coeffs.items()})

    def __mul__(self, other):
        if not isinstance(other, XSeries):
            return self.scale(other)
        dims = self.model.dims
        out = {}
        for e1, c1 in self.coeffs.items():
            for e2, c2 in other.coeffs.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                if any(ei >= d for ei, d in zip(e, dims)):
                    continue
                p = c1 * c2
                out[e] = out[e] + p if e in out else p
        return XSeries(self.model, out)

    def __rmul__(self, other):
        return self.scale(other)

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        result = XSeries.scalar(self.model, QYSeries.one())
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def nilpotent_part(self) -> "XSeries":
        z = tuple([0] * self.model.rank)
        return XSeries(self.model, {e: c for e, c in self.coeffs.items() if e != z})

    def inverse(self) -> "XSeries":
        """Inverse when the constant term is an invertible QYSeries."""
        c0 = self.constant_term()
        inv0 = invert(c0)
        r = self.nilpotent_part().scale(inv0)
        total = XSeries.scalar(self.model, QYSeries.one())
        term = total
        for _ in range(self.model.top_degree):
            term = -(term * r)
            if not term.coeffs:
                break
            total = total + term
        return total.scale(inv0)

    def integrate(self) -> QYSeries:
        return self.model.integrate(self)

    def map(self, fn) -> "XSeries":
        return XSeries(self.model, {e: fn(c) for e, c in self.coeffs.items()})


def exp_nilpotent(x: XSeries) -> XSeries:
    """exp of a nilpotent class, truncated by the model."""
    total = XSeries.scalar(x.model, QYSeries.one())
    term = total
    for k in range(1, x.model.top_degree + 1):
        term = (term * x).scale(mpq(1, k))
        if not term.coeffs:
            break
        total = total + term
    return total


class YFraction:
    """numerator / prod_m (1 - y^m)^k_m with a nilpotent-extended numerator."""

    __slots__ = ("num", "den")

    def __init__(self, num: XSeries, den=None):
        self.num = num
        self.den = {as_rational(m): int(k) for m, k in (den or {}).items() if k}

    @classmethod
    def of(cls, x) -> "YFraction":
        return x if isinstance(x, YFraction) else cls(x, {})

    def __mul__(self, other):
        other = YFraction.of(other) if isinstance(other, (XSeries, YFraction)) else other
        if not isinstance(other, YFraction):
            return YFraction(self.num.scale(other), self.den)
        den = dict(self.den)
        for m, k in other.den.items():
            den[m] = den.get(m, 0) + k
        return YFraction(self.num * other.num, den)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        result = YFraction(XSeries.scalar(self.num.model, QYSeries.one()), {})
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def scale(self, s) -> "YFraction":
        return YFraction(self.num.scale(s), self.den)

    def __add__(self, other):
        other = YFraction.of(other)
        den = dict(self.den)
        for m, k in other.den.items():
            den[m] = max(den.get(m, 0), k)
        return YFraction(_lift_num(self, den) + _lift_num(other, den), den)

    def __neg__(self):
        return YFraction(-self.num, self.den)

    def __sub__(self, other):
        return self + (-YFraction.of(other))

    def integrate(self) -> "YFraction":
        point = CohomologyModel(())
        return YFraction(XSeries.scalar(point, self.num.integrate()), self.den)

    def value(self) -> QYSeries:
        """Exact division of an integrated (scalar) fraction."""
        s = self.num.constant_term() if self.num.model.rank == 0 else None
        if s is None:
            raise ValidationError("only integrated fractions have a series value")
        for m in sorted(self.den):
            s = divide_one_minus_y(s, m, self.den[m])
        return s


def _lift_num(fr: YFraction, den) -> XSeries:
    num = fr.num
    extra = QYSeries.one()
    for m, k in den.items():
        d = k - fr.den.get(m, 0)
        if d:
            extra = extra * one_minus_y(m, d)
    if len(extra) == 1 and extra.coefficient(0, 0) == 1:
        return num
    return num.scale(extra)


def sum_fractions(items) -> YFraction:
    """Sum YFractions grouping equal denominators first (fewer lifts)."""
    groups = {}
    order = []
    for fr in items:
        key = tuple(sorted(fr.den.items()))
        if key not in groups:
            groups[key] = fr
            order.append(key)
        else:
            groups[key] = YFraction(groups[key].num + fr.num, groups[key].den)
    total = None
    for key in order:
        total = groups[key] if total is None else total + groups[key]
    return total
