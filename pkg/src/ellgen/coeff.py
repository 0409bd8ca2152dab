"""Exact coefficient arithmetic.

Rationals are ``gmpy2.mpq`` values.  Elements of the cyclotomic field
Q(zeta_N) are stored as coordinate vectors in the power basis
1, zeta, ..., zeta^(phi(N)-1), reduced modulo the N-th cyclotomic
polynomial, so equality is decided coordinate by coordinate.

>>> z3 = CycNumber.root_of_unity(1, 3)
>>> (z3 + z3 * z3 + 1).is_zero()
True
>>> cyc_try_rational(CycNumber.root_of_unity(1, 6) + CycNumber.root_of_unity(-1, 6))
mpq(1,1)
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import gcd

from gmpy2 import mpq

from .errors import IncompatibleOrder, NotInvertible, NotRational

ZERO = mpq(0)
ONE = mpq(1)


def as_rational(x) -> mpq:
    """Coerce ints, ``Fraction``, ``mpq`` or ``"p/q"`` strings to ``mpq``."""
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, int):
        return mpq(x)
    if type(x) is type(ZERO):
        return x
    if isinstance(x, Fraction):
        return mpq(x.numerator, x.denominator)
    if isinstance(x, str):
        s = x.strip()
        if not s or any(c not in "0123456789-+/ " for c in s):
            raise ValueError(f"not a rational literal: {x!r}")
        return mpq(s.replace(" ", ""))
    if isinstance(x, CycNumber):
        return x.to_rational()
    raise TypeError(f"cannot interpret {type(x).__name__} as an exact rational")


def fmt_rational(r) -> str:
    r = as_rational(r)
    if r.denominator == 1:
        return str(r.numerator)
    return f"{r.numerator}/{r.denominator}"


def lcm(a: int, b: int) -> int:
    return a // gcd(a, b) * b


def divisors(n: int) -> list[int]:
    small, large = [], []
    d = 1
    while d * d <= n:
        if n % d == 0:
            small.append(d)
            if d * d != n:
                large.append(n // d)
        d += 1
    return small + large[::-1]


def canonical_order(n: int) -> int:
    """Smallest N' with Q(zeta_N') = Q(zeta_N)."""
    if n % 4 == 2:
        return n // 2
    return n


@lru_cache(maxsize=None)
def cyclotomic_poly(n: int) -> tuple[int, ...]:
    """Integer coefficients of Phi_n, constant term first."""
    if n < 1:
        raise ValueError("order must be positive")
    num = [-1] + [0] * (n - 1) + [1]
    for d in divisors(n)[:-1]:
        num = _poly_divexact(num, cyclotomic_poly(d))
    return tuple(num)


def _poly_divexact(num: list[int], den: tuple[int, ...]) -> list[int]:
    num = list(num)
    dn = len(den) - 1
    out = [0] * (len(num) - dn)
    for i in range(len(out) - 1, -1, -1):
        c = num[i + dn] // den[dn]
        out[i] = c
        if c:
            for j, dj in enumerate(den):
                num[i + j] -= c * dj
    assert not any(num), "inexact cyclotomic division"
    return out


def totient(n: int) -> int:
    return len(cyclotomic_poly(n)) - 1


class CycField:
    """Arithmetic on coordinate tuples of Q(zeta_N).

    Elements are tuples of ``phi`` rationals.  ``table[j]`` holds the
    integer coordinates of zeta^j for 0 <= j < max(N, 2*phi - 1).
    """

    def __init__(self, n: int):
        self.n = n
        self.poly = cyclotomic_poly(n)
        self.phi = len(self.poly) - 1
        phi = self.phi
        size = max(n, 2 * phi - 1, 1)
        table = []
        cur = [0] * phi
        cur[0] = 1
        for _ in range(size):
            table.append(tuple(cur))
            # multiply by zeta and reduce
            top = cur[-1] if phi else 0
            cur = [0] + cur[:-1]
            if top:
                for i in range(phi):
                    cur[i] -= top * self.poly[i]
        self.table = table
        self.zero = tuple([ZERO] * phi)
        self.one = tuple([ONE] + [ZERO] * (phi - 1))

    def __repr__(self):
        return f"CycField({self.n})"

    def power(self, k: int) -> tuple:
        """zeta^k as a coordinate tuple."""
        return tuple(mpq(c) for c in self.table[k % self.n])

    def from_rational(self, r) -> tuple:
        return (as_rational(r),) + self.zero[1:]

    def is_zero(self, a) -> bool:
        return not any(a)

    def add(self, a, b):
        return tuple(x + y for x, y in zip(a, b))

    def sub(self, a, b):
        return tuple(x - y for x, y in zip(a, b))

    def neg(self, a):
        return tuple(-x for x in a)

    def scale(self, a, r):
        return tuple(x * r for x in a)

    def reduce(self, conv) -> tuple:
        """Reduce a coefficient list in powers of zeta (any length) mod Phi_N."""
        phi = self.phi
        out = list(conv[:phi]) + [ZERO] * max(0, phi - len(conv))
        table = self.table
        n = self.n
        for j in range(phi, len(conv)):
            c = conv[j]
            if c:
                row = table[j % n] if j >= len(table) else table[j]
                for i in range(phi):
                    if row[i]:
                        out[i] += c * row[i]
        return tuple(mpq(x) for x in out)

    def mul(self, a, b):
        phi = self.phi
        if phi == 1:
            return (a[0] * b[0],)
        conv = [ZERO] * (2 * phi - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    if y:
                        conv[i + j] += x * y
        return self.reduce(conv)

    def inv(self, a):
        if not any(a):
            raise NotInvertible("zero has no inverse in a cyclotomic field")
        if self.phi == 1:
            return (1 / a[0],)
        # extended Euclid in Q[x]: s*a + t*Phi = 1
        s = _poly_inverse_mod([mpq(c) for c in a], [mpq(c) for c in self.poly])
        return self.reduce(s)

    def galois(self, a, k: int):
        """Image of a under zeta -> zeta^k."""
        conv = [ZERO] * self.n
        for j, c in enumerate(a):
            if c:
                conv[(j * k) % self.n] += c
        return self.reduce(conv)


def _poly_trim(p):
    while p and not p[-1]:
        p.pop()
    return p


def _poly_divmod(a, b):
    a = list(a)
    q = [ZERO] * max(0, len(a) - len(b) + 1)
    lead = b[-1]
    for i in range(len(a) - len(b), -1, -1):
        c = a[i + len(b) - 1] / lead
        q[i] = c
        if c:
            for j, bj in enumerate(b):
                a[i + j] -= c * bj
    return q, _poly_trim(a[: len(b) - 1])


def _poly_sub(a, b):
    n = max(len(a), len(b))
    return _poly_trim([(a[i] if i < len(a) else ZERO) - (b[i] if i < len(b) else ZERO) for i in range(n)])


def _poly_mul(a, b):
    if not a or not b:
        return []
    out = [ZERO] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return _poly_trim(out)


def _poly_inverse_mod(a, m):
    r0, r1 = _poly_trim(list(m)), _poly_trim(list(a))
    s0, s1 = [], [ONE]
    while r1:
        q, r = _poly_divmod(r0, r1)
        r0, r1 = r1, r
        s0, s1 = s1, _poly_sub(s0, _poly_mul(q, s1))
    if len(r0) != 1:
        raise NotInvertible("element shares a factor with the cyclotomic polynomial")
    c = r0[0]
    return [x / c for x in s0]


@lru_cache(maxsize=None)
def field(n: int) -> CycField:
    if n < 1:
        raise ValueError("cyclotomic order must be positive")
    return CycField(n)


def generator_image(n_from: int, n_to: int) -> tuple[int, int]:
    """(sign, e) with zeta_{n_from} = sign * zeta_{n_to}^e, or IncompatibleOrder."""
    if n_to % n_from == 0:
        return 1, n_to // n_from
    if n_from % 4 == 2:
        m = n_from // 2
        if n_to % m == 0:
            return -1, ((m + 1) // 2) * (n_to // m)
    raise IncompatibleOrder(f"Q(zeta_{n_from}) does not embed in Q(zeta_{n_to})",
                            order=n_from, newOrder=n_to)


@lru_cache(maxsize=None)
def _conversion_rows(n_from: int, n_to: int):
    sign, e = generator_image(n_from, n_to)
    fto = field(n_to)
    rows = []
    for j in range(totient(n_from)):
        s = sign ** j
        rows.append(tuple(s * c for c in fto.table[(e * j) % n_to]))
    return rows


def convert_coords(coords, n_from: int, n_to: int) -> tuple:
    """Image of an element of Q(zeta_{n_from}) inside Q(zeta_{n_to})."""
    if n_from == n_to:
        return tuple(coords)
    rows = _conversion_rows(n_from, n_to)
    phi_to = totient(n_to)
    out = [ZERO] * phi_to
    for c, row in zip(coords, rows):
        if c:
            for i in range(phi_to):
                if row[i]:
                    out[i] += c * row[i]
    return tuple(out)


@lru_cache(maxsize=None)
def _galois_stabilizer(d: int, n: int) -> tuple[int, ...]:
    return tuple(k for k in range(1, n) if gcd(k, n) == 1 and k % d == 1 % d)


@lru_cache(maxsize=None)
def _descent_solver(d: int, n: int):
    """Rows and inverse matrix recovering Q(zeta_d) coordinates from Q(zeta_n) ones."""
    cols = _conversion_rows(d, n)  # cols[i] = image of zeta_d^i
    k = len(cols)
    rows_idx = []
    mat = []
    # greedy choice of independent rows
    for r in range(totient(n)):
        cand = mat + [[mpq(cols[i][r]) for i in range(k)]]
        if _rank(cand) == len(cand):
            mat = cand
            rows_idx.append(r)
        if len(mat) == k:
            break
    return tuple(rows_idx), _invert_matrix(mat)


def _rank(mat):
    m = [list(r) for r in mat]
    rank = 0
    ncols = len(m[0]) if m else 0
    for c in range(ncols):
        piv = next((i for i in range(rank, len(m)) if m[i][c]), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        for i in range(len(m)):
            if i != rank and m[i][c]:
                f = m[i][c] / m[rank][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[rank])]
        rank += 1
    return rank


def _invert_matrix(mat):
    k = len(mat)
    aug = [list(r) + [ONE if i == j else ZERO for j in range(k)] for i, r in enumerate(mat)]
    for c in range(k):
        piv = next(i for i in range(c, k) if aug[i][c])
        aug[c], aug[piv] = aug[piv], aug[c]
        p = aug[c][c]
        aug[c] = [x / p for x in aug[c]]
        for i in range(k):
            if i != c and aug[i][c]:
                f = aug[i][c]
                aug[i] = [a - f * b for a, b in zip(aug[i], aug[c])]
    return [r[k:] for r in aug]


def minimal_order(elements, n: int) -> int:
    """Smallest canonical d with every element (coords in Q(zeta_n)) in Q(zeta_d)."""
    if all(not any(c[1:]) for c in elements):
        return 1
    f = field(n)
    for d in divisors(n):
        if d == 1 or canonical_order(d) != d:
            continue
        if d == n:
            return canonical_order(n)
        stab = _galois_stabilizer(d, n)
        if all(f.galois(c, k) == tuple(c) for c in elements for k in stab):
            return d
    return canonical_order(n)


def descend_coords(coords, n: int, d: int) -> tuple:
    """Coordinates in Q(zeta_d) of an element of Q(zeta_n) known to lie there."""
    if d == n:
        return tuple(coords)
    if d == 1:
        return (coords[0],)
    if n % 4 == 2 and d == n // 2:
        # same field, change of generator
        rows_idx, inv = _descent_solver(d, n)
    else:
        rows_idx, inv = _descent_solver(d, n)
    picked = [coords[r] for r in rows_idx]
    return tuple(sum((inv[i][j] * picked[j] for j in range(len(picked))), ZERO)
                 for i in range(len(inv)))


class CycNumber:
    """Immutable element of Q(zeta_N).

    ``order`` is N and ``coords`` are the power-basis coordinates reduced
    modulo Phi_N.  Arithmetic promotes to a common field and returns the
    result in its smallest field.
    """

    __slots__ = ("order", "coords")

    def __init__(self, order: int, coords):
        order = int(order)
        if order < 1:
            raise ValueError("order must be a positive integer")
        coords = tuple(as_rational(c) for c in coords)
        phi = totient(order)
        if len(coords) != phi:
            if len(coords) > phi:
                coords = field(order).reduce(list(coords))
            else:
                coords = coords + (ZERO,) * (phi - len(coords))
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "coords", coords)

    def __setattr__(self, name, value):
        raise AttributeError("CycNumber is immutable")

    @classmethod
    def from_rational(cls, r) -> "CycNumber":
        return cls(1, (as_rational(r),))

    @classmethod
    def root_of_unity(cls, k: int, n: int) -> "CycNumber":
        """exp(2 pi i k / n) in its smallest cyclotomic field."""
        g = gcd(k % n, n) if k % n else n
        n2, k2 = n // g, (k % n) // g
        if n2 == 1:
            return cls.from_rational(1)
        if n2 == 2:
            return cls.from_rational(-1)
        m = canonical_order(n2)
        if m == n2:
            return cls(n2, field(n2).power(k2))
        sign, e = generator_image(n2, m)
        c = field(m).power(e * k2)
        if sign ** k2 < 0:
            c = field(m).neg(c)
        return cls(m, c)

    @classmethod
    def coerce(cls, x) -> "CycNumber":
        if isinstance(x, CycNumber):
            return x
        return cls.from_rational(as_rational(x))

    def canonical(self) -> "CycNumber":
        d = minimal_order([self.coords], self.order)
        if d == self.order:
            return self
        if self.order % 4 == 2 and d == self.order // 2 and not self.is_rational():
            return CycNumber(d, convert_coords(self.coords, self.order, d))
        return CycNumber(d, descend_coords(self.coords, self.order, d))

    def embed(self, new_order: int) -> "CycNumber":
        return cyc_embed(self, new_order)

    def is_zero(self) -> bool:
        return not any(self.coords)

    def is_rational(self) -> bool:
        return not any(self.coords[1:])

    def to_rational(self) -> mpq:
        return cyc_try_rational(self)

    def _pair(self, other):
        other = CycNumber.coerce(other)
        n = lcm(canonical_order(self.order), canonical_order(other.order))
        n = canonical_order(n)
        return n, _to_order(self, n), _to_order(other, n)

    def __add__(self, other):
        try:
            n, a, b = self._pair(other)
        except TypeError:
            return NotImplemented
        return CycNumber(n, field(n).add(a, b)).canonical()

    __radd__ = __add__

    def __neg__(self):
        return CycNumber(self.order, tuple(-c for c in self.coords))

    def __sub__(self, other):
        try:
            n, a, b = self._pair(other)
        except TypeError:
            return NotImplemented
        return CycNumber(n, field(n).sub(a, b)).canonical()

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        try:
            n, a, b = self._pair(other)
        except TypeError:
            return NotImplemented
        return CycNumber(n, field(n).mul(a, b)).canonical()

    __rmul__ = __mul__

    def inverse(self) -> "CycNumber":
        n = canonical_order(self.order)
        a = _to_order(self, n)
        return CycNumber(n, field(n).inv(a)).canonical()

    def __truediv__(self, other):
        return self * CycNumber.coerce(other).inverse()

    def __rtruediv__(self, other):
        return CycNumber.coerce(other) * self.inverse()

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inverse() ** (-k)
        result = CycNumber.from_rational(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        try:
            other = CycNumber.coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        n = canonical_order(lcm(canonical_order(self.order), canonical_order(other.order)))
        return _to_order(self, n) == _to_order(other, n)

    def __hash__(self):
        c = self.canonical()
        if c.order == 1:
            return hash(c.coords[0])
        return hash((c.order, c.coords))

    def __repr__(self):
        if self.is_rational() and self.order <= 2:
            return f"CycNumber({fmt_rational(self.coords[0])})"
        terms = []
        for j, c in enumerate(self.coords):
            if c:
                terms.append(f"{fmt_rational(c)}*z{self.order}^{j}" if j else fmt_rational(c))
        return "CycNumber(" + (" + ".join(terms) or "0") + ")"

    def to_json(self) -> dict:
        return {"order": self.order, "coords": [fmt_rational(c) for c in self.coords]}

    @classmethod
    def from_json(cls, obj) -> "CycNumber":
        if isinstance(obj, (str, int)):
            return cls.from_rational(as_rational(obj))
        return cls(int(obj["order"]), [as_rational(c) for c in obj["coords"]])


def _to_order(x: CycNumber, n: int) -> tuple:
    if x.order == n:
        return x.coords
    if x.is_rational():
        return field(n).from_rational(x.coords[0])
    return convert_coords(x.coords, x.order, n)


def cyc_embed(x: CycNumber, new_order: int) -> CycNumber:
    """Image of x in Q(zeta_new_order) under zeta_N -> zeta_new^(new/N)."""
    x = CycNumber.coerce(x)
    if new_order % x.order != 0:
        raise IncompatibleOrder(f"{new_order} is not a multiple of {x.order}",
                                order=x.order, newOrder=new_order)
    return CycNumber(new_order, convert_coords(x.coords, x.order, new_order))


def cyc_try_rational(x) -> mpq:
    """The rational value of x, or raise NotRational."""
    x = CycNumber.coerce(x)
    if x.is_rational():
        return x.coords[0]
    raise NotRational("value does not lie in Q", value=x.to_json())
