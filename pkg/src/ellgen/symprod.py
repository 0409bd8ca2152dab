"""Generating function for orbifold elliptic genera of symmetric products.

Given Ell(X) = sum c(m, l) q^m y^l, expand

    sum_n p^n Ell(X^n / S_n) = prod_{i >= 1} prod_{m, l} (1 - p^i q^m y^l)^{-c(m i, l)}

up to p^pMax.  Only the right-hand side is computed; entry n is the
coefficient of p^n.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

from gmpy2 import mpq

from .coeff import ZERO, as_rational, fmt_rational
from .errors import ValidationError
from .genus import GenusValue
from .series import QYSeries, as_precision

__all__ = ["EllCoefficients", "dmvv_expand", "euler_degeneration"]


@dataclass(frozen=True)
class EllCoefficients:
    """Integer coefficients c(m, l) of a genus, known for m <= q_max (all m if None)."""

    coeffs: dict
    dim: int
    q_max: mpq = None
    meta: dict = dc_field(default_factory=dict, compare=False)

    def __post_init__(self):
        clean = {}
        for (m, l), c in self.coeffs.items():
            m, l, c = as_rational(m), as_rational(l), as_rational(c)
            if m.denominator != 1 or m < 0:
                raise ValidationError("q-exponents must be non-negative integers", m=str(m))
            if c.denominator != 1:
                raise ValidationError("coefficients must be integers", m=str(m), l=str(l))
            if c:
                clean[(int(m), l)] = int(c)
        object.__setattr__(self, "coeffs", clean)
        if self.q_max is not None:
            object.__setattr__(self, "q_max", as_rational(self.q_max))

    def get(self, m: int, l) -> int:
        return self.coeffs.get((m, l), 0)

    @classmethod
    def from_series(cls, series, dim=None) -> "EllCoefficients":
        if isinstance(series, GenusValue):
            dim = series.dim if dim is None else dim
            series = series.series
        if dim is None:
            raise ValidationError("dimension of the source space is required")
        coeffs = {}
        for alpha, beta, c in series.items():
            r = c.to_rational()
            if r is None:
                raise ValidationError("coefficients must be rational integers")
            coeffs[(alpha, beta)] = r
        return cls(coeffs, int(dim), series.q_max)

    @classmethod
    def from_json(cls, obj) -> "EllCoefficients":
        try:
            coeffs = {(int(m), mpq(str(l))): int(c) for m, l, c in obj["coeffs"]}
            dim = int(obj["dim"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed coefficient document: {exc}")
        q_max = obj.get("qMax")
        return cls(coeffs, dim, None if q_max is None else mpq(str(q_max)))

    def to_json(self) -> dict:
        out = {
            "dim": self.dim,
            "coeffs": [[m, fmt_rational(l), c] for (m, l), c in sorted(self.coeffs.items())],
        }
        if self.q_max is not None:
            out["qMax"] = fmt_rational(self.q_max)
        return out

    def series(self) -> QYSeries:
        return QYSeries.from_dict({(m, l): c for (m, l), c in self.coeffs.items()},
                                  q_max=self.q_max)


def _gen_binom(c: int, upto: int):
    """binom(c + k - 1, k) for k <= upto: the coefficients of (1 - X)^{-c}."""
    out = [1]
    num = 1
    den = 1
    for k in range(1, upto + 1):
        num *= c + k - 1
        den *= k
        out.append(num // den)
    return out


def dmvv_expand(c: EllCoefficients, p_max: int, prec) -> list:
    """Entries n = 0..p_max of the product expansion as QYSeries.

    Entry n is exact up to q^min(q_order, c.q_max/n).
    """
    if p_max < 0:
        raise ValidationError("pMax must be >= 0", pMax=p_max)
    prec = as_precision(prec)
    order = prec.q_order
    q_cap = int(order // 1)
    # poly[n] : {(m, l): int}
    poly = [dict() for _ in range(p_max + 1)]
    poly[0][(0, ZERO)] = 1
    for i in range(1, p_max + 1):
        for (mi, l), cval in sorted(c.coeffs.items()):
            if mi % i:
                continue
            m = mi // i
            if m > q_cap:
                continue
            kmax = p_max // i
            if m:
                kmax = min(kmax, q_cap // m)
            if kmax == 0:
                continue
            binom = _gen_binom(cval, kmax)
            new = [dict(d) for d in poly]
            for n in range(p_max + 1):
                src = poly[n]
                if not src:
                    continue
                for k in range(1, kmax + 1):
                    tgt = n + i * k
                    if tgt > p_max:
                        break
                    b = binom[k]
                    if not b:
                        continue
                    dm, dl = m * k, l * k
                    dest = new[tgt]
                    for (a, e), v in src.items():
                        key = (a + dm, e + dl)
                        if key[0] > q_cap:
                            continue
                        val = dest.get(key, 0) + b * v
                        if val:
                            dest[key] = val
                        else:
                            dest.pop(key, None)
            poly = new
    entries = []
    for n, terms in enumerate(poly):
        bound = order
        if c.q_max is not None and n > 0:
            bound = min(bound, c.q_max / n)
        entries.append(QYSeries.from_dict(terms, q_max=bound).truncate(bound))
    return entries


def euler_degeneration(entries) -> list:
    """q -> 0, y -> 1 of every entry."""
    out = []
    for s in entries:
        total = ZERO
        for alpha, _, coef in s.items():
            if alpha == 0:
                total += coef.to_rational()
        out.append(total)
    return out
