"""Command line front end.

    ellgen hyp --n 4 --d 4 --qmax 6
    ellgen check lg-cy --weights 1,1,1,1 --degree 4 --qmax 4

Exit codes: 0 success, 1 failed check, 2 invalid input, 3 computation error.
"""

from __future__ import annotations

import argparse
import json
import sys

from gmpy2 import mpq

from . import __version__
from .coeff import CycNumber, fmt_rational
from .errors import (EllgenError, InvalidWeights, MissingGradingElement, ValidationError)
from .genus import (elliptic_law_defect, ell_complete_intersection, ell_hypersurface,
                    ell_projective, law_precision, specialize_chi_y, specialize_euler,
                    surface_qjacobi_decompose)
from .phases import (AbelianOrbifoldData, WeightedAction, bidegree_genera, hybrid_ci_genus,
                     lg_genus, lg_orbifoldized, numeric_invariants, sigma_orbifold_genus,
                     spectrum)
from .series import CohomologyModel, QYSeries, first_difference, subst_monomial
from .symprod import EllCoefficients, dmvv_expand, euler_degeneration
from .theta import ThetaArg, eta_tilde, qjacobi_generator, t_series, theta_at

EXIT_OK, EXIT_MISMATCH, EXIT_INVALID, EXIT_COMPUTE = 0, 1, 2, 3

SCHEMA_VERSION = "1"


class UsageError(ValidationError):
    code = "UsageError"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# -- argument types -------------------------------------------------------


def _rational(text: str) -> mpq:
    try:
        return mpq(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}")


def _qmax(text: str) -> mpq:
    v = _rational(text)
    if v < 0:
        raise argparse.ArgumentTypeError("qmax must be >= 0")
    return v


def _int_list(text: str) -> list:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers: {text!r}")


def _generators(text: str) -> list:
    """'1/2,1/2,0,0;0,0,1/2,1/2' -> list of character vectors."""
    try:
        return [[mpq(x) for x in g.split(",")] for g in text.split(";") if g.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad generator list: {text!r}")


# -- rendering ------------------------------------------------------------


def _monomial(alpha, beta) -> str:
    parts = []
    if alpha:
        parts.append("q" if alpha == 1 else f"q^{fmt_rational(alpha)}")
    if beta:
        parts.append("y" if beta == 1 else f"y^{fmt_rational(beta)}")
    return "*".join(parts) or "1"


def _coeff_text(c: CycNumber) -> str:
    r = c.to_rational() if c.is_rational() else None
    if r is not None:
        return fmt_rational(r)
    return json.dumps(c.to_json(), sort_keys=True)


def _series_table(s: QYSeries) -> list:
    rows = [f"{_monomial(a, b)}\t{_coeff_text(c)}" for a, b, c in s.items()]
    qm = "exact" if s.q_max is None else f"O(q^{fmt_rational(s.q_max)})"
    rows.append(f"+ {qm}")
    return rows


def _jsonable(value):
    if isinstance(value, QYSeries):
        return value.to_json()
    if isinstance(value, CycNumber):
        return value.to_json()
    if type(value).__name__ == "mpq":
        return fmt_rational(value)
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def _table(doc: dict) -> str:
    lines = [f"# {doc['verb']}"]
    for key, value in doc["params"].items():
        lines.append(f"# {key} = {json.dumps(_jsonable(value), sort_keys=True)}")

    def emit(label, value):
        if isinstance(value, QYSeries):
            lines.append(f"[{label}]")
            lines.extend(_series_table(value))
        elif isinstance(value, dict):
            for k in value:
                emit(f"{label}.{k}" if label else k, value[k])
        elif isinstance(value, (list, tuple)) and value and isinstance(value[0], QYSeries):
            for i, v in enumerate(value):
                emit(f"{label}[{i}]", v)
        else:
            lines.append(f"{label}\t{json.dumps(_jsonable(value), sort_keys=True)}")
    emit("", doc["result"])
    return "\n".join(lines) + "\n"


def _render(doc: dict, fmt: str) -> str:
    if fmt == "table":
        return _table(doc)
    return json.dumps(_jsonable(doc), sort_keys=True, indent=1) + "\n"


# -- verbs ----------------------------------------------------------------


def _action(args) -> WeightedAction:
    return WeightedAction(tuple(args.weights), args.degree)


def _genus_doc(g):
    return {"dim": g.dim, "series": g.series, "chiY": specialize_chi_y(g),
            "euler": specialize_euler(g)}


def _v_hyp(args):
    return _genus_doc(ell_hypersurface(args.n, args.d, args.qmax))


def _v_ci(args):
    return _genus_doc(ell_complete_intersection(args.n, args.degrees, args.qmax))


def _v_proj(args):
    return _genus_doc(ell_projective(args.n, args.qmax))


def _v_lg(args):
    return {"series": lg_genus(_action(args), args.qmax)}


def _v_lg_orb(args):
    act = _action(args)
    gens = list(args.generators or [])
    if args.add_grading:
        gens.append(list(act.grading_element))
    orb = AbelianOrbifoldData(act.n, tuple(tuple(g) for g in gens))
    return {"groupOrder": orb.order, "series": lg_orbifoldized(act, orb, args.qmax)}


def _v_sigma_orb(args):
    orb = AbelianOrbifoldData(args.n, tuple(tuple(g) for g in args.generators), args.degree)
    return {"groupOrder": orb.order, "series": sigma_orbifold_genus(orb, args.qmax)}


def _v_hybrid(args):
    return {"series": hybrid_ci_genus(args.n, len(args.degrees), args.degrees, args.qmax)}


def _v_bidegree(args):
    out = bidegree_genera(args.n, args.m, args.qmax)
    return {k: out[k] for k in ("cy", "hybrid1", "hybrid2", "dim")}


def _v_spectrum(args):
    res = spectrum(_action(args))
    return {"entries": res.flat(), "milnor": res.milnor, "symmetric": res.symmetric}


def _v_invariants(args):
    return numeric_invariants(_action(args))


def _v_dmvv(args):
    if args.input:
        with open(args.input, encoding="utf-8") as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"input is not JSON: {exc}")
        coeffs = EllCoefficients.from_json(doc)
    elif args.hyp:
        if len(args.hyp) != 2:
            raise ValidationError("--hyp takes N,D")
        n, d = args.hyp
        coeffs = EllCoefficients.from_series(ell_hypersurface(n, d, args.qmax))
    else:
        raise ValidationError("dmvv needs --input or --hyp")
    entries = dmvv_expand(coeffs, args.pmax, args.qmax)
    return {"entries": entries, "euler": euler_degeneration(entries)}


def _v_qjacobi(args):
    e = qjacobi_generator(args.index, args.qmax)
    return {"label": e.label, "weight": e.weight, "depth": list(e.depth), "series": e.value}


def _discrepancy(name, diff):
    if diff is None:
        return {"check": name, "ok": True}
    alpha, beta, want, got = diff
    return {"check": name, "ok": False,
            "monomial": _monomial(alpha, beta),
            "expected": _coeff_text(want), "got": _coeff_text(got)}


def _check_lg_cy(args):
    act = _action(args)
    if not act.is_cy or any(w != 1 for w in act.weights):
        raise ValidationError("lg-cy compares Fermat data: weights all 1 and degree = n",
                              weights=list(act.weights), degree=act.degree)
    lhs = ell_hypersurface(act.n, act.degree, args.qmax).series
    rhs = lg_genus(act, args.qmax)
    return [_discrepancy("lg-cy", first_difference(lhs, rhs, args.qmax))]


def _check_surface(args):
    d = mpq(args.d)
    c1, c2, residual = surface_qjacobi_decompose(ell_hypersurface(4, args.d, args.qmax))
    want1 = d * (d * d / 2 - 4 * d + 8)
    want2 = d * (d * d / 2 - 2)
    out = []
    for name, want, got in (("c1", want1, c1), ("c2", want2, c2)):
        item = {"check": name, "ok": want == got}
        if want != got:
            item.update(expected=fmt_rational(want), got=fmt_rational(got))
        out.append(item)
    out.append(_discrepancy("residual", first_difference(QYSeries.zero(), residual, args.qmax)))
    return out


def _check_elliptic(args):
    if args.degrees:
        n, degrees = args.n, args.degrees
    else:
        n, degrees = args.n, [args.n]
    if sum(degrees) != n:
        raise ValidationError("elliptic law check needs a Calabi-Yau complete intersection",
                              n=n, degrees=degrees)
    dim = n - 1 - len(degrees)
    index = mpq(dim, 2)
    order = law_precision(index, args.qmax)
    g = ell_complete_intersection(n, degrees, order)
    return [_discrepancy(f"elliptic-law index {fmt_rational(index)}",
                         elliptic_law_defect(g.series, index, args.qmax))]


def _check_theta(args):
    q = args.qmax
    t = t_series(law_precision(mpq(1, 2), q))
    lhs = subst_monomial(t, CycNumber.from_rational(1), 1, 1, tail_index=mpq(1, 2))
    rhs = t * QYSeries.monomial(-1, mpq(-1, 2), -1)
    out = [_discrepancy("quasi-periodicity", first_difference(lhs, rhs, q))]
    t = t_series(q)
    inv = subst_monomial(t, CycNumber.from_rational(1), 0, -1)
    out.append(_discrepancy("oddness", first_difference(inv, -t, q)))
    model = CohomologyModel([2])
    lin = theta_at(ThetaArg((1,), 0), q, model).integrate()
    eta = eta_tilde(q)
    out.append(_discrepancy("derivative at 0", first_difference(eta * eta, lin, q)))
    return out


_CHECKS = {
    "lg-cy": _check_lg_cy,
    "surface-qjacobi": _check_surface,
    "elliptic-law": _check_elliptic,
    "theta-laws": _check_theta,
}


def _v_check(args):
    return {"results": _CHECKS[args.which](args)}


# -- parser ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ellgen", description="Exact elliptic genera as truncated (q, y) series.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    def verb(name, fn, help_text):
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--qmax", type=_qmax, default=mpq(4))
        sp.add_argument("--format", choices=("json", "table"), default="json")
        sp.add_argument("--out", default=None)
        sp.set_defaults(fn=fn)
        return sp

    sp = verb("hyp", _v_hyp, "degree-d hypersurface in P^{n-1}")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--d", type=int, required=True)

    sp = verb("ci", _v_ci, "complete intersection in P^{n-1}")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--degrees", type=_int_list, required=True)

    sp = verb("proj", _v_proj, "projective space P^{n-1}")
    sp.add_argument("--n", type=int, required=True)

    for name, fn, text in (("lg", _v_lg, "Landau-Ginzburg orbifold"),
                           ("spectrum", _v_spectrum, "singularity spectrum"),
                           ("invariants", _v_invariants, "Milnor number and Euler numbers")):
        sp = verb(name, fn, text)
        sp.add_argument("--weights", type=_int_list, required=True)
        sp.add_argument("--degree", type=int, required=True)

    sp = verb("lg-orb", _v_lg_orb, "LG model orbifoldized by a diagonal group")
    sp.add_argument("--weights", type=_int_list, required=True)
    sp.add_argument("--degree", type=int, required=True)
    sp.add_argument("--generators", type=_generators, default=[])
    sp.add_argument("--add-grading", action="store_true",
                    help="append the grading element to the generators")

    sp = verb("sigma-orb", _v_sigma_orb, "hypersurface in P^{n-1} modulo a diagonal group")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--degree", type=int, required=True)
    sp.add_argument("--generators", type=_generators, default=[])

    sp = verb("hybrid-ci", _v_hybrid, "hybrid phase of a complete intersection")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--degrees", type=_int_list, required=True)

    sp = verb("bidegree", _v_bidegree, "bidegree-(n, m) hypersurface and its hybrid phases")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--m", type=int, required=True)

    sp = verb("dmvv", _v_dmvv, "symmetric product generating function")
    sp.add_argument("--input", default=None, help="coefficient JSON document")
    sp.add_argument("--hyp", type=_int_list, default=None, help="N,D: use a hypersurface")
    sp.add_argument("--pmax", type=int, default=3)

    sp = verb("qjacobi", _v_qjacobi, "quasi-Jacobi generator")
    sp.add_argument("--index", type=int, required=True)

    sp = verb("check", _v_check, "verify an identity")
    sp.add_argument("which", choices=sorted(_CHECKS))
    sp.add_argument("--weights", type=_int_list, default=[1, 1, 1, 1])
    sp.add_argument("--degree", type=int, default=4)
    sp.add_argument("--d", type=int, default=4)
    sp.add_argument("--n", type=int, default=4)
    sp.add_argument("--degrees", type=_int_list, default=None)
    return p


_CHECK_PARAMS = {
    "lg-cy": ("weights", "degree"),
    "surface-qjacobi": ("d",),
    "elliptic-law": ("n", "degrees"),
    "theta-laws": (),
}


def _params(args) -> dict:
    skip = {"fn", "format", "out", "verb"}
    out = {k: v for k, v in sorted(vars(args).items()) if k not in skip and v is not None}
    if args.verb == "check":
        keep = set(_CHECK_PARAMS[args.which]) | {"which", "qmax"}
        out = {k: v for k, v in out.items() if k in keep}
    return out


def _emit(text: str, out):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def run(argv=None) -> int:
    fmt, out = "json", None
    try:
        args = build_parser().parse_args(argv)
        fmt, out = args.format, args.out
        result = args.fn(args)
        doc = {"schemaVersion": SCHEMA_VERSION, "verb": args.verb, "params": _params(args),
               "result": result}
        _emit(_render(doc, fmt), out)
        if args.verb == "check" and not all(r["ok"] for r in result["results"]):
            return EXIT_MISMATCH
        return EXIT_OK
    except (ValidationError, InvalidWeights, MissingGradingElement) as exc:
        sys.stderr.write(json.dumps(exc.to_dict(), sort_keys=True) + "\n")
        return EXIT_INVALID
    except EllgenError as exc:
        sys.stderr.write(json.dumps(exc.to_dict(), sort_keys=True) + "\n")
        return EXIT_COMPUTE


def main(argv=None):
    sys.exit(run(argv))
