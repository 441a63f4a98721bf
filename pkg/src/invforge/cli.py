"""Command line front end: ``invforge <command> [names...] -f input.txt``."""
from __future__ import annotations

import argparse
import json
import os
import sys

from . import connections as cn
from . import glinv, operators as ops
from .algebra import ContextError, JetOrderError, DegenerateInputError, NonUniqueSolutionError, NoSolutionError, PoleError
from .diffop import DiffOperator, format_operator
from .jets import OrderError, SingularFormError, jets_of_form
from .parsing import InputDocument, ParseError, format_symbol, parse

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_USAGE = 2
EXIT_GATE = 3

COMMANDS = ("invariants", "binary-equiv", "char-curve", "frame", "quantize", "peel", "wagner", "chern",
            "ode-invariants", "verify-equiv", "fingerprint", "normalize", "codim")

GATE_ERRORS = (cn.NotConstantTypeError, cn.NotWagnerRegularError, ops.NotGeneralTypeError,
               ops.TorsionFreeError, ops.DegenerateMetricError, ops.NormalizationError, ops.GateError,
               glinv.GeneralPositionError, glinv.SamplingError, glinv.DegenerateCurveError,
               SingularFormError, OrderError, JetOrderError, NonUniqueSolutionError, NoSolutionError, PoleError, DegenerateInputError)


class UsageError(ValueError):
    pass


def _q(x):
    return ops._q(x)


def _tensor_json(s):
    return {"degree": s.degree, "text": format_symbol(s), "components": s.to_json()}


def _total_symbol_json(t: cn.TotalSymbol):
    return {str(s.degree): format_symbol(s) for s in t.parts}


def _conn_json(c: cn.AffineConnection):
    return {"index_convention": "nabla_{d_i} d_j = sum_k Gamma[i,j,k] d_k", "gamma": c.to_json()}


class Context:
    def __init__(self, doc: InputDocument, args):
        self.doc = doc
        self.settings = dict(doc.settings)
        self.seed = args.seed if args.seed is not None else int(self.settings.get("seed", 0))
        self.samples = args.samples if args.samples is not None else int(self.settings.get("samples", 5))
        mode = args.mode or self.settings.get("mode", "diffeo")
        self.mode = ops.AUTO if mode in ("auto", ops.AUTO) else ops.DIFFEO
        self.pointwise = args.pointwise or bool(self.settings.get("pointwise", 0))

    def get(self, name, *kinds):
        return self.doc.get(name, kinds or None)

    def operator(self, name):
        d = self.get(name, "op", "symbol")
        v = d.value
        return v if isinstance(v, DiffOperator) else DiffOperator.from_symbol(v)

    def symbol(self, name):
        d = self.get(name, "op", "symbol")
        v = d.value
        return v.principal_symbol() if isinstance(v, DiffOperator) else v


def _need(names, count, usage):
    if len(names) < count:
        raise UsageError(f"usage: {usage}")


def cmd_invariants(ctx, names):
    _need(names, 1, "invariants FORM")
    h = ctx.get(names[0], "form").value
    if h.n == 2:
        b = glinv.binary_invariants(h)
        return {"form": names[0], "n": 2, "k": h.k, "K2": str(b.K2), "K3": str(b.K3), "J0": str(b.J0),
                "J3": str(b.J3), "J4": str(b.J4), "I": {str(l): str(v) for l, v in sorted(b.I.items())}}
    data = glinv.invariant_data(h, seed=ctx.seed)
    return {"form": names[0], "n": h.n, "k": h.k, "choice": data.choice,
            "invariants": {nm: str(f) for nm, f in zip(data.names, data.J)}}


def _witness_matrix(ctx, name, n):
    """Rows of the matrix of a linear map declaration."""
    phi = ctx.get(name, "map").value
    origin = {c: 0 for c in phi.ring.coords}
    rows = []
    for f in phi.forward:
        row = [f.total_diff(j) for j in range(n)]
        if not f.is_polynomial() or not all(e.is_constant() for e in row) or f.eval(origin) != 0:
            raise UsageError(f"map {name!r} is not linear")
        rows.append([e.constant_value() for e in row])
    return rows


def cmd_binary_equiv(ctx, names):
    _need(names, 2, "binary-equiv FORM FORM [LINEAR-MAP]")
    h1 = ctx.get(names[0], "form").value
    h2 = ctx.get(names[1], "form").value
    witness = _witness_matrix(ctx, names[2], h1.n) if len(names) > 2 else None
    verdict, report = glinv.compare_forms(h1, h2, witness)
    return {"verdict": verdict, **report}


def cmd_char_curve(ctx, names):
    _need(names, 1, "char-curve FORM [FORM]")
    hs = [ctx.get(nm, "form").value for nm in names[:2]]
    curves = [glinv.characteristic_curve(h) for h in hs]
    out = {"curves": [{"form": nm, "chart": c.chart, "L": str(c.poly)} for nm, c in zip(names, curves)]}
    if len(curves) == 2:
        out["verdict"] = glinv.compare_curves(curves[0].poly, curves[1].poly)
    return out


def cmd_frame(ctx, names):
    _need(names, 1, "frame FORM")
    h = ctx.get(names[0], "form").value
    fr = glinv.general_frame(jets_of_form(h, 3))
    out = {"form": names[0], "regular": fr.regular, "determinant": str(fr.determinant),
           "frame": [[str(c) for c in v] for v in fr.vectors]}
    if fr.regular:
        out["christoffels"] = {f"{a},{b},{c}": str(v) for (a, b, c), v in sorted(glinv.frame_christoffels(fr).items())}
    return out


def _connections(ctx, names, sigma):
    nabla = ctx.get(names[0], "conn").value if len(names) > 0 else None
    theta = ctx.get(names[1], "line").value if len(names) > 1 else None
    if nabla is None:
        nabla = cn.wagner_solve(sigma)
    return nabla, theta


def cmd_quantize(ctx, names):
    _need(names, 1, "quantize OP|SYMBOL [CONN [LINE]]")
    A = ctx.operator(names[0])
    sigma = A.principal_symbol()
    nabla, theta = _connections(ctx, names[1:], sigma)
    tot = cn.TotalSymbol([A.part(i) for i in range(A.order, -1, -1)])
    Q = cn.quantize(tot, nabla, theta)
    return {"input": names[0], "total_symbol": _total_symbol_json(tot), "connection": _conn_json(nabla),
            "theta": theta.to_json() if theta else None, "operator": format_operator(Q)}


def cmd_peel(ctx, names):
    _need(names, 1, "peel OP [CONN [LINE]]")
    A = ctx.operator(names[0])
    sigma = A.principal_symbol()
    nabla, theta = _connections(ctx, names[1:], sigma)
    if theta is None and ctx.mode == ops.AUTO:
        theta = cn.operator_connection(A, nabla, rule=cn.GAUGE if A.n == 1 else cn.HALF)
    tot = cn.peel(A, nabla, theta)
    parts = _total_symbol_json(tot)
    return {"operator": names[0], "mode": ctx.mode, "connection": _conn_json(nabla),
            "theta": theta.to_json() if theta else None, "sigma": parts,
            "vanishing": [str(s.degree) for s in tot.parts if s.is_zero()]}


def cmd_wagner(ctx, names):
    _need(names, 1, "wagner OP|SYMBOL")
    sigma = ctx.symbol(names[0])
    W = cn.wagner_solve(sigma, pointwise=ctx.pointwise, seed=ctx.seed)
    if isinstance(W, cn.PointwiseConnection):
        return {"input": names[0], "mode": "pointwise",
                "samples": [{"point": {c: _q(v) for c, v in key},
                             "gamma": {f"{i + 1},{j + 1},{k + 1}": _q(x) for (i, j, k), x in sorted(vals.items()) if x}}
                            for key, vals in W.samples.items()]}
    _, th = cn.torsion(W)
    return {"input": names[0], "mode": "symbolic", "connection": _conn_json(W), "flat": W.flat,
            "torsion_form": th.to_json()}


def cmd_chern(ctx, names):
    _need(names, 1, "chern OP|SYMBOL")
    sigma = ctx.symbol(names[0])
    W = cn.wagner_solve(sigma)
    C = cn.chern_connection(sigma, W)
    out = {"input": names[0], "connection": _conn_json(C), "torsion_form": cn.torsion(C)[1].to_json(),
           "wagner_torsion_form": cn.torsion(W)[1].to_json()}
    if ctx.get(names[0]).kind == "op":
        A = ctx.operator(names[0])
        point = glinv.sample_points(A.ring, 1, ctx.seed)[0] if ctx.pointwise else None
        d = cn.chern_regular_data(A, point=point, wagner=W)
        out["chern_regular"] = {"mode": d.mode, "dimcond": d.dimcond, "transversecond": d.transversecond,
                                "point": {c: _q(v) for c, v in point.items()} if point else None,
                                "theta": d.theta.to_json() if d.theta else None,
                                "subsymbol0": format_symbol(d.subsymbol0) if d.subsymbol0 is not None else None}
    return out


def cmd_ode_invariants(ctx, names):
    _need(names, 1, "ode-invariants OP")
    inv = ops.ode_invariants(ctx.operator(names[0]), ctx.mode)
    return {"operator": names[0], **inv.to_json()}


def _witness(ctx, name):
    d = ctx.get(name, "map", "auto")
    return d.value if d.kind == "map" else d.value[1]


def cmd_verify_equiv(ctx, names):
    _need(names, 2, "verify-equiv OP OP [MAP|AUTO]")
    A, B = ctx.operator(names[0]), ctx.operator(names[1])
    w = _witness(ctx, names[2]) if len(names) > 2 else None
    v = ops.equivalence_verdict(A, B, ctx.mode, w, ctx.samples, ctx.seed)
    return v.to_json()


def cmd_fingerprint(ctx, names):
    _need(names, 1, "fingerprint FORM|OP")
    d = ctx.get(names[0], "form", "op")
    if d.kind == "form":
        fp = glinv.form_fingerprint(d.value, ctx.samples, ctx.seed)
        return {"form": names[0], "names": fp.names, "seed": fp.seed, "choice": fp.choice,
                "charpoly": str(fp.charpoly) if fp.charpoly is not None else None,
                "samples": [{"point": {c: _q(v) for c, v in p.items()},
                             "R": [_q(x) for x in R], "Q": [[_q(x) for x in r] for r in Q],
                             "S": [_q(x) for x in S]} for p, (R, Q, S) in zip(fp.points, fp.samples)]}
    m = ops.natural_model(d.value, None, ctx.samples, ctx.seed, ctx.mode)
    return {"operator": names[0], **m.to_json()}


def cmd_normalize(ctx, names):
    _need(names, 2, "normalize OP INDEX")
    A = ctx.operator(names[0])
    try:
        i = int(names[1])
    except ValueError:
        raise UsageError("normalize expects an integer index") from None
    N = ops.normalize_equation(A, i)
    return {"operator": names[0], "index": i, "normalized": format_operator(N)}


def cmd_codim(ctx, names):
    _need(names, 2, "codim N K")
    try:
        n, k = int(names[0]), int(names[1])
    except ValueError:
        raise UsageError("codim expects two integers") from None
    c, exc = glinv.orbit_codimension(n, k)
    return {"c": c, "exceptional": exc}


HANDLERS = {name: globals()["cmd_" + name.replace("-", "_")] for name in COMMANDS}


def build_parser():
    p = argparse.ArgumentParser(prog="invforge", description="Exact invariants of symbols and operators.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("names", nargs="*")
    p.add_argument("-f", "--file", help="input document (default: stdin)")
    p.add_argument("--seed", type=int)
    p.add_argument("--samples", type=int)
    p.add_argument("--mode", choices=("diffeo", "auto", "automorphism"))
    p.add_argument("--pointwise", action="store_true")
    return p


def emit(obj, stream=None):
    stream = stream or sys.stdout
    stream.write(json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n")


def run(command, names, doc: InputDocument, args) -> tuple:
    """(report, exit code); never raises for domain errors."""
    try:
        ctx = Context(doc, args)
        return HANDLERS[command](ctx, list(names)), EXIT_OK
    except (UsageError, ParseError, ContextError) as e:
        return {"error": type(e).__name__, "message": str(e)}, EXIT_USAGE
    except GATE_ERRORS as e:
        gate = getattr(e, "gate", None)
        return {"error": type(e).__name__, "gate": gate, "message": str(e)}, EXIT_GATE
    except ValueError as e:
        return {"error": type(e).__name__, "message": str(e)}, EXIT_GATE


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.file:
        try:
            with open(args.file, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as e:
            emit({"error": "IOError", "message": str(e)})
            return EXIT_USAGE
    elif args.command == "codim":
        text = ""
    else:
        text = sys.stdin.read()
    try:
        doc = parse(text)
    except ParseError as e:
        emit({"error": type(e).__name__, "message": str(e), "line": e.line, "column": e.col})
        return EXIT_USAGE
    try:
        report, code = run(args.command, args.names, doc, args)
    except Exception as e:  # keep the process a well-behaved pipeline citizen
        if os.environ.get("INVFORGE_TRACEBACK"):
            raise
        report, code = {"error": type(e).__name__, "message": str(e)}, EXIT_INTERNAL
    emit(report)
    return code


if __name__ == "__main__":
    sys.exit(main())
