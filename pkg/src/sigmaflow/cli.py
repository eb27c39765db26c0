"""Command-line front end.

Subcommands: curvature (tensor + sigma report at a point), verify (soliton
residual check), flow (rotationally symmetric quotient flow, CSV time
series), hodge (torus Helmholtz splitting).  Exit codes: 0 success /
verification pass, 1 verification fail, 2 input error, 3 geometry error,
4 flow abort.  SIGMAFLOW_THREADS (0 = auto) caps numpy worker threads and
is read before the first array operation.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys

EXIT_OK = 0
EXIT_VERIFY_FAIL = 1
EXIT_INPUT = 2
EXIT_GEOMETRY = 3
EXIT_FLOW_ABORT = 4


def _cap_threads():
    raw = os.environ.get("SIGMAFLOW_THREADS", "").strip()
    if raw and raw != "0":
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ.setdefault(var, raw)


_cap_threads()

import numpy as np  # noqa: E402  (thread caps must precede the import)

from . import expr as ex  # noqa: E402
from . import models, soliton  # noqa: E402
from .curvature import GeometryError, MetricChart, curvature_at  # noqa: E402
from .sigma import ConeConditionError, sigma_profile  # noqa: E402


class InputError(ValueError):
    pass


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


# -- metric-spec files -----------------------------------------------------


def load_spec_file(path: str):
    """Parse a metric-spec JSON document into a SolitonSpec."""
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as err:
        raise InputError(f"cannot read {path}: {err}") from err
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise InputError(f"{path}: malformed JSON at offset {err.pos}: {err.msg}") from err
    return spec_from_document(doc, origin=path)


def spec_from_document(doc, origin="<spec>"):
    if not isinstance(doc, dict):
        raise InputError(f"{origin}: top level must be an object")
    try:
        dim = int(doc["dim"])
        metric = doc["metric"]
        k = int(doc["k"])
        l = int(doc["l"])
    except (KeyError, TypeError, ValueError) as err:
        raise InputError(f"{origin}: missing or malformed required field: {err}") from err
    if not (isinstance(metric, list) and len(metric) == dim
            and all(isinstance(row, list) and len(row) == dim for row in metric)):
        raise InputError(f"{origin}: metric must be a {dim}x{dim} expression array")
    if not (0 <= l <= dim and 0 <= k <= dim):
        raise InputError(f"{origin}: indices (k,l) = ({k},{l}) out of range 0..{dim}")
    if k == l and k != 1:
        raise InputError(f"{origin}: k = l only allowed for the trivial quotient k = l = 1")

    def parse(src, what):
        try:
            return ex.parse(src)
        except ex.ParseError as err:
            raise InputError(f"{origin}: {what}: {err} (offset {err.offset})") from err

    comps = [[parse(metric[i][j], f"metric[{i}][{j}]") for j in range(dim)]
             for i in range(dim)]
    for i in range(dim):
        for j in range(i):
            if ex.unparse(comps[i][j]) != ex.unparse(comps[j][i]):
                if not _numerically_symmetric(comps[i][j], comps[j][i], dim,
                                              doc.get("domain")):
                    raise InputError(
                        f"{origin}: metric[{i}][{j}] and metric[{j}][{i}] disagree")

    domain = [tuple(map(float, pair)) for pair in
              doc.get("domain", [(-1.0, 1.0)] * dim)]
    periodic = [bool(b) for b in doc.get("periodic", [False] * dim)]
    if len(domain) != dim or len(periodic) != dim:
        raise InputError(f"{origin}: domain/periodic must list {dim} entries")
    chart = MetricChart(dim=dim, comps=comps, domain=tuple(domain),
                        periodic=tuple(periodic))

    if "potential" in doc:
        field = soliton.GradientPotential(parse(doc["potential"], "potential"))
    elif "vector_field" in doc:
        raw = doc["vector_field"]
        if not (isinstance(raw, list) and len(raw) == dim):
            raise InputError(f"{origin}: vector_field needs {dim} components")
        field = soliton.VectorField(
            [parse(s, f"vector_field[{a}]") for a, s in enumerate(raw)])
    else:
        field = soliton.VectorField([ex.parse("0")] * dim)
    lam = parse(doc["lambda"], "lambda") if "lambda" in doc else ex.parse("0")
    return soliton.SolitonSpec(chart=chart, field=field, lam=lam, k=k, l=l)


def _numerically_symmetric(a, b, dim, domain):
    lo_hi = domain or [(-1.0, 1.0)] * dim
    rng = np.random.default_rng(7)
    for _ in range(8):
        x = [lo + (hi - lo) * rng.random() for lo, hi in lo_hi]
        if abs(ex.eval_float(a, x) - ex.eval_float(b, x)) > 1e-12:
            return False
    return True


def _resolve(args):
    if getattr(args, "builtin", None):
        try:
            model = models.builtin(args.builtin)
        except (KeyError, ValueError, GeometryError) as err:
            raise InputError(f"unknown builtin {args.builtin!r}: {err}") from err
        return model.chart, soliton.SolitonSpec.from_model(model)
    spec = load_spec_file(args.file)
    return spec.chart, spec


def _parse_point(text, dim):
    try:
        x = [float(p) for p in text.split(",")]
    except ValueError as err:
        raise InputError(f"bad point {text!r}: {err}") from err
    if len(x) != dim:
        raise InputError(f"point has {len(x)} coordinates, chart needs {dim}")
    return x


# -- subcommands -----------------------------------------------------------


def cmd_curvature(args) -> int:
    chart, spec = _resolve(args)
    x = _parse_point(args.point, chart.dim) if args.point else [0.0] * chart.dim
    if not chart.contains(x):
        raise InputError(f"point {x} outside the chart domain")
    pack = curvature_at(chart, x)
    prof = None
    cone_note = None
    try:
        prof = sigma_profile(pack, spec.k, spec.l)
    except ConeConditionError as err:
        cone_note = str(err)

    report = {
        "dim": chart.dim,
        "point": x,
        "scalar_curvature": float(pack.scalar),
        "ricci": pack.ricci.tolist(),
        "schouten": pack.schouten.tolist(),
        "riemann_sup": float(np.max(np.abs(pack.riemann))),
        "cotton_sup": float(np.max(np.abs(pack.cotton))),
        "ricci_minus_metric_sup": float(np.max(np.abs(pack.ricci - pack.g))),
        "ricci_plus_metric_sup": float(np.max(np.abs(pack.ricci + pack.g))),
    }
    if prof is not None:
        report["sigma"] = [float(s) for s in prof.sigmas]
        report["log_quotient"] = float(prof.log_quotient)
        report["cone_ok"] = bool(prof.cone_ok)
    else:
        report["cone_violation"] = cone_note

    if args.json:
        print(json.dumps(report, indent=2, sort_keys=True))
    else:
        print(f"dim = {chart.dim}, point = {x}")
        print(f"R = {pack.scalar:.6f}")
        print(f"|Rm|_sup = {_fmt(report['riemann_sup'])}")
        print(f"|Cotton|_sup = {_fmt(report['cotton_sup'])}")
        if prof is not None:
            sig = ", ".join(_fmt(s) for s in prof.sigmas[1:])
            print(f"sigma_1..{chart.dim} = {sig}")
            print(f"log sigma_{spec.k}/sigma_{spec.l} = {_fmt(prof.log_quotient)}")
        else:
            print(f"cone condition fails: {cone_note}")
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.probes <= 0:
        raise InputError("--probes must be positive")
    _, spec = _resolve(args)
    report = soliton.soliton_residual(spec, count=args.probes, seed=args.seed,
                                      trivial_tol=args.trivial_tol)
    doc = report.to_dict()
    doc["tolerance"] = args.tolerance
    doc["pass"] = bool(report.sup < args.tolerance)
    if args.json:
        print(json.dumps(doc, indent=2, sort_keys=True))
    else:
        print(f"residual sup = {_fmt(report.sup)} (mean {_fmt(report.mean)})")
        print(f"|L_X g|_sup = {_fmt(report.lie_sup)}")
        print(f"classification: {report.classification}"
              + (" (trivial)" if report.trivial else ""))
        if report.cone_violations:
            print(f"cone violations at {report.cone_violations} probes")
        print("PASS" if doc["pass"] else
              f"FAIL (residual {_fmt(report.sup)} >= {_fmt(args.tolerance)})")
    return EXIT_OK if doc["pass"] else EXIT_VERIFY_FAIL


def cmd_flow(args) -> int:
    from . import flow

    if args.grid < 32 or args.grid % 2:
        raise InputError("--grid must be an even integer >= 32")
    if args.t_end <= 0:
        raise InputError("--t-end must be positive")
    u0 = None
    if args.u0:
        try:
            tree = ex.parse(args.u0)
        except ex.ParseError as err:
            raise InputError(f"--u0: {err} (offset {err.offset})") from err
        if ex.max_var(tree) > 1:
            raise InputError("--u0 may reference x1 (the latitude) only")
        u0 = lambda th: ex.eval_float(tree, [th])
    state = flow.FlowState.from_function(args.n, args.k, args.l, args.grid, u0)
    if 2 * args.l == args.n:
        print(f"warning: E_{args.l} diagnostic omitted (l = n/2 path integral "
              "not implemented; column holds int sigma_l dv)", file=sys.stderr)
    final, diag = flow.run(state, args.t_end, dt=args.dt, cadence=args.cadence)

    rows = zip(diag.times, diag.energy, diag.log_r, diag.sup_dev, diag.volume)
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "E_l", "log_r_kl", "sup_dev", "volume"])
            for row in rows:
                w.writerow([_fmt(v) for v in row])
    else:
        print("t,E_l,log_r_kl,sup_dev,volume")
        for row in rows:
            print(",".join(_fmt(v) for v in row))
    if args.state_json:
        with open(args.state_json, "w") as fh:
            json.dump({"n": final.n, "k": final.k, "l": final.l,
                       "grid": final.grid_size, "t": final.t,
                       "u": [float(v) for v in final.u]}, fh, indent=2)
    if diag.aborted:
        print(f"flow aborted: {diag.aborted}", file=sys.stderr)
        last = diag.times[-1] if diag.times else 0.0
        print(f"last good t = {_fmt(last)}", file=sys.stderr)
        return EXIT_FLOW_ABORT
    return EXIT_OK


def cmd_hodge(args) -> int:
    from . import hodge

    exprs = [part.strip() for part in args.field.split(";")]
    if len(exprs) != args.n:
        raise InputError(f"--field needs {args.n} component expressions")
    trees = []
    for a, src in enumerate(exprs):
        try:
            tree = ex.parse(src)
        except ex.ParseError as err:
            raise InputError(f"--field[{a}]: {err} (offset {err.offset})") from err
        if ex.max_var(tree) > args.n:
            raise InputError(f"--field[{a}] references more than {args.n} variables")
        trees.append(tree)

    def sampler(tree):
        return lambda *grids: np.vectorize(
            lambda *pt: ex.eval_float(tree, list(pt)))(*grids)

    try:
        field = hodge.TorusField.from_exprs([sampler(t) for t in trees],
                                            (args.grid,) * args.n)
    except hodge.HodgeError as err:
        raise InputError(str(err)) from err
    rep = hodge.decomposition_report(field)
    y, h = hodge.hodge_decompose(field)
    doc = {
        "grid": args.grid,
        "dim": args.n,
        "Y_sup": float(max(np.max(np.abs(c)) for c in y.components)),
        "potential_sup": float(np.max(np.abs(h))),
        **rep,
    }
    if args.json:
        print(json.dumps(doc, indent=2, sort_keys=True))
    else:
        for key in sorted(doc):
            print(f"{key} = {_fmt(doc[key]) if isinstance(doc[key], float) else doc[key]}")
    return EXIT_OK


# -- argument parsing ------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(
        prog="sigmaflow",
        description="sigma_k curvature computation, soliton verification, "
                    "quotient flow integration, torus Hodge splitting.")
    sub = p.add_subparsers(dest="command", required=True)

    def add_source(sp):
        grp = sp.add_mutually_exclusive_group(required=True)
        grp.add_argument("--file", help="metric-spec JSON file")
        grp.add_argument("--builtin",
                         help="builtin model, e.g. sphere:4 or warped:sinh:sphere:3")

    c = sub.add_parser("curvature", help="curvature tensors and sigma_k at a point")
    add_source(c)
    c.add_argument("--point", help="comma-separated chart coordinates")
    c.add_argument("--json", action="store_true")
    c.set_defaults(func=cmd_curvature)

    v = sub.add_parser("verify", help="check the soliton equation at probe points")
    add_source(v)
    v.add_argument("--probes", type=int, default=40)
    v.add_argument("--tolerance", type=float, default=1e-7)
    v.add_argument("--trivial-tol", type=float, default=1e-7)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--json", action="store_true")
    v.set_defaults(func=cmd_verify)

    f = sub.add_parser("flow", help="rotationally symmetric quotient flow")
    f.add_argument("--n", type=int, required=True)
    f.add_argument("--k", type=int, required=True)
    f.add_argument("--l", type=int, required=True)
    f.add_argument("--grid", type=int, default=64)
    f.add_argument("--u0", help="initial exponent as an expression in x1 = theta")
    f.add_argument("--t-end", type=float, required=True)
    f.add_argument("--dt", type=float, default=None)
    f.add_argument("--cadence", type=int, default=10)
    f.add_argument("--csv", help="write diagnostics to this path")
    f.add_argument("--state-json", help="write the final state to this path")
    f.set_defaults(func=cmd_flow)

    h = sub.add_parser("hodge", help="Helmholtz-Hodge splitting on a flat torus")
    h.add_argument("--n", type=int, choices=(2, 3), required=True)
    h.add_argument("--grid", type=int, required=True)
    h.add_argument("--field", required=True,
                   help="semicolon-separated component expressions in x1..xn "
                        "on [0, 2pi), e.g. 'cos(x1)*cos(x2); -sin(x1)*sin(x2)'")
    h.add_argument("--json", action="store_true")
    h.set_defaults(func=cmd_hodge)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return EXIT_INPUT if err.code not in (0, None) else 0
    try:
        return args.func(args)
    except InputError as err:
        print(f"input error: {err}", file=sys.stderr)
        return EXIT_INPUT
    except (GeometryError, ConeConditionError) as err:
        print(f"geometry error: {err}", file=sys.stderr)
        return EXIT_GEOMETRY


if __name__ == "__main__":
    sys.exit(main())
