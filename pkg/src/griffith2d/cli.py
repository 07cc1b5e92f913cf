"""Command-line front end.

Exit codes: 0 success, 1 a check failed (CN/CC/verdict), 2 usage or geometry
errors.  Failures emit machine-readable JSON on stderr with a stable error
code.  All numeric output uses 17-significant-digit formatting so identical
invocations produce byte-identical files.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import constructions as cons
from .errors import ERROR_CODES, Griffith2dError, UsageError
from .fields import RegionMap, field_from_json, induced_displacement, jump_length
from .geom2d import Polygon, Segment
from .noninterp import blowup_hypotheses, cc_check, cn_check, measure_image
from .oracle import grid_area, sampled_projection_measure, brute_slice_count
from .solver import energy_of_solution, mesh_cracked_domain, solve_contact
from .svgfig import field_figure, mesh_figure


def fmt_float(x):
    if x is None:
        return ""
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def dumps17(obj, indent=0):
    """JSON with fixed 17-significant-digit float formatting."""
    pad = " " * indent
    if isinstance(obj, dict):
        items = ",\n".join(f'{pad}  {json.dumps(str(k))}: {dumps17(v, indent + 2)}'
                           for k, v in obj.items())
        return "{\n" + items + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(dumps17(v, indent) for v in obj) + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (float, np.floating)):
        return f"{float(obj):.17g}"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, np.ndarray):
        return dumps17(obj.tolist(), indent)
    return json.dumps(obj)


def _parse_floats(text):
    return [float(t) for t in text.split(",") if t.strip()]


def _parse_vec(text):
    vals = _parse_floats(text)
    if len(vals) != 2:
        raise UsageError(f"expected two comma-separated numbers, got {text!r}")
    return np.array(vals)


def _load_json(path):
    with open(path) as fh:
        return json.load(fh)


def _write(text, path):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _emit_rows(rows, args, extra_header=()):
    if args.format == "csv":
        lines = [f"# seed={args.seed}"]
        lines += list(extra_header)
        lines.append(",".join(cons.SweepRow.FIELDS))
        for r in rows:
            vals = [fmt_float(getattr(r, k)) if k != "notes" else getattr(r, k)
                    for k in cons.SweepRow.FIELDS]
            lines.append(",".join(vals))
        _write("\n".join(lines) + "\n", args.out)
    else:
        payload = {"seed": args.seed, "rows": [r.to_json() for r in rows]}
        _write(dumps17(payload) + "\n", args.out)


def _cmd_run(args):
    eps_list = _parse_floats(args.eps_list)
    if args.scenario == "example-basic":
        gen = lambda e: cons.example_basic(e)[0]
    elif args.scenario == "example-staircase":
        mu = _parse_vec(args.mu)
        gen = lambda e: cons.example_staircase(e, mu)[0]
    elif args.scenario == "recover":
        return _cmd_recover(args)
    else:
        raise UsageError(f"unknown scenario {args.scenario!r}")
    rows = cons.sweep(gen, eps_list, kappa=args.kappa, beta=args.beta)
    _emit_rows(rows, args)
    if args.svg:
        y = gen(eps_list[-1])
        _, images = measure_image(y)
        _write(field_figure(y, images), args.svg)
    return 0


def _cmd_recover(args):
    eps_list = _parse_floats(args.eps_list)
    if args.field:
        u = field_from_json(_load_json(args.field))
    else:
        u = cons.opening_twin(alpha=args.alpha)
    if args.theta and args.theta > 0:
        u, _, _ = cons.strengthen_contact(u, args.theta)
    rows = []
    diags = []
    for eps in eps_list:
        p = cons.RecoveryParams(tau=args.tau, epsilon=eps, beta=args.beta,
                                gamma=args.gamma)
        y, diag = cons.build_recovery(u, p, kappa=args.kappa)
        rep = diag["energy"]
        rows.append(cons.SweepRow(
            epsilon=eps, jump_length=jump_length(y), bulk=rep.bulk,
            second_gradient=rep.second_gradient, surface=rep.surface,
            total=rep.total, cn_gap=diag["cn"].gap,
            cc_min=cc_check(induced_displacement(y)).min_normal_jump,
            notes="" if diag["cn"].passed else "cn-fail"))
        diags.append(diag)
    header = [f"# theta={fmt_float(diags[-1]['theta'])}",
              f"# linear_energy={fmt_float(diags[-1]['linear_energy'].total)}"]
    _emit_rows(rows, args, extra_header=header)
    if args.svg:
        p = cons.RecoveryParams(tau=args.tau, epsilon=eps_list[-1],
                                beta=args.beta, gamma=args.gamma)
        y, _ = cons.build_recovery(u, p, kappa=args.kappa)
        _, images = measure_image(y)
        _write(field_figure(y, images), args.svg)
    return 1 if any(d["cn"].passed is False for d in diags) else 0


def _cmd_check(args):
    f = field_from_json(_load_json(args.field))
    if args.what == "cn":
        if f.kind != "deformation":
            raise UsageError("cn check expects a deformation field")
        rep = cn_check(f, cn_tol=args.cn_tol)
        _write(dumps17({"seed": args.seed, **rep.to_json()}) + "\n", args.out)
        return 0 if rep.passed else 1
    if args.what == "cc":
        if f.kind == "deformation":
            f = induced_displacement(f)
        thresholds = _parse_floats(args.thresholds) if args.thresholds else []
        rep = cc_check(f, cc_tol=args.cc_tol, thresholds=thresholds)
        _write(dumps17({"seed": args.seed, **rep.to_json()}) + "\n", args.out)
        return 0 if rep.passed else 1
    if args.what == "blowup":
        rep = blowup_hypotheses(
            f, _parse_vec(args.x0), args.rho, _parse_vec(args.normal),
            _parse_vec(args.omega_plus), _parse_vec(args.omega_minus),
            args.eta, args.c_eta, args.cbar)
        _write(dumps17({"seed": args.seed, **rep.to_json()}) + "\n", args.out)
        return 0 if all(fl is True for fl in rep.flags) else 1
    raise UsageError(f"unknown check {args.what!r}")


def _cmd_solve(args):
    domain = Polygon(_load_json(args.domain))
    crack = []
    if args.crack:
        crack = [Segment(a, b) for a, b in _load_json(args.crack)]
    h = RegionMap.from_json(json.loads(args.h))
    mesh = mesh_cracked_domain(domain, crack, args.hmax)
    u_h, rep = solve_contact(mesh, h)
    energy = energy_of_solution(mesh, u_h, args.kappa)
    payload = {
        "seed": args.seed,
        "report": rep.to_json(),
        "energy": energy.to_json(),
        "crack_length": mesh.crack_length,
    }
    if args.solution:
        payload["mesh"] = mesh.to_json()
        payload["u"] = u_h.tolist()
    _write(dumps17(payload) + "\n", args.out)
    if args.svg:
        _write(mesh_figure(mesh, u_h, exaggerate=args.exaggerate), args.svg)
    return 0


def _cmd_oracle(args):
    if args.what == "grid-area":
        ps = _load_json(args.file)
        allpts = np.vstack([np.asarray(p) for p in ps["outer"]])
        pad = 0.05 * (allpts.max() - allpts.min() + 1.0)
        bounds = (allpts.min(axis=0) - pad, allpts.max(axis=0) + pad)
        val = grid_area(ps, bounds, n=args.n)
        _write(dumps17({"seed": args.seed, "grid_area": val, "n": args.n}) + "\n",
               args.out)
        return 0
    if args.what == "slice-count":
        segs = [(np.asarray(a), np.asarray(b)) for a, b in _load_json(args.file)]
        count = brute_slice_count(segs, _parse_vec(args.xi), _parse_vec(args.w))
        _write(dumps17({"seed": args.seed, "count": count}) + "\n", args.out)
        return 0
    if args.what == "projection":
        segs = [(np.asarray(a), np.asarray(b)) for a, b in _load_json(args.file)]
        val = sampled_projection_measure(segs, segs, _parse_vec(args.mu),
                                         n_lines=args.lines)
        _write(dumps17({"seed": args.seed, "measure": val}) + "\n", args.out)
        return 0
    raise UsageError(f"unknown oracle {args.what!r}")


def build_parser():
    ap = argparse.ArgumentParser(
        prog="griffith2d",
        description="2D Griffith fracture energies with non-interpenetration "
                    "and contact diagnostics")
    ap.add_argument("--seed", type=int, default=0,
                    help="seed recorded in outputs (sampling determinism)")
    sub = ap.add_subparsers(dest="command", required=True)

    def common_run(p):
        p.add_argument("--eps-list", required=True,
                       help="comma-separated strictly decreasing epsilons")
        p.add_argument("--kappa", type=float, default=1.0,
                       help="surface-energy constant kappa > 0")
        p.add_argument("--beta", type=float, default=0.8,
                       help="second-gradient exponent beta in (2/3, 1)")
        p.add_argument("--gamma", type=float, default=0.75,
                       help="compactness exponent gamma in (2/3, beta)")
        p.add_argument("--mu", default="-1,-1",
                       help="staircase direction, two negative components")
        p.add_argument("--tau", type=float, default=0.5,
                       help="contact threshold for the bad jump set")
        p.add_argument("--theta", type=float, default=0.0,
                       help="strengthener plateau parameter (0 disables)")
        p.add_argument("--alpha", type=float, default=0.0,
                       help="quadratic enrichment of the builtin opening twin")
        p.add_argument("--field", default=None, help="input field JSON file")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--out", default=None, help="output path (default stdout)")
        p.add_argument("--svg", default=None, help="write a figure to this path")

    for name in ("run", "sweep"):
        p = sub.add_parser(name, help="run a scenario over an epsilon list")
        p.add_argument("scenario",
                       choices=("example-basic", "example-staircase", "recover"))
        common_run(p)
        p.set_defaults(func=_cmd_run)

    p = sub.add_parser("recover", help="recovery-sequence construction")
    common_run(p)
    p.set_defaults(func=_cmd_recover)

    p = sub.add_parser("check", help="CN / CC / blow-up checks on a field file")
    p.add_argument("what", choices=("cn", "cc", "blowup"))
    p.add_argument("field", help="RegionField JSON file")
    p.add_argument("--cn-tol", type=float, default=None)
    p.add_argument("--cc-tol", type=float, default=0.0)
    p.add_argument("--thresholds", default=None)
    p.add_argument("--x0", default="0,0")
    p.add_argument("--rho", type=float, default=1.0)
    p.add_argument("--normal", default="1,0")
    p.add_argument("--omega-plus", default="1,0")
    p.add_argument("--omega-minus", default="0,0")
    p.add_argument("--eta", type=float, default=1e-4)
    p.add_argument("--c-eta", type=float, default=1.0)
    p.add_argument("--cbar", type=float, default=1.0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("solve", help="contact-constrained linear solve")
    p.add_argument("--domain", required=True, help="polygon JSON file")
    p.add_argument("--crack", default=None, help="segments JSON file")
    p.add_argument("--h", required=True, help="boundary datum RegionMap JSON string")
    p.add_argument("--hmax", type=float, required=True)
    p.add_argument("--kappa", type=float, default=1.0)
    p.add_argument("--solution", action="store_true",
                   help="include mesh and nodal solution in the output")
    p.add_argument("--out", default=None)
    p.add_argument("--svg", default=None)
    p.add_argument("--exaggerate", type=float, default=1.0)
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("oracle", help="independent sampling oracles")
    p.add_argument("what", choices=("grid-area", "slice-count", "projection"))
    p.add_argument("file")
    p.add_argument("--n", type=int, default=400)
    p.add_argument("--lines", type=int, default=10_000)
    p.add_argument("--xi", default="1,0")
    p.add_argument("--w", default="0,0")
    p.add_argument("--mu", default="1,0")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_oracle)
    return ap


def main(argv=None):
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except Griffith2dError as exc:
        sys.stderr.write(dumps17(exc.to_json()) + "\n")
        return 2
    except (FileNotFoundError, json.JSONDecodeError, KeyError, ValueError,
            TypeError) as exc:
        msg = f"{type(exc).__name__}: {exc}"
        sys.stderr.write(dumps17({"error": "usage", "message": msg,
                                  "details": {}}) + "\n")
        return 2


ERROR_CODE_ENUMERATION = ERROR_CODES

if __name__ == "__main__":
    sys.exit(main())
