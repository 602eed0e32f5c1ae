"""Command-line entry point: file-based, deterministic pipelines.

Every subcommand reads a system (builtin name or JSON path), samples it on a
configurable grid and writes CSV/JSON artifacts into the output directory.
Numeric output uses 17 significant digits so reruns with the same
configuration are byte-identical.  Exit codes: 0 when all requested checks
pass, 1 on precondition failures (a JSON error naming the witness parameter
goes to stdout), 2 on usage errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import catalog
from .brunovsky import to_brunovsky
from .design import (EigenArcDesign, ackermann_feedback, check_conditions,
                     multi_input_design)
from .errors import EnsembleFeedbackError, PreconditionError
from .feedback import transform_to_dict
from .indices import index_table
from .oscillator import (OscillatorEnsemble, degree_sweep, k_star,
                         lipschitz_constants)
from .simulate import InputMode, InputSequence, poly_to_input, propagate_grid
from .systems import DEFAULT_RANK_TOL, ParamGrid, PolyScalar


def _fmt(x: float) -> str:
    return format(float(x), ".17e")


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _write_json(path: Path, payload: dict):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, indent=1)
        fh.write("\n")


def _parse_float_list(raw: str):
    if not raw:
        return []
    return [float(tok) for tok in raw.split(",") if tok.strip()]


def _parse_degrees(raw: str):
    """Either a comma list of degrees or "lo:hi" meaning lo plus the powers
    of two from 4 up to hi (the standard sweep)."""
    if ":" in raw:
        lo, hi = raw.split(":", 1)
        lo, hi = int(lo), int(hi)
        degrees = [lo]
        d = 4
        while d <= hi:
            if d > lo:
                degrees.append(d)
            d *= 2
        return degrees
    return [int(tok) for tok in raw.split(",") if tok.strip()]


def _add_system_args(p: argparse.ArgumentParser, required: bool = True):
    src = p.add_mutually_exclusive_group(required=required)
    src.add_argument("--builtin", help="builtin system name "
                     "(example41a, example41b, oscillator)")
    src.add_argument("--system", help="path to a system JSON file")
    p.add_argument("--g", default="2,1",
                   help="oscillator builtin: gain coefficients, ascending")
    p.add_argument("--theta-star", type=float, default=1.0,
                   help="oscillator builtin: arc half-width")
    p.add_argument("--k", type=float, default=None,
                   help="oscillator builtin: feedback gain")
    p.add_argument("--grid", type=int, default=201, help="grid size")
    p.add_argument("--insert", default="",
                   help="comma-separated extra grid points")
    p.add_argument("--tol-rank", type=float, default=DEFAULT_RANK_TOL)
    p.add_argument("--tol-gap", type=float, default=1e-8)
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("--seed", type=int, default=0,
                   help="seed recorded in reports (pipelines are deterministic)")


def _load_system(args):
    if args.builtin:
        params = {}
        if args.builtin == "oscillator":
            params = {"g_coeffs": _parse_float_list(args.g),
                      "k": args.k if args.k is not None else 4.0,
                      "theta_star": args.theta_star}
        sys_pair = catalog.builtin_system(args.builtin, **params)
        inserts = list(catalog.BUILTIN_INSERTS.get(args.builtin, ()))
    else:
        sys_pair = catalog.load_system(args.system)
        inserts = []
    inserts.extend(_parse_float_list(args.insert))
    grid = ParamGrid.uniform(sys_pair.arc, args.grid, insert=inserts)
    return sys_pair, grid


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _cmd_indices(args) -> int:
    sys_pair, grid = _load_system(args)
    rows = index_table(sys_pair, grid, tol=args.tol_rank)
    m = sys_pair.m
    header = (["theta"] + [f"kappa_{i+1}" for i in range(m)]
              + [f"h_{i+1}" for i in range(m)] + ["reachable"])
    out_rows = [[_fmt(theta)] + [str(v) for v in kv] + [str(v) for v in hv]
                + [str(int(ok))] for theta, kv, hv, ok in rows]
    _write_csv(_outdir(args) / "indices.csv", header, out_rows)
    return 0


def _cmd_check(args) -> int:
    sys_pair, grid = _load_system(args)
    report = check_conditions(sys_pair, grid, tol_rank=args.tol_rank,
                              tol_gap=args.tol_gap)
    payload = report.as_dict()
    payload["seed"] = args.seed
    _write_json(_outdir(args) / "conditions.json", payload)
    return 0 if report.all_ok else 1


def _cmd_brunovsky(args) -> int:
    sys_pair, grid = _load_system(args)
    result = to_brunovsky(sys_pair, grid, tol=args.tol_rank)
    out = _outdir(args)
    _write_json(out / "transform.json", transform_to_dict(result.transform))
    jumps = np.concatenate([[0.0], result.discontinuity])
    rows = [[_fmt(theta), _fmt(ra), _fmt(rb), _fmt(j)]
            for theta, ra, rb, j in zip(grid.points, result.residual_a,
                                        result.residual_b, jumps)]
    _write_csv(out / "residuals.csv", ["theta", "residual_a", "residual_b",
                                       "discontinuity"], rows)
    return 0


def _cmd_design_si(args) -> int:
    sys_pair, grid = _load_system(args)
    design = EigenArcDesign(sys_pair.n, sys_pair.arc,
                            args.split_k if args.split_k else -1)
    result = ackermann_feedback(sys_pair, design, grid, tol=args.tol_rank)
    out = _outdir(args)
    n = sys_pair.n
    header = ["theta"]
    for name in ("g", "f"):
        for i in range(n):
            header += [f"{name}{i+1}_re", f"{name}{i+1}_im"]
    rows = []
    for idx, theta in enumerate(grid.points):
        row = [_fmt(theta)]
        for mat in (result.feedback, result.ackermann_rows):
            for i in range(n):
                row += [_fmt(mat[idx, i].real), _fmt(mat[idx, i].imag)]
        rows.append(row)
    _write_csv(out / "feedback.csv", header, rows)
    eig_rows = [[_fmt(theta)] + [x for lam in result.target_eigenvalues[idx]
                                 for x in (_fmt(lam.real), _fmt(lam.imag))]
                for idx, theta in enumerate(grid.points)]
    eig_header = ["theta"] + [f"lambda{i+1}_{p}" for i in range(n) for p in ("re", "im")]
    _write_csv(out / "eigenvalues.csv", eig_header, eig_rows)
    report = check_conditions(result.closed_loop_samples(), tol_rank=args.tol_rank,
                              tol_gap=args.tol_gap)
    payload = report.as_dict()
    payload["seed"] = args.seed
    _write_json(out / "conditions.json", payload)
    return 0 if report.all_ok else 1


def _cmd_design_mi(args) -> int:
    sys_pair, grid = _load_system(args)
    design = EigenArcDesign(sys_pair.n, sys_pair.arc,
                            args.split_k if args.split_k else -1)
    result = multi_input_design(sys_pair, grid, design, tol=args.tol_rank)
    out = _outdir(args)
    _write_json(out / "transform.json", transform_to_dict(result.transform))
    rows = [[_fmt(theta), _fmt(ra), _fmt(rb)]
            for theta, ra, rb in zip(grid.points, result.residual_a, result.residual_b)]
    _write_csv(out / "residuals.csv", ["theta", "residual_a", "residual_b"], rows)
    payload = result.conditions.as_dict()
    payload["seed"] = args.seed
    payload["kappa"] = list(result.kappa)
    payload["max_residual"] = result.max_residual
    _write_json(out / "conditions.json", payload)
    return 0 if result.conditions.all_ok else 1


def _cmd_oscillator(args) -> int:
    g = PolyScalar.of(*_parse_float_list(args.g))
    ens = OscillatorEnsemble(args.theta_star, g)
    grid = ParamGrid.uniform(ens.arc, args.grid,
                             insert=_parse_float_list(args.insert))
    threshold = k_star(ens, grid)
    if args.auto_k is not None:
        k = threshold.value + args.auto_k
    elif args.k is not None:
        k = args.k
    else:
        raise PreconditionError("supply --k or --auto-k")
    ens = ens.with_k(k)

    if args.target == "sincos":
        f1, f2, L_f = np.sin, np.cos, 1.0
    elif args.target.startswith("poly:"):
        coeffs = PolyScalar.of(*_parse_float_list(args.target[5:]))
        f1 = lambda t: float(np.real(coeffs(t)))
        f2 = lambda t: 0.0
        L_f = float(np.max(np.abs(coeffs.derivative()(grid.points))))
    else:
        raise PreconditionError(f"unknown target '{args.target}'")

    degrees = _parse_degrees(args.degrees)
    rows = degree_sweep(ens, f1, f2, L_f, degrees, grid)
    out = _outdir(args)
    _write_csv(out / "sweep.csv", ["degree", "measured_error", "bound"],
               [[str(r.degree), _fmt(r.measured_error), _fmt(r.bound)] for r in rows])
    constants = lipschitz_constants(ens, f1, f2, L_f, grid)
    _write_json(out / "report.json", {
        "k": k,
        "k_star": threshold.value,
        "k_star_slope_candidate": threshold.slope_candidate,
        "k_star_positivity_candidate": threshold.positivity_candidate,
        "sign_flipped": threshold.sign_flipped,
        "constants": constants.__dict__,
        "degrees": degrees,
        "seed": args.seed,
        "target": args.target,
    })
    return 0 if all(r.measured_error <= r.bound for r in rows) else 1


def _cmd_simulate(args) -> int:
    with open(args.input, "r", encoding="utf-8") as fh:
        spec = json.load(fh)
    if args.builtin or args.system:
        sys_pair, grid = _load_system(args)
    elif "system" in spec:
        sys_pair = catalog.system_from_dict(spec["system"])
        grid = ParamGrid.uniform(sys_pair.arc, args.grid,
                                 insert=_parse_float_list(args.insert))
    else:
        raise PreconditionError("no system given (flag or input JSON)")
    samples = sys_pair.sample(grid)
    if "poly" in spec:
        coeffs = np.array([complex(re, im) for re, im in spec["poly"]])
        u = poly_to_input(coeffs)
    elif "u" in spec:
        raw = np.array([[complex(re, im) for re, im in row] for row in spec["u"]])
        mode = InputMode(spec.get("mode", "discrete"))
        u = InputSequence(raw, mode, spec.get("dt"))
    else:
        raise PreconditionError("input JSON needs 'poly' or 'u'")
    states = propagate_grid(samples, u)
    target = None
    if "target" in spec:
        target = np.array([[complex(re, im) for re, im in row] for row in spec["target"]])
        if target.shape != states.shape:
            raise PreconditionError("target shape mismatch")
    header = ["theta"]
    for i in range(samples.n):
        header += [f"x{i+1}_re", f"x{i+1}_im"]
    header.append("deviation")
    rows = []
    for idx, theta in enumerate(grid.points):
        row = [_fmt(theta)]
        for i in range(samples.n):
            row += [_fmt(states[idx, i].real), _fmt(states[idx, i].imag)]
        dev = (np.linalg.norm(states[idx] - target[idx]) if target is not None
               else float("nan"))
        row.append(_fmt(dev))
        rows.append(row)
    _write_csv(_outdir(args) / "states.csv", header, rows)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ensemble-feedback",
        description="Index computation, canonical forms and ensemble feedback "
                    "design for parameter-dependent linear systems.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("indices", help="per-point index table as CSV")
    _add_system_args(p)
    p.set_defaults(fn=_cmd_indices)

    p = sub.add_parser("check", help="pointwise sufficient-condition report")
    _add_system_args(p)
    p.set_defaults(fn=_cmd_check)

    p = sub.add_parser("brunovsky", help="canonical-form transform + residuals")
    _add_system_args(p)
    p.set_defaults(fn=_cmd_brunovsky)

    p = sub.add_parser("design-si", help="single-input arc-spectrum feedback")
    _add_system_args(p)
    p.add_argument("--split-k", type=int, default=0,
                   help="number of circle arcs (default n-1)")
    p.set_defaults(fn=_cmd_design_si)

    p = sub.add_parser("design-mi", help="multi-input re-targeting transform")
    _add_system_args(p)
    p.add_argument("--split-k", type=int, default=0,
                   help="number of circle arcs (default n-1)")
    p.set_defaults(fn=_cmd_design_mi)

    p = sub.add_parser("oscillator", help="open-loop synthesis degree sweep")
    p.add_argument("--g", default="2,1", help="gain coefficients, ascending")
    p.add_argument("--theta-star", type=float, default=1.0)
    p.add_argument("--k", type=float, default=None)
    p.add_argument("--auto-k", type=float, default=None,
                   help="set k to the threshold plus this margin")
    p.add_argument("--target", default="sincos",
                   help="'sincos' or 'poly:c0,c1,...'")
    p.add_argument("--degrees", default="3:256",
                   help="comma list, or lo:hi for lo plus powers of two")
    p.add_argument("--grid", type=int, default=201)
    p.add_argument("--insert", default="")
    p.add_argument("--out", default="out")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=_cmd_oscillator)

    p = sub.add_parser("simulate", help="propagate an input over the grid")
    _add_system_args(p, required=False)
    p.add_argument("--input", required=True, help="input JSON path")
    p.set_defaults(fn=_cmd_simulate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except PreconditionError as exc:
        payload = {"error": type(exc).__name__, "message": str(exc)}
        if exc.theta is not None:
            payload["theta"] = exc.theta
        print(json.dumps(payload, sort_keys=True))
        return 1
    except EnsembleFeedbackError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)},
                         sort_keys=True))
        return 1


if __name__ == "__main__":
    sys.exit(main())
