"""Command-line entry point for the verification suites and experiments.

Exit codes: 0 success, 2 usage error, 3 resource budget exhausted,
4 precondition violated, 5 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from importlib import resources

import numpy as np

from . import adjointfields, flows, kernelgrowth, liegen
from .adjointfields import emit_tables, make_theta, make_xi
from .polyring import parse_poly

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_RESOURCE = 3
EXIT_PRECONDITION = 4
EXIT_VERIFICATION = 5


def _write_output(text: str, out_path: str | None):
    if out_path is None:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
        return
    d = os.path.dirname(os.path.abspath(out_path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".specball-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, out_path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _report(config: dict, payload: dict) -> dict:
    return {"schema_version": SCHEMA_VERSION, "config": config, **payload}


def _parse_range(text: str) -> tuple[int, int]:
    if ".." in text:
        lo, hi = text.split("..", 1)
        lo, hi = int(lo), int(hi)
    else:
        lo = hi = int(text)
    if hi < lo:
        raise ValueError(f"empty range {text!r}")
    return lo, hi


def _csv_text(header: list[str], rows: list[list], config: dict) -> str:
    buf = io.StringIO()
    buf.write("# config: " + json.dumps({"schema_version": SCHEMA_VERSION, **config},
                                        sort_keys=True) + "\n")
    w = csv.writer(buf)
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# tables


def _golden_tables() -> dict:
    with resources.files("specball.data").joinpath("sl3_adjoint_tables.json").open() as fh:
        return json.load(fh)


def _table_structure(report: dict):
    """Order-insensitive structural form: parsed component polynomials and
    parsed action entries."""
    n = report["n"]
    gens = {}
    for entry in report["generators"]:
        gens[entry["generator"]] = {
            c["var"]: parse_poly(c["poly"], n) for c in entry["components"]}
    action = {}
    for var, row in zip(report["variables"], report["action"]):
        for gen, cell in zip(report["generator_order"], row):
            action[(var, gen)] = parse_poly(cell, n)
    return gens, action


def cmd_tables(args) -> int:
    config = {"command": "tables", "n": args.n, "format": args.format}
    report = emit_tables(args.n)
    matched = None
    if args.n == 3:
        matched = _table_structure(report) == _table_structure(_golden_tables())
    payload = _report(config, {"tables": report, "golden_match": matched})
    if args.format == "text":
        text = adjointfields._render_tables_text(report)
        if matched is not None:
            text += f"\n\ngolden_match: {matched}"
        _write_output(text, args.out)
    else:
        _write_output(json.dumps(payload, indent=2), args.out)
    if matched is False:
        return EXIT_VERIFICATION
    return EXIT_OK


# ---------------------------------------------------------------------------
# identity verification


def cmd_verify(args) -> int:
    names = liegen.identity_names(args.n)
    if args.all:
        selected = names
    else:
        if args.id not in names:
            print(f"error: unknown identity id {args.id!r}; known: {', '.join(names)}",
                  file=sys.stderr)
            return EXIT_USAGE
        selected = [args.id]
    config = {"command": "verify", "n": args.n, "ids": selected, "seed": args.seed}
    results = [liegen.verify_identity(name, args.n, seed=args.seed) for name in selected]
    payload = _report(config, {"identities": [vars(r) for r in results]})
    if args.format == "text":
        lines = [f"{r.identity}: {'pass' if r.holds else 'FAIL'}"
                 f" (matches_printed={r.matches_printed})" for r in results]
        _write_output("\n".join(lines), args.out)
    else:
        _write_output(json.dumps(payload, indent=2), args.out)
    return EXIT_OK if all(r.holds for r in results) else EXIT_VERIFICATION


# ---------------------------------------------------------------------------
# generation closure


def cmd_generate(args) -> int:
    config = {"command": "generate", "n": args.n, "max_degree": args.max_degree,
              "method": args.method, "budget_ms": args.budget_ms,
              "budget_brackets": args.budget_brackets, "primes": args.primes}
    seeds = liegen.build_seeds(args.n)
    result = liegen.closure(seeds, args.max_degree, method=args.method,
                            budget_ms=args.budget_ms,
                            budget_brackets=args.budget_brackets,
                            primes=args.primes)
    degrees = []
    for d in sorted(result.reports):
        rep = result.reports[d]
        degrees.append({
            "n": rep.n, "degree": rep.grade, "method": rep.method,
            "target_rank": rep.target_rank, "achieved_rank": rep.achieved_rank,
            "missing_witnesses": rep.missing_witnesses,
            "sl_component_rank": rep.sl_rank,
            "sl_target_component_rank": rep.sl_target_component_rank,
            "gl_component_rank": rep.gl_rank,
            "certified": rep.certified, "complete": rep.complete,
        })
    payload = _report(config, {"degrees": degrees, "complete": result.complete})
    _write_output(json.dumps(payload, indent=2), args.out)
    if not result.complete:
        return EXIT_RESOURCE
    if not all(d["certified"] for d in degrees):
        return EXIT_VERIFICATION
    return EXIT_OK


# ---------------------------------------------------------------------------
# kernels / growth / jets


_FIELD_BUILDERS = {
    "xi": lambda n, a: make_xi(n, a),
    "theta": lambda n, a, b: make_theta(n, a, b),
}


def _field_by_name(name: str, n: int):
    name = name.lower()
    if name.startswith("xi"):
        return make_xi(n, int(name[2:])), name
    if name.startswith("theta"):
        idx = name[5:]
        if len(idx) != 2:
            raise ValueError("field name must look like xi1 or theta12")
        return make_theta(n, int(idx[0]), int(idx[1])), name
    raise ValueError(f"unknown field {name!r}")


def cmd_kernels(args) -> int:
    lo, hi = _parse_range(args.m)
    field, fname = _field_by_name(args.field, args.n)
    config = {"command": "kernels", "n": args.n, "field": fname, "m": args.m,
              "method": args.method}
    der = kernelgrowth.LinearDerivation.from_vector_field(field)
    diagonal = der.is_diagonal()
    rows = []
    mismatch = False
    dims = []
    for m in range(lo, hi + 1):
        op = der.restrict(m)
        k1, how = kernelgrowth.kernel_dim_with_method(op, 1, args.method)
        k2, how2 = kernelgrowth.kernel_dim_with_method(op, 2, args.method)
        dims.append(k1)
        dp = ""
        if diagonal:
            ws = kernelgrowth.WeightSystem.from_vector_field(field)
            dp = kernelgrowth.weight_kernel_dim(ws, m)
            if dp != k1:
                mismatch = True
        rows.append([args.n, fname, m, op.size, k1, k2,
                     how if how == how2 else "mixed", dp])
    deg, period = kernelgrowth.strided_degree(dims)
    for row in rows:
        row.append("" if deg is None else deg)
    header = ["n", "field", "m", "slice_dim", "dim_ker", "dim_ker_sq",
              "method", "weight_dp", "empirical_degree"]
    _write_output(_csv_text(header, rows, config), args.out)
    return EXIT_VERIFICATION if mismatch else EXIT_OK


def cmd_growth(args) -> int:
    lo, hi = _parse_range(args.m)
    if args.chain:
        config = {"command": "growth", "chain": True, "m": args.m}
        records = kernelgrowth.chain_kernel_dims(hi)
        records = [r for r in records if lo <= r.m <= hi]
        violated = [r.m for r in records if r.dim_ker > 3 * r.m]
        rows = [[3, "chain", r.m, r.slice_dim, r.dim_ker, r.dim_ker_sq, r.method,
                 3 * r.m, r.dim_ker <= 3 * r.m] for r in records]
        header = ["nvars", "field", "m", "slice_dim", "dim_ker", "dim_ker_sq",
                  "method", "bound_3m", "within_bound"]
        _write_output(_csv_text(header, rows, config), args.out)
        return EXIT_VERIFICATION if violated else EXIT_OK
    field, fname = _field_by_name(args.field, args.n)
    config = {"command": "growth", "n": args.n, "field": fname, "m": args.m}
    records, summary = kernelgrowth.growth_table(field, hi)
    records = [r for r in records if lo <= r.m <= hi]
    rows = [[args.n, fname, r.m, r.slice_dim, r.dim_ker, r.dim_ker_sq, r.method,
             "" if summary.empirical_degree is None else summary.empirical_degree]
            for r in records]
    header = ["n", "field", "m", "slice_dim", "dim_ker", "dim_ker_sq",
              "method", "empirical_degree"]
    _write_output(_csv_text(header, rows, config), args.out)
    ok = all(r.dim_ker_sq <= r.slice_dim for r in records)
    return EXIT_OK if ok else EXIT_VERIFICATION


def cmd_jets(args) -> int:
    lo, hi = _parse_range(args.m)
    config = {"command": "jets", "n": args.n, "k": args.k, "m": args.m,
              "cumulative": args.cumulative}
    report = kernelgrowth.jet_inequality(args.n, args.k, hi, cumulative=args.cumulative)
    rows = [[r.m, r.lhs, r.rhs, r.holds] for r in report.rows if lo <= r.m <= hi]
    header = ["m", "lhs_jet_dim", "rhs_k_max_kernel", "holds"]
    text = _csv_text(header, rows, config)
    text += f"# crossover_m0: {report.crossover_m}\n"
    _write_output(text, args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# orbit


def cmd_orbit(args) -> int:
    config = {"command": "orbit", "word": args.word, "matrix": args.matrix,
              "check_fibre": args.check_fibre}
    with open(args.matrix) as fh:
        A = flows.matrix_from_json(json.load(fh))
    with open(args.word) as fh:
        word = flows.word_from_json(json.load(fh), A.shape[0])
    if not flows.in_spectral_ball(A):
        print("error: input matrix is not in the spectral ball", file=sys.stderr)
        return EXIT_PRECONDITION
    trajectory = [flows.matrix_to_json(A)]
    X = A
    for atom in word:
        X = flows.apply_atom(atom, X)
        trajectory.append(flows.matrix_to_json(X))
    non_moebius = all(not isinstance(a, flows.Moebius) for a in word)
    drift = None
    if args.check_fibre and non_moebius:
        pi0 = np.array(flows.char_poly(A).pi)
        pi1 = np.array(flows.char_poly(X).pi)
        drift = float(np.max(np.abs(pi1 - pi0))) if len(pi0) else 0.0
    payload = _report(config, {
        "n": A.shape[0],
        "result": flows.matrix_to_json(X),
        "trajectory": trajectory,
        "in_ball": bool(flows.in_spectral_ball(X)),
        "fibre_drift": drift,
    })
    _write_output(json.dumps(payload, indent=2), args.out)
    if args.check_fibre and non_moebius and drift is not None and drift >= 1e-8:
        return EXIT_VERIFICATION
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="specball",
                                 description=__doc__.strip().splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, n_default=None):
        p.add_argument("--out", default=None, help="output path (atomic write)")
        p.add_argument("--format", choices=["json", "text", "csv"], default="json")
        p.add_argument("--seed", type=int, default=0)
        if n_default is not None:
            p.add_argument("--n", type=int, default=n_default)

    p = sub.add_parser("tables", help="emit generator and action tables")
    common(p, n_default=3)
    p.set_defaults(func=cmd_tables)

    p = sub.add_parser("verify", help="check the bracket identity catalog")
    common(p, n_default=2)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--all", action="store_true")
    g.add_argument("--id", default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("generate", help="bracket-closure of the overshear seeds")
    common(p, n_default=2)
    p.add_argument("--max-degree", type=int, required=True)
    p.add_argument("--method", choices=["auto", "exact", "modular"], default="auto")
    p.add_argument("--budget-ms", type=float, default=None)
    p.add_argument("--budget-brackets", type=int, default=None)
    p.add_argument("--primes", type=int, default=3,
                   help="certification primes (fixed list, at most 3)")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("kernels", help="kernel dimensions on homogeneous slices")
    common(p, n_default=2)
    p.add_argument("--field", required=True, help="xi1, xi2, theta12, ...")
    p.add_argument("--m", required=True, help="degree range, e.g. 0..6")
    p.add_argument("--method", choices=["exact", "modular", "auto"], default="exact")
    p.set_defaults(func=cmd_kernels)

    p = sub.add_parser("growth", help="kernel growth tables")
    common(p, n_default=2)
    p.add_argument("--chain", action="store_true",
                   help="use the 3-variable chain derivation")
    p.add_argument("--field", default=None)
    p.add_argument("--m", required=True)
    p.set_defaults(func=cmd_growth)

    p = sub.add_parser("jets", help="jet dimension vs kernel growth table")
    common(p, n_default=2)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--m", required=True)
    p.add_argument("--cumulative", action="store_true",
                   help="sum homogeneous kernels over degrees <= m")
    p.set_defaults(func=cmd_jets)

    p = sub.add_parser("orbit", help="apply an automorphism word to a matrix")
    common(p)
    p.add_argument("--word", required=True, help="JSON word file")
    p.add_argument("--matrix", required=True, help="JSON matrix file")
    p.add_argument("--check-fibre", action="store_true")
    p.set_defaults(func=cmd_orbit)

    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else EXIT_USAGE
    try:
        return args.func(args)
    except (liegen.PreconditionError,) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except flows.NumericsError as exc:
        print(f"numeric error: {exc} {exc.diagnostics}", file=sys.stderr)
        return EXIT_PRECONDITION
    except (ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
