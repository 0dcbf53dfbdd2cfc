"""``causalsep`` command line.

File arguments accept a path, ``-`` for stdin, or a catalog name such as
``switch`` or ``s-tilde``.  JSON goes to stdout, diagnostics to stderr.
Exit status: 0 success (or valid), 2 invalid, 1 error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import warnings
from pathlib import Path

from . import catalog, io
from .born import compile_witness, measure_witness, sample_outcomes
from .robustness import (
    BoundaryNoiseWarning,
    construct_witness,
    generalized_robustness,
    random_robustness,
    robustness_at_visibility,
    threshold_from_value,
    verify_witness,
)
from .scan import scan_slice, write_csv
from .spaces import BI, TRI, is_valid_process
from .tensor import hs_inner

EXIT_OK, EXIT_ERROR, EXIT_INVALID = 0, 1, 2


class CliError(Exception):
    pass


def _read_document(ref: str):
    """Return ``(json_or_None, catalog_entry_or_None)`` for a file argument."""
    if ref == "-":
        return json.loads(sys.stdin.read()), None
    path = Path(ref)
    if path.exists():
        return json.loads(path.read_text()), None
    if ref in catalog.NAMES:
        return None, catalog.build(ref)
    raise CliError(f"{ref!r} is neither a readable file nor a catalog entry ({', '.join(catalog.NAMES)})")


def load_operator(ref: str):
    doc, entry = _read_document(ref)
    return entry.op if entry is not None else io.load_operator(doc)


def load_witness(ref: str):
    doc, entry = _read_document(ref)
    if entry is not None:
        if not entry.is_witness:
            return io.witness_from_json(io.operator_to_json(entry.op)), entry
        return entry.obj, entry
    return io.witness_from_json(doc), None


def _emit(obj) -> None:
    sys.stdout.write(io.dumps(obj) + "\n")


def _parse_params(items) -> dict:
    params = {}
    for item in items or []:
        if "=" not in item:
            raise CliError(f"parameter {item!r} is not of the form key=value")
        k, v = item.split("=", 1)
        params[k] = v
    return params


# --- subcommands -------------------------------------------------------------


def cmd_validate(args) -> int:
    op = load_operator(args.file)
    scenario = {"bi": BI, "tri": TRI, None: None}[args.scenario]
    rep = is_valid_process(op, scenario, tol=args.tol, normalized=True)
    _emit(io.validity_to_json(rep))
    return EXIT_OK if rep.valid else EXIT_INVALID


def cmd_robustness(args) -> int:
    op = load_operator(args.file)
    noise = None if args.noise in (None, "white") else load_operator(args.noise)
    if args.generalized:
        _emit(io.generalized_to_json(generalized_robustness(op, tol=args.tol, backend=args.backend)))
        return EXIT_OK
    with warnings.catch_warnings():
        warnings.simplefilter("default", BoundaryNoiseWarning)
        if args.v is not None:
            if noise is None:
                raise CliError("--v needs --noise <file>: the process mixed in at weight 1 - v")
            rep = robustness_at_visibility(op, noise, args.v, tol=args.tol, backend=args.backend)
        else:
            rep = random_robustness(op, noise, tol=args.tol, backend=args.backend)
    _emit(io.robustness_to_json(rep))
    return EXIT_OK


def cmd_witness(args) -> int:
    op = load_operator(args.file)
    noise = None if args.noise in (None, "white") else load_operator(args.noise)
    S, value = construct_witness(op, noise, args.restrict, tol=args.tol, backend=args.backend)
    out = io.witness_to_json(S)
    out["value"] = value
    out["visibility_threshold"] = threshold_from_value(value)
    out["restriction"] = args.restrict or "none"
    _emit(out)
    return EXIT_OK


def cmd_verify_witness(args) -> int:
    S, entry = load_witness(args.file)
    tol = args.tol
    if tol is None:
        tol = entry.tolerance if entry is not None else 1e-7
    rep = verify_witness(S, tol=tol, search=True if args.search else None, backend=args.backend)
    out = io.verification_to_json(rep)
    out["tolerance"] = tol
    _emit(out)
    return EXIT_OK if rep.valid else EXIT_INVALID


def cmd_catalog(args) -> int:
    if args.name is None or args.list:
        _emit({"entries": [{"name": n, "note": catalog._BUILDERS[n][2],
                            "defaults": {k: (v if isinstance(v, str) else float(v))
                                         for k, v in catalog._BUILDERS[n][1].items()}} for n in catalog.NAMES]})
        return EXIT_OK
    try:
        entry = catalog.build(args.name, **_parse_params(args.param))
    except KeyError as exc:
        raise CliError(exc.args[0]) from exc
    _emit(io.witness_to_json(entry.obj, args.dense) if entry.is_witness else io.operator_to_json(entry.op, args.dense))
    return EXIT_OK


def cmd_measure(args) -> int:
    S, _ = load_witness(args.witness)
    W = load_operator(args.process)
    d = compile_witness(S, mode=args.mode)
    out = {
        "kind": "measurement",
        "mode": args.mode,
        "settings": d.n_settings,
        "exact": hs_inner(S.op, W),
        "born_rule": measure_witness(d, W),
    }
    if args.shots:
        out["sample"] = io.sample_to_json(sample_outcomes(W, d, args.shots, args.seed))
        if not args.counts:
            out["sample"].pop("settings")
    _emit(out)
    return EXIT_OK


def cmd_scan(args) -> int:
    anchors = [load_operator(a) for a in args.anchor]
    res = args.res if len(args.res) == 2 else args.res[0]
    rows = scan_slice(anchors, res, tuple(args.bounds), args.restrict, tol=args.tol, workers=args.workers)
    write_csv(rows, sys.stdout)
    return EXIT_OK


# --- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="causalsep", description="Process matrices and witnesses of causal nonseparability.")
    p.add_argument("-v", "--verbose", action="count", default=0, help="log solver progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def solver_opts(q, tol=1e-8):
        q.add_argument("--tol", type=float, default=tol, help="solver tolerance (default %(default)g)")
        q.add_argument("--backend", choices=["builtin", "cvxpy"], default="builtin")

    q = sub.add_parser("validate", help="check that an operator is a valid process matrix")
    q.add_argument("file")
    q.add_argument("--scenario", choices=["bi", "tri"])
    q.add_argument("--tol", type=float, default=None, help="subspace and PSD tolerance")
    q.set_defaults(func=cmd_validate)

    q = sub.add_parser("robustness", help="random robustness with witness and decomposition")
    q.add_argument("file")
    q.add_argument("--noise", default="white", help="'white' or a process file")
    q.add_argument("--v", type=float, default=None, help="robustness of v*file + (1-v)*noise against white noise")
    q.add_argument("--generalized", action="store_true", help="generalized robustness instead")
    solver_opts(q)
    q.set_defaults(func=cmd_robustness)

    q = sub.add_parser("witness", help="optimal (optionally restricted) witness")
    q.add_argument("file")
    q.add_argument("--restrict", choices=["unitary", "charlie-x"], default=None)
    q.add_argument("--noise", default="white")
    solver_opts(q)
    q.set_defaults(func=cmd_witness)

    q = sub.add_parser("verify-witness", help="check a witness certificate or search for one")
    q.add_argument("file")
    q.add_argument("--tol", type=float, default=None)
    q.add_argument("--search", action="store_true", help="ignore any attached certificate")
    q.add_argument("--backend", choices=["builtin", "cvxpy"], default="builtin")
    q.set_defaults(func=cmd_verify_witness)

    q = sub.add_parser("catalog", help="export a catalog entry as JSON")
    q.add_argument("name", nargs="?")
    q.add_argument("--param", nargs="+", metavar="K=V")
    q.add_argument("--dense", action="store_true", help="include the dense matrix")
    q.add_argument("--list", action="store_true")
    q.set_defaults(func=cmd_catalog)

    q = sub.add_parser("measure", help="evaluate a witness through instrument statistics")
    q.add_argument("--witness", required=True)
    q.add_argument("--process", required=True)
    q.add_argument("--mode", choices=["measure-prepare", "unitary"], default="measure-prepare")
    q.add_argument("--shots", type=int, default=0)
    q.add_argument("--seed", type=int, default=None)
    q.add_argument("--counts", action="store_true", help="include per-setting outcome counts")
    q.set_defaults(func=cmd_measure)

    q = sub.add_parser("scan", help="CSV of a two-dimensional slice")
    q.add_argument("--anchor", nargs=3, required=True, metavar=("A1", "A2", "A3"))
    q.add_argument("--res", type=int, nargs="+", default=[11], help="points per axis, or NX NY")
    q.add_argument("--bounds", type=float, nargs=4, default=[-0.5, 0.5, 0.0, 1.0], metavar=("X0", "X1", "Y0", "Y1"))
    q.add_argument("--restrict", choices=["unitary", "charlie-x"], default=None)
    q.add_argument("--workers", type=int, default=1)
    q.add_argument("--tol", type=float, default=1e-8)
    q.set_defaults(func=cmd_scan)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "res", None) is not None and len(args.res) not in (1, 2):
        parser.error("--res takes one or two integers")
    try:
        return args.func(args)
    except (CliError, ValueError, KeyError, RuntimeError, json.JSONDecodeError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"causalsep: error: {msg}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
