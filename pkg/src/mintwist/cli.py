"""Command-line interface.

Exit codes: 0 pass, 1 condition failure, 2 input error, 3 missing real structure.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
import time
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import catalog
from .classify import SearchOptions, classify, full_report
from .documents import (
    DocumentError,
    atomic_write,
    dumps_triple,
    pretty_dumps,
    read_triple,
    read_twist,
)
from .lattice import boundedness_scan, default_scan_pair, scan_to_csv
from .linalg import DimensionError
from .triple import FiniteSpectralTriple, MissingRealStructure, verify_axioms

EXIT_PASS, EXIT_FAIL, EXIT_INPUT, EXIT_STRUCTURE = 0, 1, 2, 3
TOL_ENV = "MINTWIST_TOL"
DEFAULT_TOL = {"verify": 1e-10, "twist-check": 1e-8, "classify": 1e-8, "lattice-demo": 1e-8, "export": 1e-8}

log = logging.getLogger("mintwist")


class InputError(Exception):
    pass


def load_triple(source: str) -> FiniteSpectralTriple:
    """A builtin tag (see ``catalog.BUILTINS``) or a path to a triple document."""
    if source in catalog.BUILTINS:
        return catalog.builtin(source)
    path = Path(source)
    if not path.exists():
        raise InputError(f"{source}: no such file and not a builtin tag ({', '.join(sorted(catalog.BUILTINS))})")
    try:
        return read_triple(path)
    except DocumentError as exc:
        raise InputError(f"{source}: {exc}") from None
    except (ValueError, DimensionError) as exc:
        raise InputError(f"{source}: {exc}") from None


def load_twist(source: str, t: FiniteSpectralTriple) -> np.ndarray:
    """A twist document path, or ``grading`` / ``identity``."""
    if source == "grading":
        if t.grading is None:
            raise InputError(f"{t.name or 'triple'} has no grading")
        return t.grading
    if source == "identity":
        return t.identity
    path = Path(source)
    if not path.exists():
        raise InputError(f"{source}: no such file")
    try:
        m = read_twist(path)
    except DocumentError as exc:
        raise InputError(f"{source}: {exc}") from None
    if m.shape[0] != t.hilbert_dim:
        raise InputError(f"{source}: twist is {m.shape[0]}-dimensional, triple is {t.hilbert_dim}-dimensional")
    return m


def resolve_tol(args) -> float:
    if args.tol is not None:
        return args.tol
    env = os.environ.get(TOL_ENV)
    if env:
        try:
            val = float(env)
        except ValueError:
            raise InputError(f"{TOL_ENV}={env!r} is not a number") from None
        if not val > 0:
            raise InputError(f"{TOL_ENV} must be positive")
        return val
    return DEFAULT_TOL[args.command]


def emit(args, report: dict, text: str, out: Optional[str] = None) -> None:
    payload = pretty_dumps(report)
    if out:
        atomic_write(out, payload)
    sys.stdout.write(payload if args.json else text.rstrip("\n") + "\n")


def _header(args, tol: float) -> dict:
    return {"command": list(args.argv), "config": {"tol": tol, "seed": args.seed}}


def cmd_verify(args) -> int:
    t = load_triple(args.triple)
    tol = resolve_tol(args)
    rep = verify_axioms(t, tol)
    doc = _header(args, tol)
    doc["triple"] = t.name
    doc["report"] = rep.to_dict()
    emit(args, doc, f"verify {t.name} (tol={tol:g})\n{rep.summary()}")
    return EXIT_PASS if rep.overall_pass else EXIT_FAIL


def cmd_twist_check(args) -> int:
    t = load_triple(args.triple)
    if t.real_structure is None:
        raise MissingRealStructure(t.name or args.triple)
    x = load_twist(args.twist, t)
    tol = resolve_tol(args)
    opts = SearchOptions(tol=tol, seed=args.seed, include_first_order=args.first_order, num_samples=args.samples)
    rep = full_report(x, t, opts)
    doc = _header(args, tol)
    doc["config"].update(first_order=args.first_order, samples=args.samples)
    doc["triple"] = t.name
    doc["report"] = rep.to_dict()
    emit(args, doc, f"twist-check {t.name} (tol={tol:g})\n{rep.summary()}")
    return EXIT_PASS if rep.overall_pass else EXIT_FAIL


def cmd_classify(args) -> int:
    t = load_triple(args.triple)
    if t.real_structure is None:
        raise MissingRealStructure(t.name or args.triple)
    tol = resolve_tol(args)
    opts = SearchOptions(starts=args.starts, seed=args.seed, include_first_order=args.first_order, tol=tol,
                         workers=args.workers, max_starts=args.max_starts)
    start = time.perf_counter()
    space = classify(t, opts)
    elapsed = time.perf_counter() - start
    doc = _header(args, tol)
    doc["triple"] = t.name
    doc["result"] = space.to_dict()
    if args.timing:
        doc["timing_seconds"] = elapsed
    lines = [f"classify {t.name} (tol={tol:g}, seed={args.seed})",
             f"  linear space dimension: {len(space.linear_basis)}",
             f"  solutions: {len(space.solutions)}"]
    for i, s in enumerate(space.solutions):
        kind = "isolated" if s.tangent_dim == 0 else f"family dim {s.tangent_dim}"
        partner = "" if s.sign_partner is None else f", sign partner #{s.sign_partner}"
        lines.append(f"  #{i}: trace={round(s.trace, 9) + 0.0:+g}, {kind}{partner}, report {'PASS' if s.report.overall_pass else 'FAIL'}")
    if space.product_only:
        lines.append(f"  product-only candidates (degenerate on the finite space): {len(space.product_only)}")
    lines.append(f"  elapsed: {elapsed:.2f} s")
    emit(args, doc, "\n".join(lines), args.out)
    return EXIT_PASS


def cmd_lattice_demo(args) -> int:
    t = load_triple(args.triple)
    t_f = load_twist(args.twist, t)
    if not args.N:
        raise InputError("--N needs at least one cutoff")
    m = None if args.m is None else load_twist(args.m, t)
    try:
        rows = boundedness_scan(args.tcal, t_f, t, args.N, default_scan_pair(t, m), args.L, args.seed)
    except (ValueError, DimensionError) as exc:
        raise InputError(str(exc)) from None
    text = scan_to_csv(rows, args.L)
    if args.out:
        try:
            atomic_write(args.out, text)
        except OSError as exc:
            raise InputError(f"{args.out}: {exc}") from None
    if args.json:
        doc = _header(args, resolve_tol(args))
        doc["config"].update(tcal=args.tcal, N=list(args.N), L=args.L)
        doc["rows"] = [{"N": r.N, "norm": r.norm, "tcal": r.tcal} for r in rows]
        sys.stdout.write(pretty_dumps(doc))
    else:
        sys.stdout.write(text)
    return EXIT_PASS


def cmd_export(args) -> int:
    t = load_triple(args.triple)
    text = dumps_triple(t)
    if args.out:
        atomic_write(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_PASS


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mintwist", description="Minimal twists of finite spectral triples.")
    p.add_argument("--tol", type=float, default=None,
                   help=f"tolerance (default per command; env {TOL_ENV} overrides the default)")
    p.add_argument("--seed", type=int, default=0, help="seed for every randomized step")
    p.add_argument("--json", action="store_true", help="print JSON instead of text")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("verify", help="check the axioms of a finite triple")
    s.add_argument("triple", help="triple document or builtin tag")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("twist-check", help="check a twisting operator against a triple")
    s.add_argument("triple")
    s.add_argument("twist", help="twist document, 'grading' or 'identity'")
    s.add_argument("--no-first-order", dest="first_order", action="store_false")
    s.add_argument("--samples", type=int, default=8, help="random algebra pairs for the direct checks")
    s.set_defaults(func=cmd_twist_check)

    s = sub.add_parser("classify", help="classify admissible twisting operators")
    s.add_argument("triple")
    s.add_argument("--starts", type=int, default=64, help="random starts per batch")
    s.add_argument("--max-starts", type=int, default=4096)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--no-first-order", dest="first_order", action="store_false")
    s.add_argument("--timing", action="store_true", help="include wall time in the JSON report")
    s.add_argument("--out", help="also write the JSON report here")
    s.set_defaults(func=cmd_classify)

    s = sub.add_parser("lattice-demo", help="boundedness scan on the lattice torus")
    s.add_argument("triple")
    s.add_argument("--tcal", choices=["gamma", "identity"], default="gamma")
    s.add_argument("--N", type=int, nargs="+", default=[4, 8, 16, 32])
    s.add_argument("--L", type=float, default=2 * np.pi, help="torus length")
    s.add_argument("--twist", default="grading", help="finite twist T_F: document, 'grading' or 'identity'")
    s.add_argument("--m", default=None, help="finite algebra element m (twist-document format); default identity")
    s.add_argument("--out", help="CSV output path")
    s.set_defaults(func=cmd_lattice_demo)

    s = sub.add_parser("export", help="write a triple as a canonical JSON document")
    s.add_argument("triple")
    s.add_argument("--out")
    s.set_defaults(func=cmd_export)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_PASS
    args.argv = argv
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except MissingRealStructure as exc:
        print(f"error: missing real structure: {exc}", file=sys.stderr)
        return EXIT_STRUCTURE
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
