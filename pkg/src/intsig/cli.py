"""Command-line front end.

Exit codes: 0 ok, 1 verification failure, 2 input error, 3 degenerate geometry.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from .bench import BenchConfig, run_bench
from .curves import EXAMPLES, Curve, generate_example, load_curve, save_curve, shift_start
from .errors import CurveInputError, DegenerateGeometryError
from .invariants2d import invariants_2d
from .invariants3d import invariants_3d
from .signatures import global_signature, local_signature
from .transcriptions import FORMULAS
from .verify import run_verification

EXIT_OK, EXIT_VERIFY, EXIT_INPUT, EXIT_DEGENERATE = 0, 1, 2, 3


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _read(args) -> Curve:
    curve = load_curve(args.input)
    if args.dim is not None and curve.dim != args.dim:
        raise CurveInputError(f"--dim {args.dim} given but {args.input} has {curve.dim} coordinates")
    if getattr(args, "shift_start", None):
        curve = shift_start(curve, args.shift_start)
    return curve


def cmd_invariants(args) -> int:
    curve = _read(args)
    traces = (invariants_2d if curve.dim == 2 else invariants_3d)(curve, args.group)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", *traces])
    columns = [curve.params, *(t.values for t in traces.values())]
    for row in zip(*columns):
        w.writerow([repr(float(v)) for v in row])
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def cmd_signature(args) -> int:
    curve = _read(args)
    if args.mode == "global":
        sig = global_signature(curve, args.group)
        doc = json.loads(sig.to_json())
    else:
        sig = local_signature(curve, args.M, args.group)
        doc = json.loads(sig.to_json())
        part = sig.partition
        doc.update(
            n_segments=part.n_segments,
            breakpoints=part.breakpoints.tolist(),
            anchor=part.anchor,
            delta=part.delta,
            M=part.M,
            tol_part=part.tol_part,
        )
    _emit(json.dumps(doc) + "\n", args.out)
    return EXIT_OK


def cmd_bench(args) -> int:
    cfg = BenchConfig.from_json(args.config) if args.config else BenchConfig()
    overrides = {k: v for k, v in (("seed", args.seed), ("data_dir", args.data_dir), ("M", args.M)) if v is not None}
    if overrides:
        cfg = BenchConfig(**{**cfg.__dict__, **overrides})
    result = run_bench(cfg)
    print(result.format_table())
    if args.out:
        Path(args.out).write_text(json.dumps(result.to_dict()) + "\n")
    return EXIT_OK


def cmd_verify(args) -> int:
    formulas = FORMULAS
    mutated = None
    if args.mutate is not None:
        formulas, mutated, idx = FORMULAS.mutate(np.random.default_rng(args.mutate))
        print(f"mutated: {mutated} term {idx}")
    report = run_verification(formulas, quick=args.quick)
    print(report.format_table())
    failure = report.first_failure
    if failure is not None:
        print(f"verification failed: {failure.name} ({failure.kind} residual {failure.residual:.3e})", file=sys.stderr)
        return EXIT_VERIFY
    print("all checks passed")
    return EXIT_OK


def cmd_generate(args) -> int:
    curve = generate_example(args.name, args.samples)
    if args.out is None:
        raise CurveInputError("generate needs --out")
    save_curve(curve, args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="intsig", description="Integral invariants and signatures of curves.")
    sub = p.add_subparsers(dest="command", required=True)

    def curve_args(q):
        q.add_argument("input", help="curve file (.csv or .json)")
        q.add_argument("--dim", type=int, choices=(2, 3))
        q.add_argument("--out", help="output file (default: stdout)")
        q.add_argument("--shift-start", type=int, default=0, help="rotate a closed curve's samples by this many")

    q = sub.add_parser("invariants", help="write invariant traces as CSV")
    curve_args(q)
    q.add_argument("--group", choices=("special", "full", "euclidean"), default="special")
    q.set_defaults(func=cmd_invariants)

    q = sub.add_parser("signature", help="write a global or local signature as JSON")
    curve_args(q)
    q.add_argument("--group", choices=("special", "full"), default="special")
    q.add_argument("--mode", choices=("global", "local"), default="global")
    q.add_argument("--M", type=int, help="partition resolution (local mode)")
    q.set_defaults(func=cmd_signature)

    q = sub.add_parser("bench", help="run the synthetic classification benchmark")
    q.add_argument("--config", help="JSON file with BenchConfig fields")
    q.add_argument("--seed", type=int)
    q.add_argument("--M", type=int)
    q.add_argument("--data-dir", help="directory of class curves to use instead of synthetic ones")
    q.add_argument("--out", help="write the full report as JSON")
    q.set_defaults(func=cmd_bench)

    q = sub.add_parser("verify", help="check every transcribed formula numerically")
    q.add_argument("--quick", action="store_true", help="fewer and shorter test curves")
    q.add_argument("--mutate", type=int, metavar="SEED", help="perturb one random coefficient first")
    q.set_defaults(func=cmd_verify)

    q = sub.add_parser("generate", help="write one of the built-in example curves")
    q.add_argument("name", choices=sorted(EXAMPLES))
    q.add_argument("--samples", type=int, default=2000)
    q.add_argument("--out")
    q.set_defaults(func=cmd_generate)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except DegenerateGeometryError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (CurveInputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
