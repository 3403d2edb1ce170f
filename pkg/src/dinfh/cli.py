"""Batch command-line front end.

Subcommands: membership, slice, trace, mc-check, period, independence,
tree, tree-spectrum, coverage, verify, erratum-report.  Artifacts are JSON
or CSV with a ``schema_version`` field and the RNG seed recorded; identical
configuration and seed produce byte-identical output.  Exit codes: 0 on
success, 1 on usage errors, 2 on verification failure or a propagated
computation error (rendered as structured JSON on stderr).
"""

from __future__ import annotations

import os

# honor the worker cap before numpy wires up its BLAS pools
_cap = os.environ.get("SPECTRA_THREADS")
if _cap:
    for _var in (
        "OMP_NUM_THREADS",
        "OPENBLAS_NUM_THREADS",
        "MKL_NUM_THREADS",
        "NUMEXPR_NUM_THREADS",
    ):
        os.environ.setdefault(_var, _cap)

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import acceptance, erratum, loops, oracle, selfsim, traces
from .config import DEFAULT_SEED, SCHEMA_VERSION, RunConfig
from .errors import DinfhError
from .group import FunctionalKind, parse_word
from .spectrum import (
    AXIS_NAMES,
    PencilPoint,
    RasterPlane,
    membership,
    raster_csv_lines,
    slice_raster,
)

WORD_CHOICES = ("e", "a", "t", "tau")


class _Parser(argparse.ArgumentParser):
    # usage problems exit 1; verification failures exit 2
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _complex(text: str) -> complex:
    parts = text.split(",")
    if len(parts) == 1:
        return complex(float(parts[0]), 0.0)
    if len(parts) == 2:
        return complex(float(parts[0]), float(parts[1]))
    raise argparse.ArgumentTypeError(f"bad complex literal {text!r} (use RE or RE,IM)")


def _axis(text: str) -> int:
    if text in AXIS_NAMES:
        return AXIS_NAMES.index(text)
    raise argparse.ArgumentTypeError(f"axis must be one of {AXIS_NAMES}")


def _artifact(payload: dict, seed: int) -> dict:
    return {"schema_version": SCHEMA_VERSION, "seed": seed, **payload}


def _emit(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if out:
        Path(out).write_text(text)
    sys.stdout.write(text)


def _emit_lines(lines, out: str | None) -> None:
    text = "\n".join(lines) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _parse_loop(text: str, steps: int | None):
    if text in loops.NAMED_LOOPS:
        loop = loops.NAMED_LOOPS[text]()
    else:
        try:
            desc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise argparse.ArgumentTypeError(
                f"loop must be one of {sorted(loops.NAMED_LOOPS)} or inline JSON"
            ) from exc
        if desc.get("kind", "circle") != "circle":
            raise argparse.ArgumentTypeError("inline loops must have kind 'circle'")
        center = [complex(re, im) for re, im in desc["center"]]
        loop = loops.circle_loop(
            center,
            float(desc["radius"]),
            desc["coords"],
            desc.get("signs"),
            steps=int(desc.get("steps", 512)),
            name=desc.get("name", "inline"),
        )
    if steps:
        loop.steps = steps
    return loop


def _add_z_argument(sub):
    sub.add_argument(
        "--z",
        nargs=4,
        type=_complex,
        required=True,
        metavar=("Z0", "Z1", "Z2", "Z3"),
        help="pencil coefficients as RE or RE,IM",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dinfh", description=__doc__)
    parser.add_argument("--seed", type=int, default=DEFAULT_SEED)
    subs = parser.add_subparsers(dest="command", required=True)

    sub = subs.add_parser("membership", help="closed-form spectrum membership")
    _add_z_argument(sub)
    sub.add_argument("--tol", type=float, default=1e-9)
    sub.add_argument("--out")

    sub = subs.add_parser("slice", help="membership raster on a 2-plane")
    sub.add_argument("--axes", nargs=2, type=_axis, required=True)
    sub.add_argument(
        "--fixed",
        nargs=2,
        type=_complex,
        required=True,
        help="values of the two fixed coordinates, in axis order",
    )
    sub.add_argument("--grid", nargs=2, type=int, default=(64, 64))
    sub.add_argument("--u-range", nargs=2, type=float, default=(-2.0, 2.0))
    sub.add_argument("--v-range", nargs=2, type=float, default=(-2.0, 2.0))
    sub.add_argument("--tol", type=float, default=1e-9)
    sub.add_argument("--out")

    sub = subs.add_parser("trace", help="trace of resolvent times word")
    _add_z_argument(sub)
    sub.add_argument("--functional", choices=("tr", "phitr"), default="tr")
    sub.add_argument("--word", choices=WORD_CHOICES, default="e")
    sub.add_argument("--method", choices=("quad", "oracle"), default="quad")
    sub.add_argument("--N", type=int, default=256)
    sub.add_argument("--n-nodes", type=int, default=256)
    sub.add_argument("--formula", choices=("symbol", "tabulated"), default="symbol")
    sub.add_argument("--out")

    sub = subs.add_parser("mc-check", help="closedness residual of a 1-form")
    _add_z_argument(sub)
    sub.add_argument("--functional", choices=("tr", "phitr"), default="tr")
    sub.add_argument("--step", type=float, default=1e-5)
    sub.add_argument("--n-nodes", type=int, default=256)
    sub.add_argument("--formula", choices=("symbol", "tabulated"), default="symbol")
    sub.add_argument("--out")

    sub = subs.add_parser("period", help="loop period of a 1-form")
    sub.add_argument("--loop", required=True, help="L1, L2, or inline JSON circle")
    sub.add_argument("--functional", choices=("tr", "phitr"), default="tr")
    sub.add_argument("--steps", type=int)
    sub.add_argument("--method", choices=("analytic", "oracle"), default="analytic")
    sub.add_argument("--N", type=int, default=32)
    sub.add_argument("--out")

    sub = subs.add_parser("independence", help="period matrix over loops")
    sub.add_argument("--loops", default="L1,L2", help="comma-separated loop names")
    sub.add_argument("--out")

    sub = subs.add_parser("tree", help="level matrix dump of a group element")
    sub.add_argument("--element", default="a", help="word over a, t, T (tau), e")
    sub.add_argument("--level", type=int, default=2)
    sub.add_argument("--out")

    sub = subs.add_parser("tree-spectrum", help="level-n pencil eigenvalues")
    sub.add_argument("--z1", type=float, required=True)
    sub.add_argument("--z2", type=float, required=True)
    sub.add_argument("--z3", type=float, required=True)
    sub.add_argument("--level", type=int, default=4)
    sub.add_argument("--out")

    sub = subs.add_parser("coverage", help="spectrum coverage gap at a level")
    sub.add_argument("--z1", type=float, required=True)
    sub.add_argument("--z2", type=float, required=True)
    sub.add_argument("--z3", type=float, required=True)
    sub.add_argument("--level", type=int, default=4)
    sub.add_argument("--out")

    sub = subs.add_parser("verify", help="run the acceptance criteria")
    sub.add_argument("--only", help="comma-separated criterion numbers")
    sub.add_argument("--out")

    sub = subs.add_parser("erratum-report", help="tabulated-vs-oracle adjudication")
    sub.add_argument("--skip-periods", action="store_true")
    sub.add_argument("--out")

    return parser


def _cmd_membership(args) -> int:
    res = membership(PencilPoint(*args.z), tol=args.tol)
    _emit(_artifact(res.to_json(), args.seed), args.out)
    return 0


def _cmd_slice(args) -> int:
    free = set(args.axes)
    fixed_axes = [i for i in range(4) if i not in free]
    vals = [0j] * 4
    for ax, val in zip(fixed_axes, args.fixed):
        vals[ax] = val
    plane = RasterPlane(axes=tuple(args.axes), fixed=PencilPoint(*vals))
    u, v, margin, inside = slice_raster(
        plane,
        (args.grid[0], args.grid[1], tuple(args.u_range), tuple(args.v_range)),
        tol=args.tol,
    )
    _emit_lines(raster_csv_lines(u, v, margin, inside), args.out)
    return 0


def _cmd_trace(args) -> int:
    kind = FunctionalKind.coerce(args.functional)
    if args.method == "oracle":
        value = oracle.oracle_functional(args.z, args.word, kind, N=args.N)
        meta = {"method": "oracle", "N": args.N}
    else:
        value = traces.trace_quadrature(
            traces.TraceRequest(args.z, kind, args.word, args.n_nodes),
            formula=args.formula,
        )
        meta = {"method": "quad", "formula": args.formula, "n_nodes": args.n_nodes}
    payload = {
        "functional": kind.json_tag(),
        "word": args.word,
        "value_re": value.real,
        "value_im": value.imag,
        **meta,
    }
    _emit(_artifact(payload, args.seed), args.out)
    return 0


def _cmd_mc_check(args) -> int:
    kind = FunctionalKind.coerce(args.functional)
    res = traces.closedness_residual(
        args.z, kind, step=args.step, n_nodes=args.n_nodes, formula=args.formula
    )
    lines = ["coord_i,coord_j,residual"]
    for i in range(4):
        for j in range(4):
            lines.append(f"{AXIS_NAMES[i]},{AXIS_NAMES[j]},{float(res[i, j])!r}")
    lines.append(f"# max residual: {float(res.max())!r}")
    _emit_lines(lines, args.out)
    return 0


def _cmd_period(args) -> int:
    loop = _parse_loop(args.loop, args.steps)
    kind = FunctionalKind.coerce(args.functional)
    if args.method == "oracle":
        value = oracle.oracle_period(loop, kind, N=args.N, steps=args.steps)
        quantum = traces.QUANTA[kind]
        nearest = int(round((value / quantum).real))
        rep = traces.PeriodReport(
            value, quantum, nearest, abs(value - nearest * quantum), loop.name, kind
        )
    else:
        rep = traces.loop_period(loop, kind, steps=args.steps)
    payload = rep.to_json()
    payload["method"] = args.method
    _emit(_artifact(payload, args.seed), args.out)
    return 0


def _cmd_independence(args) -> int:
    loop_objs = [_parse_loop(name.strip(), None) for name in args.loops.split(",")]
    out = traces.class_independence(loop_objs)
    payload = {
        "loops": [l.name for l in loop_objs],
        "integer_matrix": out["integer_matrix"],
        "rank": out["rank"],
        "max_residual": float(out["residuals"].max()),
    }
    _emit(_artifact(payload, args.seed), args.out)
    return 0


def _cmd_tree(args) -> int:
    g = parse_word(args.element)
    lm = selfsim.level_matrix(g, args.level)
    _emit_lines(lm.dump_lines(), args.out)
    return 0


def _cmd_tree_spectrum(args) -> int:
    lines = selfsim.eigenvalue_csv_lines(args.z1, args.z2, args.z3, args.level)
    _emit_lines(lines, args.out)
    return 0


def _cmd_coverage(args) -> int:
    gap = selfsim.coverage_gap(args.z1, args.z2, args.z3, args.level)
    payload = {
        "z1": args.z1,
        "z2": args.z2,
        "z3": args.z3,
        "level": args.level,
        "gap": gap,
    }
    _emit(_artifact(payload, args.seed), args.out)
    return 0


def _cmd_verify(args) -> int:
    only = [int(x) for x in args.only.split(",")] if args.only else None
    config = RunConfig(seed=args.seed)
    results = acceptance.run_all(config, only=only)
    payload = {
        "criteria": [
            {
                "number": r.number,
                "name": r.name,
                "passed": r.passed,
                "seconds": round(r.seconds, 3),
                "details": _json_safe(r.details),
            }
            for r in results
        ],
        "all_passed": all(r.passed for r in results),
    }
    _emit(_artifact(payload, args.seed), args.out)
    return 0 if payload["all_passed"] else 2


def _cmd_erratum(args) -> int:
    config = RunConfig(seed=args.seed)
    report = erratum.erratum_report(config, include_periods=not args.skip_periods)
    _emit(report, args.out)
    return 0


def _json_safe(obj):
    if isinstance(obj, dict):
        return {str(k): _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


_COMMANDS = {
    "membership": _cmd_membership,
    "slice": _cmd_slice,
    "trace": _cmd_trace,
    "mc-check": _cmd_mc_check,
    "period": _cmd_period,
    "independence": _cmd_independence,
    "tree": _cmd_tree,
    "tree-spectrum": _cmd_tree_spectrum,
    "coverage": _cmd_coverage,
    "verify": _cmd_verify,
    "erratum-report": _cmd_erratum,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except argparse.ArgumentTypeError as exc:
        sys.stderr.write(f"dinfh: error: {exc}\n")
        return 1
    except DinfhError as exc:
        err = {"error": type(exc).__name__, "message": str(exc)}
        sys.stderr.write(json.dumps(err, sort_keys=True) + "\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
