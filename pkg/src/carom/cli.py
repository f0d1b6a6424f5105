"""Command-line front end.

Exit codes: 0 success / positive verdict, 1 negative verdict (not
reversible, divergence found), 2 input error, 3 internal verification
failure.  Every subcommand accepts --json for structured output.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass

from .encoding import encode_state, k_max_cap
from .gadgets import check_separation
from .machine import MachineError, check_reversible, parse_machine, parse_tape, format_tape
from .simulate import (
    TracingError,
    run_numeric,
    run_symbolic,
    verify_equivalence,
    write_trace,
)
from .table import NotReversible, compile_table, load_table, to_svg
from .machine import enumerate_tapes

OK, NEGATIVE, INPUT_ERROR, INTERNAL = 0, 1, 2, 3


@dataclass
class Config:
    K: int = 8
    budget: int = 10_000
    precision: int = 60
    json_out: bool = False

    def validate(self):
        if not (1 <= self.K <= k_max_cap()):
            raise ValueError(f"K must be in [1, {k_max_cap()}]")
        if self.budget < 0:
            raise ValueError("budget must be >= 0")
        if self.precision < 20:
            raise ValueError("precision must be >= 20")
        return self


def _emit(args, payload, human):
    if args.json:
        print(json.dumps(payload, indent=1, sort_keys=True))
    else:
        print(human)


def _read_machine(path):
    with open(path) as fh:
        return parse_machine(fh.read(), name=path)


def cmd_check(args):
    machine = _read_machine(args.machine)
    witness = check_reversible(machine)
    if witness is None:
        _emit(args, {"reversible": True}, "reversible")
        return OK
    detail = {
        "reversible": False,
        "witness": [list(witness.first), list(witness.second)],
        "reason": witness.reason,
    }
    _emit(args, detail,
          f"not reversible:\n  {witness.first}\n  {witness.second}\n  ({witness.reason})")
    return NEGATIVE


def cmd_encode(args):
    tape = parse_tape(args.tape)
    point = encode_state(tape, args.k)
    payload = {
        "value": str(point.value),
        "ternary": point.value.ternary_str(),
        "head": args.k,
        "tape": format_tape(tape),
    }
    _emit(args, payload,
          f"{point.value}  (ternary {point.value.ternary_str()})")
    return OK


def cmd_compile(args, cfg):
    machine = _read_machine(args.machine)
    table = compile_table(machine, cfg.K)
    text = table.to_json()
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
        _emit(args, {"written": args.output, "K": cfg.K,
                     "machine_sha256": table.machine_hash},
              f"table written to {args.output} (K={cfg.K})")
    else:
        print(text)
    return OK


def _load_or_compile(args, cfg):
    if args.machine.endswith(".json"):
        with open(args.machine) as fh:
            return load_table(fh.read())
    return compile_table(_read_machine(args.machine), cfg.K)


def cmd_run(args, cfg):
    table = _load_or_compile(args, cfg)
    tape = parse_tape(args.tape)
    outcome = run_symbolic(table, tape, cfg.budget)
    payload = {
        "verdict": outcome.verdict,
        "steps": outcome.steps,
        "periodic": outcome.periodic,
    }
    lines = [f"verdict: {outcome.verdict} after {outcome.steps} steps"]
    if outcome.verdict == "halted":
        payload["tape"] = format_tape(outcome.final_tape)
        payload["head"] = outcome.final_head
        lines.append(f"output tape {format_tape(outcome.final_tape)}, "
                     f"head {outcome.final_head}, periodic orbit")
    if outcome.out_of_range_k is not None:
        payload["out_of_range_k"] = outcome.out_of_range_k
        lines.append(f"head would reach {outcome.out_of_range_k}, beyond K={table.K}")
    if args.mode in ("numeric", "both"):
        result = run_numeric(table, tape, cfg.budget, precision=cfg.precision)
        payload["max_deviation"] = result.max_deviation
        payload["precision"] = cfg.precision
        lines.append(f"numeric trace at {cfg.precision} digits matches; "
                     f"max checkpoint deviation {result.max_deviation:.3e}")
    if args.trace:
        with open(args.trace, "w") as fh:
            write_trace(outcome, fh)
        lines.append(f"trace written to {args.trace}")
    _emit(args, payload, "\n".join(lines))
    return OK


def cmd_verify(args, cfg):
    table = _load_or_compile(args, cfg)
    machine = table.machine
    cells = range(-args.support, args.support + 1)
    tapes = list(enumerate_tapes(cells))
    report = verify_equivalence(machine, table, tapes, cfg.budget,
                                workers=args.workers)
    payload = {
        "passed": report.passed,
        "tapes": report.tapes_checked,
        "verdicts": report.verdicts,
    }
    if report.passed:
        _emit(args, payload,
              f"equivalence verified on {report.tapes_checked} tapes "
              f"({report.verdicts})")
        return OK
    d = report.first_divergence
    payload["divergence"] = {"tape": format_tape(d.tape), "step": d.step,
                             "detail": d.detail}
    _emit(args, payload,
          f"DIVERGENCE on tape {format_tape(d.tape)} at step {d.step}: {d.detail}")
    return NEGATIVE


def cmd_audit(args, cfg):
    reports = check_separation(cfg.K)
    bad = [r for r in reports if not r.passed]
    slacks = [r.min_slack for r in reports if r.min_slack is not None]
    payload = {
        "pairs": sum(r.pair_count for r in reports),
        "passed": not bad,
        "min_slack": str(min(slacks)) if slacks else None,
    }
    if bad:
        _emit(args, payload, f"separation FAILED for {len(bad)} level pairs")
        return NEGATIVE
    _emit(args, payload,
          f"all separation inequalities hold; min slack {min(slacks)}"
          if slacks else "no pairs to check")
    return OK


def cmd_svg(args, cfg):
    table = _load_or_compile(args, cfg)
    trace_points = None
    if args.tape:
        result = run_numeric(table, parse_tape(args.tape), cfg.budget,
                             precision=cfg.precision)
        trace_points = result.points
    levels = range(-min(table.K, args.levels), min(table.K, args.levels) + 1)
    svg = to_svg(table, levels=levels, trace_points=trace_points)
    out = args.output or "table.svg"
    with open(out, "w") as fh:
        fh.write(svg)
    _emit(args, {"written": out}, f"svg written to {out}")
    return OK


def build_parser():
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--K", type=int, default=8,
                        help="head range bound (default 8)")
    shared.add_argument("--budget", type=int, default=10_000,
                        help="machine step budget (default 10000)")
    shared.add_argument("--precision", type=int, default=60,
                        help="numeric working digits (default 60)")
    shared.add_argument("--json", action="store_true",
                        help="structured output")

    parser = argparse.ArgumentParser(
        prog="carom",
        description="compile reversible Turing machines into billiard tables "
                    "and simulate them exactly")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", parents=[shared],
                       help="reversibility verdict for a machine file")
    p.add_argument("machine")

    p = sub.add_parser("encode", parents=[shared],
                       help="encode a tape literal at a head position")
    p.add_argument("tape")
    p.add_argument("--k", type=int, default=0)

    p = sub.add_parser("compile", parents=[shared],
                       help="compile a machine into a table file")
    p.add_argument("machine")
    p.add_argument("-o", "--output")

    p = sub.add_parser("run", parents=[shared],
                       help="simulate a tape on a machine or table file")
    p.add_argument("machine")
    p.add_argument("--tape", required=True)
    p.add_argument("--mode", choices=("symbolic", "numeric", "both"),
                   default="symbolic")
    p.add_argument("--trace", help="write the event log to this file")

    p = sub.add_parser("verify", parents=[shared],
                       help="machine/billiard lockstep equivalence")
    p.add_argument("machine")
    p.add_argument("--support", type=int, default=2,
                   help="check all tapes with support in [-N, N] (default 2)")
    p.add_argument("--workers", type=int, default=1)

    sub.add_parser("audit", parents=[shared],
                   help="exact wall separation inequalities")

    p = sub.add_parser("svg", parents=[shared],
                       help="render the table (optionally with a trace)")
    p.add_argument("machine")
    p.add_argument("-o", "--output")
    p.add_argument("--tape", help="overlay the numeric trajectory of this tape")
    p.add_argument("--levels", type=int, default=2,
                   help="head levels of wall detail to draw (default 2)")

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = Config(K=args.K, budget=args.budget,
                     precision=args.precision, json_out=args.json).validate()
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return INPUT_ERROR
    try:
        if args.command == "check":
            return cmd_check(args)
        if args.command == "encode":
            return cmd_encode(args)
        if args.command == "compile":
            return cmd_compile(args, cfg)
        if args.command == "run":
            return cmd_run(args, cfg)
        if args.command == "verify":
            return cmd_verify(args, cfg)
        if args.command == "audit":
            return cmd_audit(args, cfg)
        if args.command == "svg":
            return cmd_svg(args, cfg)
        raise AssertionError(args.command)
    except (MachineError, NotReversible, FileNotFoundError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return INPUT_ERROR
    except (TracingError, AssertionError) as err:
        print(f"internal verification failure: {err}", file=sys.stderr)
        return INTERNAL


if __name__ == "__main__":
    sys.exit(main())
