"""Command-line driver: ``rbo {trace,decompose,verify,lemmas,worst}``.

Exit codes: 0 when every check passes, 1 when a bound or lemma counterexample
was found (the report is still written), 2 for bad input or configuration.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import verifier
from .analysis import decompose, segment_image
from .bitops import rev_k
from .errors import RBOError
from .protocol import (QueryInterval, cycle_new, energies, format_trace_records, run,
                       target_bounds)
from .verifier import SweepConfig


class InputError(RBOError):
    pass


def _int_pair(text: str, what: str) -> tuple[int, int]:
    parts = text.split(":")
    if len(parts) != 2:
        raise InputError(f"{what} must look like A:B, got {text!r}")
    try:
        return int(parts[0]), int(parts[1])
    except ValueError:
        raise InputError(f"{what} must be two integers, got {text!r}") from None


def _parse_keys_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise InputError(f"keys must be comma-separated integers, got {text!r}") from None


def read_keys_file(path: str) -> list[int]:
    """One ascending integer per line; blank lines are skipped."""
    keys = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                keys.append(int(line))
            except ValueError:
                raise InputError(f"{path}:{lineno}: not an integer: {line!r}") from None
    return keys


def _k_range(args) -> tuple[int, int]:
    if args.k_range is not None:
        return _int_pair(args.k_range, "--k-range")
    if args.k is not None:
        return args.k, args.k
    raise InputError("give --k or --k-range")


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# --- trace -----------------------------------------------------------------

def _resolve_trace_inputs(args):
    if args.targets is not None:
        if args.keys is not None or args.keys_file is not None:
            raise InputError("--targets builds its own keys; drop --keys/--keys-file")
        if args.k is None:
            raise InputError("--targets needs --k")
        r_lo, r_hi = _int_pair(args.targets, "--targets")
        keys, q = verifier.query_for_targets(1 << args.k, r_lo, r_hi)
        return cycle_new(keys), q
    if args.keys is not None:
        keys = _parse_keys_list(args.keys)
    elif args.keys_file is not None:
        keys = read_keys_file(args.keys_file)
    elif args.k is not None:
        keys = list(range(0, 2 << args.k, 2))
    else:
        raise InputError("give --keys, --keys-file or --k")
    cycle = cycle_new(keys)
    if args.k is not None and args.k != cycle.k:
        raise InputError(f"--k {args.k} does not match {len(keys)} keys")
    lo, hi = _int_pair(args.query, "--query")
    return cycle, QueryInterval(lo, hi)


def trace_rows(trace, cycle) -> list[dict]:
    by_slot = {}
    for e in trace.events:
        by_slot.setdefault(e.slot, []).append(e)
    rows = []
    for m in range(cycle.n):
        t = trace.s + m
        idx = rev_k(t, cycle.k)
        evs = by_slot.get(t, [])
        kinds = [e.kind.value for e in evs]
        rows.append({
            "t": t, "index": idx, "radio": "on" if evs else "off",
            "key": cycle.keys[idx] if evs else None,
            "action": "+".join(kinds) if kinds else "-",
            "lb": trace.lb_history[m + 1], "ub": trace.ub_history[m + 1],
        })
    return rows


def cmd_trace(args) -> int:
    cycle, q = _resolve_trace_inputs(args)
    trace = run(cycle, q, args.s)
    e = energies(trace)
    r_lo, r_hi = target_bounds(cycle, q)
    if args.format == "csv":
        _emit(format_trace_records(trace), args.out)
        return 0
    rows = trace_rows(trace, cycle)
    if args.format == "json":
        doc = {"k": cycle.k, "s": trace.s, "query": [q.lo, q.hi], "targets": [r_lo, r_hi],
               "rows": rows, "energies": e._asdict(), "empty_detected": trace.done_slot}
        _emit(json.dumps(doc, indent=2) + "\n", args.out)
        return 0
    lines = [f"k={cycle.k} n={cycle.n} s={trace.s} query=[{q.lo}, {q.hi}] targets=({r_lo}, {r_hi})",
             f"{'t':>6} {'rev':>6} {'radio':>5} {'key':>8} {'action':<26} {'lb':>6} {'ub':>6}"]
    for r in rows:
        key = "" if r["key"] is None else str(r["key"])
        lines.append(f"{r['t']:>6} {r['index']:>6} {r['radio']:>5} {key:>8} {r['action']:<26} "
                     f"{r['lb']:>6} {r['ub']:>6}")
    if trace.done_slot is not None:
        lines.append(f"empty-detected at slot {trace.done_slot}: no keys in the query interval")
    lines.append(f"left={e.left} right={e.right} extra={e.extra} total={e.total}")
    _emit("\n".join(lines) + "\n", args.out)
    return 0


# --- decompose -------------------------------------------------------------

def cmd_decompose(args) -> int:
    if args.k is None:
        raise InputError("decompose needs --k")
    n = 1 << args.k
    dec = decompose(args.s % n, args.k)
    segs = []
    for seg in dec.segments:
        segs.append({"i": seg.i, "t": seg.t, "level": seg.level, "y": [seg.y_lo, seg.y_hi],
                     "beta": str(seg.beta), "alpha": None if seg.alpha is None else str(seg.alpha),
                     "x": sorted(segment_image(seg))})
    if args.format == "json":
        _emit(json.dumps({"k": args.k, "s": dec.s, "last": dec.last, "segments": segs},
                         indent=2) + "\n", args.out)
        return 0
    lines = [f"k={args.k} s={dec.s} last={dec.last}"]
    for d in segs:
        xs = d["x"] if len(d["x"]) <= 16 else d["x"][:8] + ["..."]
        lines.append(f"Y_{d['i']} = [{d['y'][0]}, {d['y'][1]}]  l={d['level']}  beta={d['beta']}  "
                     f"alpha={d['alpha'] or '-'}  X={xs}")
    _emit("\n".join(lines) + "\n", args.out)
    return 0


# --- verify / lemmas / worst -----------------------------------------------

def _sweep_config(args) -> SweepConfig:
    k_min, k_max = _k_range(args)
    keys = None
    if args.key_scheme == "file":
        if not args.keys_file:
            raise InputError("--key-scheme file needs --keys-file")
        keys = tuple(read_keys_file(args.keys_file))
    cfg = SweepConfig(k_min, k_max, mode=args.mode, samples=args.samples, seed=args.seed,
                      key_scheme=args.key_scheme, keys=keys, jobs=args.jobs)
    cfg.validate()
    return cfg


def _bounds_text(report) -> str:
    lines = [f"{'k':>3} {'runs':>10} {'left':>5} {'right':>5} {'extra':>5} "
             f"{'k+1':>4} {'k+2':>4} {'2k+3':>5} {'4k+2':>5}  verdict"]
    for s in report.bounds:
        lines.append(f"{s.k:>3} {s.runs:>10} {s.max_left:>5} {s.max_right:>5} {s.max_extra:>5} "
                     f"{s.bound_left:>4} {s.bound_right:>4} {s.bound_extra:>5} {s.old_bound:>5}  "
                     f"{'pass' if s.passed else 'FAIL'}")
    return "\n".join(lines) + "\n"


def cmd_verify(args) -> int:
    report = verifier.sweep_bounds(_sweep_config(args))
    text = {"json": report.to_json, "csv": report.to_csv}.get(args.format, lambda: _bounds_text(report))()
    _emit(text, args.out)
    return 0 if report.passed else 1


def lemma_text(report) -> str:
    lines = []
    for k, table in sorted(report.lemmas.items()):
        lines.append(f"k={k}")
        lines.append(f"  {'lemma':<26} {'checked':>8} {'passed':>8} {'vacuous':>8} {'failed':>7} {'vacuity':>8}")
        for name, v in table.items():
            vac = 100.0 * v.vacuous / v.checked if v.checked else 0.0
            lines.append(f"  {name:<26} {v.checked:>8} {v.passed:>8} {v.vacuous:>8} {v.failed:>7} {vac:>7.1f}%")
    lines.append("all lemmas pass" if report.passed else "COUNTEREXAMPLES FOUND")
    return "\n".join(lines) + "\n"


def cmd_lemmas(args) -> int:
    k_min, k_max = _k_range(args)
    report = verifier.lemma_report(k_min, k_max, jobs=args.jobs)
    _emit(report.to_json() if args.format == "json" else lemma_text(report), args.out)
    return 0 if report.passed else 1


def cmd_worst(args) -> int:
    report = verifier.sweep_bounds(_sweep_config(args))
    witnesses = [s.witness_extra for s in report.bounds]
    if args.format == "json":
        text = json.dumps([w.__dict__ for w in witnesses], indent=2) + "\n"
    elif args.format == "csv":
        text = "k,s,r_lo,r_hi,left,right,extra,bound_extra\n" + "".join(
            f"{w.k},{w.s},{w.r_lo},{w.r_hi},{w.left},{w.right},{w.extra},{2 * w.k + 3}\n"
            for w in witnesses)
    else:
        text = "".join(f"k={w.k}: max extra {w.extra} (left {w.left}, right {w.right}) "
                       f"at s={w.s} targets=({w.r_lo}, {w.r_hi}); bound {2 * w.k + 3}\n"
                       for w in witnesses)
    _emit(text, args.out)
    return 0 if report.passed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rbo", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("trace", help="simulate one receiver and print its slots")
    p.add_argument("--k", type=int)
    p.add_argument("--s", type=int, default=0)
    keys = p.add_mutually_exclusive_group()
    keys.add_argument("--keys", help="comma-separated ascending integers")
    keys.add_argument("--keys-file", help="one ascending integer per line")
    query = p.add_mutually_exclusive_group(required=True)
    query.add_argument("--query", help="LO:HI (use --query=-5:-1 for negatives)")
    query.add_argument("--targets", help="R_LO:R_HI target indices over keys 0,2,4,...")
    p.add_argument("--format", choices=("text", "json", "csv"), default="text")
    p.add_argument("--out")
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("decompose", help="print the segment decomposition for a start slot")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--s", type=int, default=0)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--out")
    p.set_defaults(func=cmd_decompose)

    for name, func, help_ in (("verify", cmd_verify, "check the energy bounds over a k range"),
                              ("worst", cmd_worst, "report worst-case extra-energy witnesses")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--k", type=int)
        p.add_argument("--k-range")
        p.add_argument("--mode", choices=verifier.MODES, default="exhaustive")
        p.add_argument("--samples", type=int, default=10_000)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--key-scheme", choices=verifier.KEY_SCHEMES, default="distinct")
        p.add_argument("--keys-file")
        p.add_argument("--format", choices=("text", "json", "csv"), default="text")
        p.add_argument("--out")
        p.add_argument("--jobs", type=int, default=1)
        p.set_defaults(func=func)

    p = sub.add_parser("lemmas", help="run the lemma suite exhaustively")
    p.add_argument("--k", type=int)
    p.add_argument("--k-range")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--out")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_lemmas)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (RBOError, ValueError, OSError) as exc:
        print(f"rbo {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
