"""Exhaustive and randomized verification of the receiver's energy bounds.

Two layers:

* :func:`sweep_bounds` drives the lockstep engine over every start slot and
  every realizable pair of target bounds (or a random sample of them) and
  tallies left/right/extra energy against ``k+1``, ``k+2`` and ``2k+3``.
  Every lane also checks the closed-form lb/ub histories and protocol
  correctness.
* :func:`check_lemma_suite` runs the scalar receiver per instance and evaluates
  each structural statement about the segment decomposition against the trace.
"""

from __future__ import annotations

import bisect
import csv
import io
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable

import numpy as np

from . import analysis
from .analysis import LEFT, RIGHT, Decomposition, decompose, side_quantities
from .batch import simulate_batch
from .bitops import rev_k
from .errors import ConfigError, UsageError
from .protocol import (BroadcastCycle, EventKind, QueryInterval, ReceiverTrace, cycle_new,
                       energies, format_trace_records, run, target_bounds)

DEFAULT_EXHAUSTIVE_CAP = 8
CAP_ENV_VAR = "RBO_EXHAUSTIVE_CAP"
DEFAULT_LEMMA_CAP = 6
MAX_RANDOM_K = 16
CHUNK_LANES = 1 << 20
MAX_STORED_COUNTEREXAMPLES = 20

MODES = ("exhaustive", "random")
KEY_SCHEMES = ("distinct", "duplicates", "file")


def exhaustive_cap() -> int:
    raw = os.environ.get(CAP_ENV_VAR)
    if raw is None:
        return DEFAULT_EXHAUSTIVE_CAP
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{CAP_ENV_VAR} must be an integer, got {raw!r}") from None


@dataclass(frozen=True)
class SweepConfig:
    k_min: int
    k_max: int
    mode: str = "exhaustive"
    samples: int = 10_000
    seed: int = 0
    key_scheme: str = "distinct"
    keys: tuple[int, ...] | None = None
    cap: int | None = None
    jobs: int = 1

    def validate(self) -> None:
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}")
        if self.key_scheme not in KEY_SCHEMES:
            raise ConfigError(f"key_scheme must be one of {KEY_SCHEMES}")
        if self.k_min < 0 or self.k_max < self.k_min:
            raise ConfigError(f"bad k range {self.k_min}:{self.k_max}")
        cap = self.cap if self.cap is not None else exhaustive_cap()
        if self.mode == "exhaustive" and self.k_max > cap:
            raise ConfigError(f"exhaustive mode limited to k <= {cap}, got k_max={self.k_max}")
        if self.mode == "random":
            if self.k_max > MAX_RANDOM_K:
                raise ConfigError(f"random mode limited to k <= {MAX_RANDOM_K}")
            if self.samples < 1:
                raise ConfigError("samples must be positive")
        if self.key_scheme == "file":
            if self.keys is None:
                raise ConfigError("key_scheme 'file' needs keys")
            cycle = cycle_new(self.keys)
            if not self.k_min == self.k_max == cycle.k:
                raise ConfigError(f"{len(self.keys)} keys fix k={cycle.k}; k range must be {cycle.k}:{cycle.k}")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["keys"] = list(self.keys) if self.keys is not None else None
        return d


def query_for_targets(n: int, r_lo: int, r_hi: int) -> tuple[list[int], QueryInterval]:
    """Keys ``0, 2, 4, ...`` and an odd-endpoint query whose target bounds are ``(r_lo, r_hi)``."""
    if not 0 <= r_lo <= r_hi + 1 <= n:
        raise UsageError(f"infeasible target bounds ({r_lo}, {r_hi}) for n={n}")
    keys = [2 * i for i in range(n)]
    if r_lo <= r_hi:
        return keys, QueryInterval(2 * r_lo - 1, 2 * r_hi + 1)
    return keys, QueryInterval(2 * r_lo - 1, 2 * r_lo - 1)


def target_pairs(n: int) -> tuple[np.ndarray, np.ndarray]:
    """All ``(r_lo, r_hi)`` with ``0 <= r_lo <= r_hi + 1 <= n``, lexicographic."""
    r_lo = np.concatenate([np.full(n - a + 1, a) for a in range(n + 1)])
    r_hi = np.concatenate([np.arange(a - 1, n) for a in range(n + 1)])
    return r_lo.astype(np.int64), r_hi.astype(np.int64)


def pair_count(n: int) -> int:
    return (n + 1) * (n + 2) // 2


def pair_from_rank(n: int, ranks: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Invert the lexicographic numbering used by :func:`target_pairs`."""
    a = np.arange(n + 2, dtype=np.int64)
    offsets = a * (n + 1) - a * (a - 1) // 2
    r_lo = np.searchsorted(offsets, ranks, side="right") - 1
    r_hi = r_lo - 1 + (ranks - offsets[r_lo])
    return r_lo, r_hi


def generate_keys(cfg: SweepConfig, k: int) -> np.ndarray:
    n = 1 << k
    if cfg.key_scheme == "distinct":
        return 2 * np.arange(n, dtype=np.int64)
    if cfg.key_scheme == "duplicates":
        rng = np.random.default_rng([cfg.seed, k, 1])
        return 2 * np.sort(rng.integers(0, max(1, n // 2), size=n)).astype(np.int64)
    return np.asarray(cfg.keys, dtype=np.int64)


def query_candidates(keys: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Endpoint pairs realizing every distinct target-bound pair of ``keys``.

    Receiver behavior depends on the query only through its target bounds, so
    one representative per realizable pair suffices.  Candidates are each key
    and the integers just around it.
    """
    distinct = np.unique(keys)
    points = np.unique(np.concatenate([distinct - 1, distinct, distinct + 1]))
    lo_i, hi_i = np.triu_indices(len(points))
    los, his = points[lo_i], points[hi_i]
    r_lo = np.searchsorted(keys, los, side="left")
    r_hi = np.searchsorted(keys, his, side="right") - 1
    _, first = np.unique(np.stack([r_lo, r_hi], axis=1), axis=0, return_index=True)
    first = np.sort(first)
    order = np.lexsort((r_hi[first], r_lo[first]))
    sel = first[order]
    return los[sel], his[sel]


# --- bound sweep -----------------------------------------------------------


@dataclass
class Witness:
    k: int
    s: int
    r_lo: int
    r_hi: int
    left: int
    right: int
    extra: int


@dataclass
class KSummary:
    k: int
    runs: int = 0
    max_left: int = 0
    max_right: int = 0
    max_extra: int = 0
    left_violations: int = 0
    right_violations: int = 0
    extra_violations: int = 0
    small_k_violations: int = 0
    closed_form_failures: int = 0
    protocol_failures: int = 0
    witness_left: Witness | None = None
    witness_right: Witness | None = None
    witness_extra: Witness | None = None
    counterexamples: list[Witness] = field(default_factory=list)

    @property
    def bound_left(self) -> int:
        return self.k + 1

    @property
    def bound_right(self) -> int:
        return self.k + 2

    @property
    def bound_extra(self) -> int:
        return 2 * self.k + 3

    @property
    def old_bound(self) -> int:
        return 4 * self.k + 2

    @property
    def passed(self) -> bool:
        return not (self.left_violations or self.right_violations or self.extra_violations
                    or self.small_k_violations or self.closed_form_failures
                    or self.protocol_failures)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.update(bound_left=self.bound_left, bound_right=self.bound_right,
                 bound_extra=self.bound_extra, old_bound=self.old_bound,
                 old_bound_margin=self.old_bound - self.max_extra,
                 verdict="pass" if self.passed else "fail")
        return d


def _better(cand: Witness, current: Witness | None, attr: str) -> bool:
    if current is None:
        return True
    a, b = getattr(cand, attr), getattr(current, attr)
    if a != b:
        return a > b
    return (cand.s, cand.r_lo, cand.r_hi) < (current.s, current.r_lo, current.r_hi)


def _lane_witness(k: int, out, values: np.ndarray) -> Witness:
    best = values.max()
    hit = np.flatnonzero(values == best)
    order = np.lexsort((out.r_hi[hit], out.r_lo[hit], out.starts[hit]))
    j = hit[order[0]]
    return Witness(k, int(out.starts[j]), int(out.r_lo[j]), int(out.r_hi[j]),
                   int(out.left[j]), int(out.right[j]), int(out.extra[j]))


def _summarize_chunk(k: int, keys, starts, los, his) -> KSummary:
    out = simulate_batch(keys, starts, los, his, k)
    summ = KSummary(k, runs=len(starts))
    extra = out.extra
    summ.max_left = int(out.left.max())
    summ.max_right = int(out.right.max())
    summ.max_extra = int(extra.max())
    summ.witness_left = _lane_witness(k, out, out.left)
    summ.witness_right = _lane_witness(k, out, out.right)
    summ.witness_extra = _lane_witness(k, out, extra)
    bad_left = out.left > k + 1
    bad_right = out.right > k + 2
    bad_extra = extra > 2 * k + 3
    bad_small = (extra > 2) if k <= 1 else np.zeros_like(bad_left)
    bad_cf = ~out.closed_form_ok
    bad_proto = ~out.protocol_ok
    summ.left_violations = int(bad_left.sum())
    summ.right_violations = int(bad_right.sum())
    summ.extra_violations = int(bad_extra.sum())
    summ.small_k_violations = int(bad_small.sum())
    summ.closed_form_failures = int(bad_cf.sum())
    summ.protocol_failures = int(bad_proto.sum())
    any_bad = bad_left | bad_right | bad_extra | bad_small | bad_cf | bad_proto
    for j in np.flatnonzero(any_bad)[:MAX_STORED_COUNTEREXAMPLES]:
        summ.counterexamples.append(Witness(k, int(out.starts[j]), int(out.r_lo[j]), int(out.r_hi[j]),
                                            int(out.left[j]), int(out.right[j]), int(extra[j])))
    return summ


def merge_summaries(a: KSummary, b: KSummary) -> KSummary:
    """Associative, commutative merge of two partial tallies for the same k."""
    if a.k != b.k:
        raise UsageError("cannot merge summaries for different k")
    m = KSummary(a.k, runs=a.runs + b.runs)
    m.max_left = max(a.max_left, b.max_left)
    m.max_right = max(a.max_right, b.max_right)
    m.max_extra = max(a.max_extra, b.max_extra)
    for attr in ("left_violations", "right_violations", "extra_violations",
                 "small_k_violations", "closed_form_failures", "protocol_failures"):
        setattr(m, attr, getattr(a, attr) + getattr(b, attr))
    for side in ("left", "right", "extra"):
        wa, wb = getattr(a, f"witness_{side}"), getattr(b, f"witness_{side}")
        pick = wa
        if wb is not None and _better(wb, wa, side):
            pick = wb
        setattr(m, f"witness_{side}", pick)
    cex = sorted(a.counterexamples + b.counterexamples, key=lambda w: (w.s, w.r_lo, w.r_hi))
    m.counterexamples = cex[:MAX_STORED_COUNTEREXAMPLES]
    return m


def _lane_chunks(cfg: SweepConfig, k: int, keys: np.ndarray) -> Iterable[tuple]:
    n = 1 << k
    if cfg.mode == "exhaustive":
        if cfg.key_scheme == "distinct":
            r_lo, r_hi = target_pairs(n)
            los = 2 * r_lo - 1
            his = np.where(r_lo <= r_hi, 2 * r_hi + 1, 2 * r_lo - 1)
        else:
            los, his = query_candidates(keys)
        per_s = len(los)
        s_block = max(1, CHUNK_LANES // per_s)
        for s0 in range(0, n, s_block):
            ss = np.arange(s0, min(n, s0 + s_block), dtype=np.int64)
            yield (k, keys, np.repeat(ss, per_s), np.tile(los, len(ss)), np.tile(his, len(ss)))
        return
    rng = np.random.default_rng([cfg.seed, k])
    starts = rng.integers(0, n, size=cfg.samples)
    if cfg.key_scheme == "distinct":
        r_lo, r_hi = pair_from_rank(n, rng.integers(0, pair_count(n), size=cfg.samples))
        los = 2 * r_lo - 1
        his = np.where(r_lo <= r_hi, 2 * r_hi + 1, 2 * r_lo - 1)
    else:
        c_lo, c_hi = query_candidates(keys)
        pick = rng.integers(0, len(c_lo), size=cfg.samples)
        los, his = c_lo[pick], c_hi[pick]
    for a in range(0, cfg.samples, CHUNK_LANES):
        b = a + CHUNK_LANES
        yield (k, keys, starts[a:b], los[a:b], his[a:b])


def _run_chunk(args) -> KSummary:
    return _summarize_chunk(*args)


def _map(fn: Callable, items: Iterable, jobs: int) -> list:
    if jobs <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


@dataclass
class LemmaVerdict:
    name: str
    checked: int = 0
    passed: int = 0
    vacuous: int = 0
    failed: int = 0
    counterexamples: list[dict] = field(default_factory=list)

    @property
    def non_vacuous(self) -> int:
        return self.checked - self.vacuous

    def merge(self, other: LemmaVerdict) -> None:
        self.checked += other.checked
        self.passed += other.passed
        self.vacuous += other.vacuous
        self.failed += other.failed
        room = MAX_STORED_COUNTEREXAMPLES - len(self.counterexamples)
        self.counterexamples.extend(other.counterexamples[:max(room, 0)])


@dataclass
class SweepReport:
    config: dict
    bounds: list[KSummary] = field(default_factory=list)
    lemmas: dict[int, dict[str, LemmaVerdict]] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return (all(s.passed for s in self.bounds)
                and all(v.failed == 0 for table in self.lemmas.values() for v in table.values()))

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "passed": self.passed,
            "bounds": [s.to_dict() for s in self.bounds],
            "lemmas": {str(k): {name: {**asdict(v), "non_vacuous": v.non_vacuous}
                                for name, v in table.items()}
                       for k, table in sorted(self.lemmas.items())},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for s in self.bounds:
            w.writerow([s.k, s.runs, s.max_left, s.max_right, s.max_extra,
                        s.bound_left, s.bound_right, s.bound_extra,
                        "pass" if s.passed else "fail"])
        return buf.getvalue()


CSV_COLUMNS = ("k", "runs", "max_left", "max_right", "max_extra",
               "bound_left", "bound_right", "bound_extra", "verdict")


def sweep_bounds(cfg: SweepConfig) -> SweepReport:
    cfg.validate()
    report = SweepReport(cfg.to_dict())
    for k in range(cfg.k_min, cfg.k_max + 1):
        keys = generate_keys(cfg, k)
        parts = _map(_run_chunk, _lane_chunks(cfg, k, keys), cfg.jobs)
        total = parts[0]
        for p in parts[1:]:
            total = merge_summaries(total, p)
        report.bounds.append(total)
    return report


def worst_case(cfg: SweepConfig) -> list[Witness]:
    """Per k, the lexicographically smallest (s, r_lo, r_hi) with maximal extra energy."""
    return [s.witness_extra for s in sweep_bounds(cfg).bounds]


# --- scalar cross-checks ---------------------------------------------------


def closed_form_crosscheck(trace: ReceiverTrace, cycle: BroadcastCycle, q: QueryInterval) -> bool:
    """Recompute lb_t/ub_t from the target bounds alone and compare slot by slot.

    lb_t is the largest ``rev_k(t') + 1 <= r_lo`` over earlier slots ``t'``
    (or 0), regardless of whether the radio was on; ub_t dually.
    """
    n, k, s = cycle.n, cycle.k, trace.s
    if len(trace.lb_history) != n + 1 or len(trace.ub_history) != n + 1:
        return False
    r_lo, r_hi = target_bounds(cycle, q)
    lb, ub = 0, n - 1
    changes_left = changes_right = 0
    for m in range(n + 1):
        if trace.lb_history[m] != lb or trace.ub_history[m] != ub:
            return False
        if m == n:
            break
        idx = rev_k(s + m, k)
        if lb < idx + 1 <= r_lo:
            lb = idx + 1
            changes_left += 1
        if r_hi <= idx - 1 < ub:
            ub = idx - 1
            changes_right += 1
    e = energies(trace)
    return (e.left, e.right) == (changes_left, changes_right)


def protocol_check(trace: ReceiverTrace, cycle: BroadcastCycle, q: QueryInterval) -> bool:
    """Every target index reported in-range exactly once, nothing else, final window exact."""
    r_lo, r_hi = target_bounds(cycle, q)
    reported = sorted(trace.in_range_indices())
    if reported != list(range(r_lo, r_hi + 1)):
        return False
    if trace.done_slot is not None and r_lo <= r_hi:
        return False
    return trace.final_lb == r_lo and trace.final_ub == r_hi


# --- lemma suite -----------------------------------------------------------

LEMMAS = (
    "suffix",
    "left_m_formula", "left_sublevel", "left_first_segment", "left_middle_segment",
    "left_last_segment", "left_total", "left_restart_invariance",
    "right_m_formula", "right_sublevel", "right_first_segment", "right_middle_segment",
    "right_last_segment", "right_steps", "right_bin", "right_patch", "right_total",
    "right_restart_invariance",
    "closed_form", "protocol",
)


class _SlotIndex:
    """Per-start-slot precomputation shared by every query at that start."""

    def __init__(self, dec: Decomposition):
        self.dec = dec
        k = dec.k
        self.sub_images: list[list[list[int]]] = []
        self.seg_images: list[frozenset[int]] = []
        for seg in dec.segments:
            row = [sorted(analysis.segment_image(seg, j)) for j in range(seg.level + 1)]
            self.sub_images.append(row)
            self.seg_images.append(frozenset().union(*map(frozenset, row)))
        self.where = {t: dec.locate(t) for t in range(dec.s, dec.s + dec.n)}
        self.k = k


def _group(changes: dict[int, int], idx: _SlotIndex):
    dec = idx.dec
    by_sub = [[set() for _ in range(seg.level + 1)] for seg in dec.segments]
    for t, x in changes.items():
        i, j = idx.where[t]
        by_sub[i][j].add(x)
    by_seg = [set().union(*row) for row in by_sub]
    return by_sub, by_seg


def _m_formula_left(idx: _SlotIndex, r_lo: int) -> list[list[int]]:
    best = -1
    out = []
    for row in idx.sub_images:
        vals = []
        for xs in row:
            p = bisect.bisect_left(xs, r_lo)
            if p:
                best = max(best, xs[p - 1])
            vals.append(best)
        out.append(vals)
    return out


def _m_formula_right(idx: _SlotIndex, r_hi: int, n: int) -> list[list[int]]:
    best = n
    out = []
    for row in idx.sub_images:
        vals = []
        for xs in row:
            p = bisect.bisect_right(xs, r_hi)
            if p < len(xs):
                best = min(best, xs[p])
            vals.append(best)
        out.append(vals)
    return out


def _append_bits(v: int, bits) -> int:
    for b in bits:
        v = (v << 1) | b
    return v


class _Instance:
    """Everything the lemma predicates look at for one (s, r_lo, r_hi)."""

    def __init__(self, idx: _SlotIndex, trace: ReceiverTrace, r_lo: int, r_hi: int):
        dec = idx.dec
        self.idx, self.dec, self.trace = idx, dec, trace
        self.k, self.n, self.s = dec.k, dec.n, dec.s
        self.r_lo, self.r_hi = r_lo, r_hi
        self.lv = dec.levels
        self.last = dec.last
        self.L = side_quantities(dec, trace, r_lo, LEFT)
        self.R = side_quantities(dec, trace, r_hi, RIGHT)
        self.L_sub, self.L_seg = _group(trace.left_changes, idx)
        self.U_sub, self.U_seg = _group(trace.right_changes, idx)
        self.left_start = trace.t_first_left == self.s
        self.right_start = trace.t_first_right == self.s

    def context(self) -> dict:
        return {
            "k": self.k, "s": self.s, "r_lo": self.r_lo, "r_hi": self.r_hi,
            "t": [seg.t for seg in self.dec.segments], "levels": self.lv,
            "beta": [str(seg.beta) for seg in self.dec.segments],
            "t_first_left": self.trace.t_first_left, "t_first_right": self.trace.t_first_right,
            "trace": format_trace_records(self.trace),
        }


# Each predicate returns None when its premise never holds (vacuous), else the
# list of failing cases (empty list = pass).

def _lemma_suffix(c: _Instance):
    if c.last == 0:
        return None
    bad = []
    for i in range(c.last):
        b, nxt = c.dec[i].beta, c.dec[i + 1].beta
        tail = b[len(b) - len(nxt):]
        if tail.value > nxt.value:
            bad.append({"i": i})
    return bad


def _lemma_left_m(c: _Instance):
    formula = _m_formula_left(c.idx, c.r_lo)
    bad = []
    for i, seg in enumerate(c.dec.segments):
        if c.L.x[i] < -1:
            bad.append({"i": i, "x": c.L.x[i]})
        for j in range(seg.level + 1):
            m, p = c.L.m[i][j], c.L.p[i][j]
            if m != formula[i][j] or m < p or (c.left_start and m < 0):
                bad.append({"i": i, "j": j, "m": m, "formula": formula[i][j], "p": p})
    return bad


def _lemma_right_m(c: _Instance):
    formula = _m_formula_right(c.idx, c.r_hi, c.n)
    bad = []
    for i, seg in enumerate(c.dec.segments):
        if c.R.x[i] < 0:
            bad.append({"i": i, "x": c.R.x[i]})
        for j in range(seg.level + 1):
            m, p = c.R.m[i][j], c.R.p[i][j]
            if m != formula[i][j] or m > p or (c.right_start and m > c.n - 1):
                bad.append({"i": i, "j": j, "m": m, "formula": formula[i][j], "p": p})
    return bad


def _sublevel_check(c: _Instance, sets, q: analysis.SideQuantities):
    bad = []
    for i, seg in enumerate(c.dec.segments):
        for j in range(seg.level + 1):
            got = sets[i][j]
            allowed = {q.p[i][j]} & set(c.idx.sub_images[i][j])
            if not got <= allowed:
                bad.append({"i": i, "j": j, "got": sorted(got), "allowed": sorted(allowed)})
    return bad


def _lemma_left_sublevel(c: _Instance):
    return _sublevel_check(c, c.L_sub, c.L) if c.left_start else None


def _lemma_right_sublevel(c: _Instance):
    return _sublevel_check(c, c.U_sub, c.R) if c.right_start else None


def _lemma_left_first(c: _Instance):
    if not c.left_start:
        return None
    return [] if len(c.L_seg[0]) <= c.lv[0] + 1 else [{"count": len(c.L_seg[0])}]


def _lemma_right_first(c: _Instance):
    if not c.right_start:
        return None
    return [] if len(c.U_seg[0]) == 1 else [{"count": len(c.U_seg[0])}]


def _lemma_left_middle(c: _Instance):
    if not c.left_start or c.last < 2:
        return None
    return [{"i": i, "count": len(c.L_seg[i + 1])} for i in range(c.last - 1)
            if len(c.L_seg[i + 1]) > c.lv[i + 1] - c.lv[i]]


def _lemma_right_middle(c: _Instance):
    if not c.right_start or c.last < 2:
        return None
    return [{"i": i, "count": len(c.U_seg[i + 1])} for i in range(c.last - 1)
            if len(c.U_seg[i + 1]) > max(c.lv[i + 1] - c.lv[i], 2)]


def _last_segment(c: _Instance, sets, premise: bool):
    if not premise or c.last == 0:
        return None
    bound = c.lv[c.last] - c.lv[c.last - 1]
    count = len(sets[c.last])
    return [] if count <= bound else [{"count": count, "bound": bound}]


def _lemma_left_last(c: _Instance):
    return _last_segment(c, c.L_seg, c.left_start)


def _lemma_right_last(c: _Instance):
    return _last_segment(c, c.U_seg, c.right_start)


def _lemma_left_total(c: _Instance):
    count = len(set(c.trace.left_changes.values()))
    return [] if count <= c.k + 1 else [{"count": count}]


def _lemma_right_total(c: _Instance):
    count = len(set(c.trace.right_changes.values()))
    return [] if count <= c.k + 2 else [{"count": count}]


def _lemma_right_steps(c: _Instance):
    if not c.right_start:
        return None
    x, R = c.R.x, c.R
    cases = 0
    failures = []
    for i in range(c.last):
        d = c.lv[i + 1] - c.lv[i]
        threshold = (x[i] << d) | 1
        count = len(c.U_seg[i + 1])
        if x[i + 1] >= threshold and count >= d:
            cases += 1
            if not (count == d and x[i + 1] == threshold and R.m_seg[i + 1] == R.p_seg[i + 1]):
                failures.append({"i": i, "count": count, "x_next": x[i + 1], "expected": threshold})
    return failures if cases else None


def _lemma_right_bin(c: _Instance):
    if not c.right_start:
        return None
    x, R = c.R.x, c.R
    cases = 0
    failures = []
    for i in range(c.last):
        if c.lv[i + 1] == c.lv[i] + 1 and len(c.U_seg[i + 1]) == 2:
            cases += 1
            ok = (c.lv[i] > 0 and x[i] > 0 and x[i + 1] == 2 * (x[i] - 1) + 1
                  and R.m_seg[i + 1] == R.p_seg[i + 1])
            if not ok:
                failures.append({"i": i, "x": x[i], "x_next": x[i + 1]})
    return failures if cases else None


def _lemma_right_patch(c: _Instance):
    if not c.right_start:
        return None
    x, R, lv = c.R.x, c.R, c.lv
    cases = 0
    failures = []
    for i in range(c.last - 1):
        if x[i] < 1 or x[i + 1] != 2 * (x[i] - 1) + 1 or R.m_seg[i + 1] != R.p_seg[i + 1]:
            continue
        # longest run c = 0..D of segments meeting the lower count premise
        D = -1
        while i + 2 + D + 1 <= c.last:
            j = i + 2 + D + 1
            if len(c.U_seg[j]) >= lv[j] - lv[j - 1]:
                D += 1
            else:
                break
        if D < 0:
            continue
        cases += 1
        v = x[i + 1]
        for cc in range(D + 1):
            j = i + 2 + cc
            v = _append_bits(v, analysis.gamma(c.dec, i + 1 + cc))
            diff = lv[j] - lv[j - 1]
            count = len(c.U_seg[j])
            if not (count == diff <= 2 and x[j] == v and R.m_seg[j] == R.p_seg[j]):
                failures.append({"i": i, "c": cc, "count": count, "diff": diff,
                                 "x": x[j], "expected": v})
                break
    return failures if cases else None


_PREDICATES: dict[str, Callable[[_Instance], list | None]] = {
    "suffix": _lemma_suffix,
    "left_m_formula": _lemma_left_m,
    "left_sublevel": _lemma_left_sublevel,
    "left_first_segment": _lemma_left_first,
    "left_middle_segment": _lemma_left_middle,
    "left_last_segment": _lemma_left_last,
    "left_total": _lemma_left_total,
    "right_m_formula": _lemma_right_m,
    "right_sublevel": _lemma_right_sublevel,
    "right_first_segment": _lemma_right_first,
    "right_middle_segment": _lemma_right_middle,
    "right_last_segment": _lemma_right_last,
    "right_steps": _lemma_right_steps,
    "right_bin": _lemma_right_bin,
    "right_patch": _lemma_right_patch,
    "right_total": _lemma_right_total,
}


def _record(table: dict[str, LemmaVerdict], name: str, result, ctx: Callable[[], dict]) -> None:
    v = table[name]
    v.checked += 1
    if result is None:
        v.vacuous += 1
    elif result:
        v.failed += 1
        if len(v.counterexamples) < MAX_STORED_COUNTEREXAMPLES:
            v.counterexamples.append({"cases": result, **ctx()})
    else:
        v.passed += 1


def _lemma_slot_block(args) -> tuple[dict[str, LemmaVerdict], dict]:
    k, s_values = args
    n = 1 << k
    keys = [2 * i for i in range(n)]
    cycle = cycle_new(keys)
    r_los, r_his = target_pairs(n)
    table = {name: LemmaVerdict(name) for name in LEMMAS}
    energy: dict[tuple[int, int, int], tuple[int, int, int | None, int | None]] = {}
    for s in s_values:
        idx = _SlotIndex(decompose(s, k))
        for r_lo, r_hi in zip(r_los.tolist(), r_his.tolist()):
            _, q = query_for_targets(n, r_lo, r_hi)
            trace = run(cycle, q, s)
            inst = _Instance(idx, trace, r_lo, r_hi)
            ctx = inst.context
            _record(table, "closed_form", [] if closed_form_crosscheck(trace, cycle, q) else [{}], ctx)
            _record(table, "protocol", [] if protocol_check(trace, cycle, q) else [{}], ctx)
            for name, pred in _PREDICATES.items():
                _record(table, name, pred(inst), ctx)
            e = energies(trace)
            energy[(s, r_lo, r_hi)] = (e.left, e.right, trace.t_first_left, trace.t_first_right)
    return table, energy


def check_lemma_suite(k: int, cap: int = DEFAULT_LEMMA_CAP, jobs: int = 1) -> dict[str, LemmaVerdict]:
    """Evaluate every lemma predicate on all (s, r_lo, r_hi) for this k.

    Premises that require the first lb (ub) update to happen at the start slot
    are read off the trace.  The restart checks compare each run against the
    run of the same query started at its own first-update slot, which is part
    of the same enumeration, so the premise is exercised for every query.
    """
    if k < 2:
        raise ConfigError("the lemma suite covers k >= 2")
    if k > cap:
        raise ConfigError(f"lemma suite limited to k <= {cap}, got {k}")
    n = 1 << k
    blocks = [(k, list(range(a, min(n, a + max(1, n // max(jobs, 1)))))) for a in
              range(0, n, max(1, n // max(jobs, 1)))]
    results = _map(_lemma_slot_block, blocks, jobs)
    table = {name: LemmaVerdict(name) for name in LEMMAS}
    energy: dict = {}
    for part, en in results:
        for name in LEMMAS:
            table[name].merge(part[name])
        energy.update(en)

    for (s, r_lo, r_hi), (left, right, t1, t2) in sorted(energy.items()):
        for name, t_first, pos in (("left_restart_invariance", t1, 0),
                                   ("right_restart_invariance", t2, 1)):
            if t_first is None:
                _record(table, name, None, dict)
                continue
            restarted = energy[(t_first % n, r_lo, r_hi)]
            mine = (left, right)[pos]
            ok = restarted[pos] == mine and restarted[2 + pos] == t_first % n
            _record(table, name, [] if ok else [{"restart": t_first % n, "count": mine,
                                                   "restart_count": restarted[pos]}],
                    lambda: {"k": k, "s": s, "r_lo": r_lo, "r_hi": r_hi})
    return table


def lemma_report(k_min: int, k_max: int, cap: int = DEFAULT_LEMMA_CAP, jobs: int = 1) -> SweepReport:
    report = SweepReport({"lemma_k_min": k_min, "lemma_k_max": k_max, "cap": cap})
    for k in range(k_min, k_max + 1):
        report.lemmas[k] = check_lemma_suite(k, cap=cap, jobs=jobs)
    return report
