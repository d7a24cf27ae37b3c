"""Exit criteria, each reported as one pass/fail line in the terminal summary.

The exhaustive sweep (k = 0..8, every start slot, every realizable pair of
target bounds) and the lemma suite (k = 2..6) are computed once per session.
All tolerances are exact integer comparisons.
"""

import time

import pytest

from conftest import ACCEPTANCE_LINES
from rbo.bitops import rev_k, rev_k_reference
from rbo.verifier import SweepConfig, check_lemma_suite, pair_count, sweep_bounds

SWEEP_K = range(2, 9)
LEMMA_K = range(2, 7)
TIME_BUDGET_S = 600.0


def report_line(number, title, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} -- {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


@pytest.fixture(scope="module")
def sweep():
    t0 = time.perf_counter()
    report = sweep_bounds(SweepConfig(0, 8, mode="exhaustive"))
    elapsed = time.perf_counter() - t0
    return {s.k: s for s in report.bounds}, report, elapsed


@pytest.fixture(scope="module")
def lemmas():
    return {k: check_lemma_suite(k) for k in LEMMA_K}


def test_extra_energy_bound(sweep):
    by_k, _, elapsed = sweep
    runs = {k: by_k[k].runs for k in SWEEP_K}
    expected = {k: 2**k * pair_count(2**k) for k in SWEEP_K}
    violations = sum(by_k[k].extra_violations for k in SWEEP_K)
    ok = violations == 0 and runs == expected and elapsed <= TIME_BUDGET_S
    report_line(1, "extra <= 2k+3, k in [2, 8]", ok,
                f"{sum(runs.values())} runs, {violations} violations, sweep {elapsed:.0f}s")
    assert runs == expected
    assert violations == 0
    assert all(by_k[k].max_extra <= 2 * k + 3 for k in SWEEP_K)
    assert elapsed <= TIME_BUDGET_S


def test_side_bounds(sweep):
    by_k, _, _ = sweep
    left = sum(by_k[k].left_violations for k in SWEEP_K)
    right = sum(by_k[k].right_violations for k in SWEEP_K)
    ok = left == right == 0 and all(
        by_k[k].max_left <= k + 1 and by_k[k].max_right <= k + 2 for k in SWEEP_K)
    report_line(2, "left <= k+1 and right <= k+2, k in [2, 8]", ok,
                f"{left} left / {right} right violations")
    assert ok


def test_small_k_clause(sweep):
    by_k, _, _ = sweep
    worst = {k: by_k[k].max_extra for k in (0, 1)}
    ok = all(by_k[k].small_k_violations == 0 and worst[k] <= 2 for k in (0, 1))
    report_line(3, "left+right <= 2 for k in {0, 1}", ok, f"max extra {worst}")
    assert by_k[0].runs == 1 * pair_count(1) and by_k[1].runs == 2 * pair_count(2)
    assert ok


def test_lemma_suite(lemmas):
    failures = {(k, name): v.failed for k, t in lemmas.items() for name, v in t.items() if v.failed}
    never = {(k, name) for k, t in lemmas.items() if k >= 4 for name, v in t.items()
             if v.non_vacuous == 0}
    ok = not failures and not never
    exercised = min(v.non_vacuous for k, t in lemmas.items() if k >= 4 for v in t.values())
    report_line(4, "lemma suite k in [2, 6]", ok,
                f"{len(failures)} failing (k, lemma) cells, {len(never)} always vacuous at k>=4, "
                f"min non-vacuous count at k>=4 = {exercised}")
    assert not failures, {key: lemmas[key[0]][key[1]].counterexamples[:1] for key in failures}
    assert not never


def test_closed_form_equivalence(sweep, lemmas):
    by_k, _, _ = sweep
    batch = sum(s.closed_form_failures for s in by_k.values())
    scalar = sum(t["closed_form"].failed for t in lemmas.values())
    scalar_runs = sum(t["closed_form"].checked for t in lemmas.values())
    ok = batch == 0 and scalar == 0
    report_line(5, "lb_t/ub_t equal the closed form slot by slot", ok,
                f"{batch} lockstep + {scalar} scalar mismatches over "
                f"{sum(s.runs for s in by_k.values())} + {scalar_runs} runs")
    assert ok


def test_protocol_correctness(sweep, lemmas):
    by_k, _, _ = sweep
    batch = sum(s.protocol_failures for s in by_k.values())
    scalar = sum(t["protocol"].failed for t in lemmas.values())
    ok = batch == 0 and scalar == 0
    report_line(6, "targets reported exactly once, final window exact", ok,
                f"{batch} lockstep + {scalar} scalar failures")
    assert ok


def test_bit_level_properties():
    bad = []
    for k in range(0, 17):
        n = 2**k
        image = [rev_k(x, k) for x in range(n)]
        if sorted(image) != list(range(n)):
            bad.append((k, "bijection"))
        if any(rev_k(y, k) != x for x, y in enumerate(image)):
            bad.append((k, "involution"))
        if any(rev_k_reference(x, k) != y for x, y in enumerate(image)):
            bad.append((k, "reference"))
    report_line(7, "rev_k involution, bijection, reference == fast path for k <= 16", not bad,
                f"{len(bad)} failures")
    assert not bad


def test_improvement_margin(sweep):
    by_k, report, _ = sweep
    rows = report.to_dict()["bounds"]
    ok = all(by_k[k].max_extra <= 2 * k + 3 < 4 * k + 2 for k in SWEEP_K)
    emitted = all({"max_extra", "bound_extra", "old_bound"} <= set(r) for r in rows)
    summary = ", ".join(f"k={k}: {by_k[k].max_extra}/{2 * k + 3}/{4 * k + 2}" for k in SWEEP_K)
    report_line(8, "observed <= 2k+3 < 4k+2 (observed/new/old)", ok and emitted, summary)
    assert emitted
    assert ok
