import csv
import io
import json

import numpy as np
import pytest

from rbo import verifier
from rbo.analysis import decompose
from rbo.batch import simulate_batch
from rbo.errors import ConfigError, UsageError
from rbo.protocol import QueryInterval, cycle_new, energies, run, target_bounds
from rbo.verifier import (KSummary, SweepConfig, Witness, check_lemma_suite, closed_form_crosscheck,
                          merge_summaries, pair_count, pair_from_rank, protocol_check,
                          query_candidates, query_for_targets, sweep_bounds, target_pairs,
                          worst_case)

from test_protocol import scan_bounds


@pytest.mark.parametrize("n,r_lo,r_hi,query", [(4, 2, 2, (3, 5)), (4, 0, 3, (-1, 7)), (4, 2, 1, (3, 3)),
                                              (4, 0, -1, (-1, -1)), (4, 4, 3, (7, 7))])
def test_query_for_targets(n, r_lo, r_hi, query):
    keys, q = query_for_targets(n, r_lo, r_hi)
    assert keys == [0, 2, 4, 6][:n]
    assert (q.lo, q.hi) == query
    assert scan_bounds(keys, q.lo, q.hi) == (r_lo, r_hi)


def test_query_for_targets_exhaustive_and_errors():
    for n in (1, 2, 8, 16):
        for r_lo, r_hi in zip(*target_pairs(n)):
            keys, q = query_for_targets(n, int(r_lo), int(r_hi))
            assert target_bounds(cycle_new(keys), q) == (r_lo, r_hi)
    with pytest.raises(UsageError):
        query_for_targets(4, 3, 1)
    with pytest.raises(UsageError):
        query_for_targets(4, 0, 4)


def test_target_pairs_enumeration():
    for n in (1, 2, 4, 8, 32):
        r_lo, r_hi = target_pairs(n)
        brute = [(a, b) for a in range(n + 1) for b in range(-1, n) if a <= b + 1]
        assert list(zip(r_lo.tolist(), r_hi.tolist())) == brute
        assert len(brute) == pair_count(n)
        got = pair_from_rank(n, np.arange(pair_count(n)))
        assert list(zip(got[0].tolist(), got[1].tolist())) == brute


def test_query_candidates_cover_every_realizable_pair():
    keys = np.array([0, 0, 2, 2, 2, 6, 8, 8])
    los, his = query_candidates(keys)
    c = cycle_new(keys.tolist())
    got = [target_bounds(c, QueryInterval(int(a), int(b))) for a, b in zip(los, his)]
    brute = {scan_bounds(keys.tolist(), a / 2, b / 2) for a in range(-4, 20) for b in range(a, 20)}
    assert sorted(set(got)) == sorted(brute) == got


@pytest.mark.parametrize("k", [0, 1, 2, 3, 4])
def test_batch_matches_scalar(k):
    n = 2**k
    rng = np.random.default_rng(k)
    for keys in (list(range(0, 2 * n, 2)), sorted(rng.integers(0, 4, size=n).tolist())):
        c = cycle_new(keys)
        pts = sorted({v + d for v in keys for d in (-1, 0, 1)})
        queries = [(a, b) for a in pts for b in pts if a <= b]
        starts = [s for s in range(n) for _ in queries]
        los = [a for _ in range(n) for a, _ in queries]
        his = [b for _ in range(n) for _, b in queries]
        out = simulate_batch(keys, starts, los, his, k)
        assert out.closed_form_ok.all() and out.protocol_ok.all()
        for lane, (s, lo, hi) in enumerate(zip(starts, los, his)):
            q = QueryInterval(lo, hi)
            tr = run(c, q, s)
            e = energies(tr)
            assert (out.left[lane], out.right[lane], out.total[lane]) == (e.left, e.right, e.total)
            assert (out.final_lb[lane], out.final_ub[lane]) == (tr.final_lb, tr.final_ub)
            assert out.done[lane] == (tr.done_slot is not None)
            assert (out.r_lo[lane], out.r_hi[lane]) == target_bounds(c, q)


def test_batch_flags_unsorted_cycle():
    # the receiver's pruning is only sound on sorted keys; shuffled keys must trip the checks
    keys = np.array([8, 0, 14, 6, 2, 12, 4, 10])
    starts = np.repeat(np.arange(8), 3)
    los = np.tile([3, 5, 7], 8)
    his = np.tile([5, 9, 11], 8)
    out = simulate_batch(keys, starts, los, his, 3)
    assert not out.protocol_ok.all()


def test_sweep_small_k():
    rep = sweep_bounds(SweepConfig(0, 1))
    for s in rep.bounds:
        assert s.small_k_violations == 0 and s.max_extra <= 2 and s.passed
    assert rep.bounds[0].runs == 1 * pair_count(1)
    assert rep.bounds[1].runs == 2 * pair_count(2)


def test_sweep_k2():
    rep = sweep_bounds(SweepConfig(2, 2))
    (s,) = rep.bounds
    assert s.runs == 4 * pair_count(4)
    assert s.passed and s.max_extra <= 7
    assert s.extra_violations == s.left_violations == s.right_violations == 0
    assert s.closed_form_failures == s.protocol_failures == 0


def test_hand_instance_contributes():
    keys, q = query_for_targets(4, 2, 2)
    out = simulate_batch(keys, [1], [q.lo], [q.hi], 2)
    assert (out.left[0], out.right[0], out.extra[0]) == (1, 1, 2)


def test_worst_case_witnesses():
    (w0,) = worst_case(SweepConfig(0, 0))
    assert w0.extra <= 2
    (w2,) = worst_case(SweepConfig(2, 2))
    assert 0 <= w2.extra <= 7
    # lexicographically smallest witness: nothing earlier reaches the same value
    c = None
    for s in range(4):
        for r_lo, r_hi in zip(*target_pairs(4)):
            keys, q = query_for_targets(4, int(r_lo), int(r_hi))
            c = c or cycle_new(keys)
            e = energies(run(c, q, s))
            assert e.extra <= w2.extra
            if (s, r_lo, r_hi) < (w2.s, w2.r_lo, w2.r_hi):
                assert e.extra < w2.extra
    keys, q = query_for_targets(4, w2.r_lo, w2.r_hi)
    assert energies(run(c, q, w2.s)).extra == w2.extra


def test_random_mode_deterministic():
    cfg = SweepConfig(10, 10, mode="random", samples=2000, seed=7)
    a, b = sweep_bounds(cfg), sweep_bounds(cfg)
    assert a.to_json() == b.to_json()
    assert a.bounds[0].runs == 2000 and a.passed
    other = sweep_bounds(SweepConfig(10, 10, mode="random", samples=2000, seed=8))
    assert other.to_json() != a.to_json()


def test_exhaustive_report_deterministic():
    cfg = SweepConfig(2, 4)
    assert sweep_bounds(cfg).to_json() == sweep_bounds(cfg).to_json()
    assert sweep_bounds(cfg).to_csv() == sweep_bounds(cfg).to_csv()


def test_jobs_do_not_change_output(monkeypatch):
    monkeypatch.setattr(verifier, "CHUNK_LANES", 1000)
    one = sweep_bounds(SweepConfig(4, 5))
    many = sweep_bounds(SweepConfig(4, 5, jobs=2))
    assert one.to_dict()["bounds"] == many.to_dict()["bounds"]


def test_chunking_does_not_change_output(monkeypatch):
    whole = sweep_bounds(SweepConfig(3, 5)).to_dict()["bounds"]
    monkeypatch.setattr(verifier, "CHUNK_LANES", 50)
    assert sweep_bounds(SweepConfig(3, 5)).to_dict()["bounds"] == whole


def test_merge_is_commutative_and_associative():
    def part(seed):
        rng = np.random.default_rng(seed)
        s = KSummary(3, runs=int(rng.integers(1, 100)))
        s.max_left, s.max_right = int(rng.integers(0, 4)), int(rng.integers(0, 4))
        s.max_extra = s.max_left + s.max_right
        s.left_violations = int(rng.integers(0, 2))
        for side in ("left", "right", "extra"):
            setattr(s, f"witness_{side}", Witness(3, int(rng.integers(0, 8)), 1, 2,
                                                   s.max_left, s.max_right, s.max_extra))
        return s

    a, b, c = part(1), part(2), part(3)
    ab_c = merge_summaries(merge_summaries(a, b), c).to_dict()
    a_bc = merge_summaries(a, merge_summaries(b, c)).to_dict()
    assert ab_c == a_bc
    assert merge_summaries(a, b).to_dict() == merge_summaries(b, a).to_dict()
    with pytest.raises(UsageError):
        merge_summaries(a, KSummary(4))


def test_config_errors(monkeypatch):
    with pytest.raises(ConfigError):
        sweep_bounds(SweepConfig(2, 9))
    with pytest.raises(ConfigError):
        SweepConfig(3, 2).validate()
    with pytest.raises(ConfigError):
        SweepConfig(2, 2, mode="bogus").validate()
    with pytest.raises(ConfigError):
        SweepConfig(2, 17, mode="random").validate()
    with pytest.raises(ConfigError):
        SweepConfig(2, 2, key_scheme="file").validate()
    with pytest.raises(ConfigError):
        SweepConfig(3, 3, key_scheme="file", keys=(1, 2, 3, 4)).validate()
    monkeypatch.setenv(verifier.CAP_ENV_VAR, "9")
    SweepConfig(2, 9).validate()
    monkeypatch.setenv(verifier.CAP_ENV_VAR, "x")
    with pytest.raises(ConfigError):
        SweepConfig(2, 2).validate()


def test_duplicate_and_file_schemes():
    rep = sweep_bounds(SweepConfig(2, 5, key_scheme="duplicates", seed=3))
    assert rep.passed and all(s.runs > 0 for s in rep.bounds)
    rep = sweep_bounds(SweepConfig(3, 3, key_scheme="file", keys=(1, 1, 1, 4, 4, 9, 9, 9)))
    assert rep.passed
    rep = sweep_bounds(SweepConfig(6, 6, mode="random", key_scheme="duplicates", samples=500))
    assert rep.passed


def test_csv_schema():
    text = sweep_bounds(SweepConfig(2, 3)).to_csv()
    rows = list(csv.DictReader(io.StringIO(text)))
    assert tuple(rows[0]) == verifier.CSV_COLUMNS
    assert [r["k"] for r in rows] == ["2", "3"]
    assert rows[1]["bound_extra"] == "9" and rows[1]["verdict"] == "pass"


def test_json_has_both_bounds():
    d = json.loads(sweep_bounds(SweepConfig(2, 3)).to_json())
    b = d["bounds"][1]
    assert (b["bound_extra"], b["old_bound"]) == (9, 14)
    assert b["old_bound_margin"] == 14 - b["max_extra"]
    assert d["passed"] is True


def test_closed_form_crosscheck():
    c, q = cycle_new([10, 20, 30, 40]), QueryInterval(25, 35)
    tr = run(c, q, 1)
    assert closed_form_crosscheck(tr, c, q)
    full = QueryInterval(0, 100)
    tr_full = run(c, full, 2)
    assert closed_form_crosscheck(tr_full, c, full)
    assert set(tr_full.lb_history) == {0} and set(tr_full.ub_history) == {3}
    tr.lb_history[2] = 1
    assert not closed_form_crosscheck(tr, c, q)
    tr = run(c, q, 1)
    tr.left_changes[4] = 0
    assert not closed_form_crosscheck(tr, c, q)
    tr = run(c, q, 1)
    tr.lb_history.pop()
    assert not closed_form_crosscheck(tr, c, q)


def test_protocol_check_negative_control():
    c, q = cycle_new([10, 20, 30, 40]), QueryInterval(25, 35)
    tr = run(c, q, 1)
    assert protocol_check(tr, c, q)
    tr.events = tr.events[1:]
    assert not protocol_check(tr, c, q)


@pytest.mark.parametrize("k", [2, 3, 4])
def test_lemma_suite_small(k):
    table = check_lemma_suite(k)
    n = 2**k
    for name, v in table.items():
        assert v.failed == 0, (name, v.counterexamples[:1])
        assert v.checked == n * pair_count(n)
        assert v.passed + v.vacuous == v.checked
    if k == 4:
        assert all(v.non_vacuous > 0 for v in table.values())


def test_lemma_suite_limits():
    with pytest.raises(ConfigError):
        check_lemma_suite(1)
    with pytest.raises(ConfigError):
        check_lemma_suite(7)


def test_lemma_r_lo_zero_is_quiet_on_the_left():
    table = {name: verifier.LemmaVerdict(name) for name in verifier.LEMMAS}
    k, n = 4, 16
    keys, _ = query_for_targets(n, 0, 0)
    c = cycle_new(keys)
    for s in range(n):
        idx = verifier._SlotIndex(decompose(s, k))
        for r_hi in range(-1, n):
            _, q = query_for_targets(n, 0, r_hi)
            inst = verifier._Instance(idx, run(c, q, s), 0, r_hi)
            assert not inst.trace.left_changes
            for name in ("left_sublevel", "left_first_segment", "left_middle_segment",
                         "left_last_segment"):
                assert verifier._PREDICATES[name](inst) is None
            assert verifier._PREDICATES["left_total"](inst) == []


def test_lemma_predicate_catches_tampered_trace():
    k, n = 4, 16
    keys, q = query_for_targets(n, 9, 12)
    c = cycle_new(keys)
    s = next(s for s in range(n) if run(c, q, s).t_first_right == s)
    tr = run(c, q, s)
    idx = verifier._SlotIndex(decompose(s, k))
    # pretend ub also moved at a slot where it did not
    spare = next(t for t in range(s, s + n) if t not in tr.right_changes)
    tr.right_changes[spare] = 15
    inst = verifier._Instance(idx, tr, 9, 12)
    assert verifier._PREDICATES["right_sublevel"](inst)
    table = {"right_sublevel": verifier.LemmaVerdict("right_sublevel")}
    verifier._record(table, "right_sublevel", verifier._PREDICATES["right_sublevel"](inst),
                     inst.context)
    v = table["right_sublevel"]
    assert v.failed == 1 and v.counterexamples[0]["s"] == s and "trace" in v.counterexamples[0]
