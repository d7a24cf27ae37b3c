"""Lockstep simulation of many receivers over the same broadcast cycle.

Each lane is one receiver with its own start slot and query.  The update rule
is the same as :func:`rbo.protocol.receiver_step`; on top of it every lane
keeps the closed-form lb/ub (the running max/min over all indices broadcast so
far, radio or not) and the protocol-correctness bookkeeping, so one pass
yields energies and all per-run checks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bitops import rev_table


@dataclass
class BatchOutcome:
    starts: np.ndarray
    r_lo: np.ndarray
    r_hi: np.ndarray
    left: np.ndarray
    right: np.ndarray
    total: np.ndarray
    in_range: np.ndarray
    final_lb: np.ndarray
    final_ub: np.ndarray
    done: np.ndarray
    # every lb_t/ub_t matched the closed form, and so did the change counts
    closed_form_ok: np.ndarray
    # some index outside [r_lo, r_hi] was classified in-range
    stray_in_range: np.ndarray

    @property
    def extra(self) -> np.ndarray:
        return self.left + self.right

    @property
    def protocol_ok(self) -> np.ndarray:
        """In-range reported exactly once per target index, final window exact."""
        expected = np.maximum(self.r_hi - self.r_lo + 1, 0)
        return (
            ~self.stray_in_range
            & (self.in_range == expected)
            & (self.final_lb == self.r_lo)
            & (self.final_ub == self.r_hi)
            & (~self.done | (self.r_lo > self.r_hi))
        )


def simulate_batch(keys, starts, los, his, k: int) -> BatchOutcome:
    """Run ``len(starts)`` receivers for ``2**k`` slots each.

    ``keys`` is the ascending key array of the cycle; ``los``/``his`` are the
    per-lane query endpoints, compared against keys exactly like the scalar
    receiver does.
    """
    n = 1 << k
    keys = np.asarray(keys)
    if keys.shape != (n,):
        raise ValueError(f"expected {n} keys, got shape {keys.shape}")
    starts = np.asarray(starts, dtype=np.int64) % n
    los = np.asarray(los)
    his = np.asarray(his)
    lanes = starts.shape[0]
    rev = rev_table(k)

    r_lo = np.searchsorted(keys, los, side="left").astype(np.int64)
    r_hi = np.searchsorted(keys, his, side="right").astype(np.int64) - 1

    lb = np.zeros(lanes, dtype=np.int64)
    ub = np.full(lanes, n - 1, dtype=np.int64)
    done = np.zeros(lanes, dtype=bool)
    left = np.zeros(lanes, dtype=np.int64)
    right = np.zeros(lanes, dtype=np.int64)
    in_range = np.zeros(lanes, dtype=np.int64)
    stray = np.zeros(lanes, dtype=bool)

    cf_lb = np.zeros(lanes, dtype=np.int64)
    cf_ub = np.full(lanes, n - 1, dtype=np.int64)
    cf_left = np.zeros(lanes, dtype=np.int64)
    cf_right = np.zeros(lanes, dtype=np.int64)
    cf_ok = np.ones(lanes, dtype=bool)

    for step in range(n):
        idx = rev[(starts + step) & (n - 1)]
        on = ~done & (lb <= idx) & (idx <= ub)
        key = keys[idx]
        below = on & (key < los)
        above = on & (key > his)
        inside = on & ~below & ~above

        np.copyto(lb, idx + 1, where=below)
        np.copyto(ub, idx - 1, where=above)
        left += below
        right += above
        in_range += inside
        stray |= inside & ((idx < r_lo) | (idx > r_hi))
        done |= lb > ub

        cand = np.where(idx + 1 <= r_lo, idx + 1, 0)
        grow = cand > cf_lb
        np.copyto(cf_lb, cand, where=grow)
        cf_left += grow
        cand = np.where(idx - 1 >= r_hi, idx - 1, n - 1)
        shrink = cand < cf_ub
        np.copyto(cf_ub, cand, where=shrink)
        cf_right += shrink
        cf_ok &= (cf_lb == lb) & (cf_ub == ub)

    cf_ok &= (cf_left == left) & (cf_right == right)
    total = left + right + in_range
    return BatchOutcome(starts, r_lo, r_hi, left, right, total, in_range,
                        lb, ub, done, cf_ok, stray)
