"""Worst-case extra energy over every start slot and every target range."""

import numpy as np

from rbo.batch import simulate_batch
from rbo.verifier import SweepConfig, sweep_bounds, target_pairs, worst_case

k = 5
n = 2**k

# one lane per (start, r', r''); keys 0,2,4,... with odd query endpoints
r_lo, r_hi = target_pairs(n)
starts = np.repeat(np.arange(n), r_lo.size)
los = np.tile(2 * r_lo - 1, n)
his = np.tile(np.where(r_hi >= r_lo, 2 * r_hi + 1, 2 * r_lo - 1), n)
out = simulate_batch(np.arange(n) * 2, starts, los, his, k)

print(out.extra.shape[0], "runs")
print("max left/right/extra:", out.left.max(), out.right.max(), out.extra.max())
print("bounds:", k + 1, k + 2, 2 * k + 3, "previous:", 4 * k + 2)
print(np.bincount(out.extra))
print(out.protocol_ok.all(), out.closed_form_ok.all())

report = sweep_bounds(SweepConfig(2, 6))
print(report.to_csv())

for w in worst_case(SweepConfig(4, 4)):
    print(w)
