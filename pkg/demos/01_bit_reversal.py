"""Bit reversal and the broadcast order it induces."""

import numpy as np

from rbo.bitops import bin_fixed, rev_k, rev_k_reference, rev_table

k = 3
n = 2**k

# slot t carries the message with index rev_k(t)
for t in range(n):
    print(t, bin_fixed(t, k), "->", bin_fixed(rev_k(t, k), k), rev_k(t, k))

# the vectorized table agrees with the string reference
table = rev_table(k)
print(table)
print(all(rev_k_reference(t, k) == table[t] for t in range(n)))

# involution: reversing twice is the identity
print(np.array_equal(table[table], np.arange(n)))

# consecutive slots jump across the index range, halves interleave
print(rev_table(4).reshape(4, 4))
