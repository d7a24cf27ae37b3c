"""Structural statements about the receiver, checked on every instance at k=4."""

from rbo.verifier import check_lemma_suite

suite = check_lemma_suite(4)
width = max(map(len, suite))
for name, v in suite.items():
    print(f"{name:<{width}}  checked {v.checked:6d}  non-vacuous {v.non_vacuous:6d}  failed {v.failed}")
print(all(v.failed == 0 for v in suite.values()))
