"""Aligned segments of the time axis and the suffix each one fixes."""

from rbo.analysis import decompose, segment_image, sublevel
from rbo.bitops import bin_fixed

k = 4
for s in (0, 5, 11):
    dec = decompose(s, k)
    print(f"s={s}: levels {dec.levels}, ends at slot {dec.end}")
    for seg in dec.segments:
        image = sorted(segment_image(seg))
        print("  ", seg.i, (seg.y_lo, seg.y_hi), "beta", str(seg.beta), "alpha", seg.alpha and str(seg.alpha),
              " ".join(str(bin_fixed(x, k)) for x in image))

# every index broadcast in a segment ends with that segment's beta
dec = decompose(5, k)
seg = dec[1]
print([x % 2**(k - seg.level) == seg.beta_value for x in segment_image(seg)])

# sublevels split a segment into doubling slot ranges
print([sublevel(seg, j) for j in range(seg.level + 1)])
print(dec.locate(7), dec.locate(8))
