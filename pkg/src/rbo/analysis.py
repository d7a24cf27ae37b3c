"""Segment decomposition of the receiver's time axis and derived quantities.

Starting from slot ``s`` the slots are cut into aligned blocks
``Y_i = [t_i, t_i + 2**l_i - 1]`` where ``l_i`` is the trailing-zero run of
``t_i`` (capped at k).  The indices broadcast during a block share a common
low-order suffix ``beta_i`` of ``k - l_i`` bits; each block splits further into
sublevels ``Y_{i,j}``.  The left-side quantities track the largest index below
the lower target bound, the right-side ones the smallest index above the upper
target bound.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from functools import lru_cache

from .bitops import BitString, bin_fixed, concat, ones, rev_k, trailing_zero_run, zeros, ZERO
from .errors import UsageError
from .protocol import ReceiverTrace

LEFT = "left"
RIGHT = "right"


@dataclass(frozen=True)
class Segment:
    i: int
    t: int
    level: int
    k: int
    beta: BitString
    alpha: BitString | None

    @property
    def y_lo(self) -> int:
        return self.t

    @property
    def y_hi(self) -> int:
        return self.t + (1 << self.level) - 1

    @property
    def beta_value(self) -> int:
        return self.beta.value

    def sublevel(self, j: int) -> tuple[int, int]:
        return sublevel(self, j)


def sublevel(seg: Segment, j: int) -> tuple[int, int]:
    """Inclusive slot range of sublevel ``j``: ``{t}`` for j=0, else ``[t+2**(j-1), t+2**j-1]``."""
    if not 0 <= j <= seg.level:
        raise UsageError(f"sublevel {j} outside [0, {seg.level}]")
    if j == 0:
        return seg.t, seg.t
    return seg.t + (1 << (j - 1)), seg.t + (1 << j) - 1


@dataclass(frozen=True)
class Decomposition:
    k: int
    s: int
    segments: tuple[Segment, ...]

    @property
    def last(self) -> int:
        return len(self.segments) - 1

    @property
    def n(self) -> int:
        return 1 << self.k

    @property
    def levels(self) -> list[int]:
        return [seg.level for seg in self.segments]

    @property
    def end(self) -> int:
        """Last slot covered by the final segment."""
        return self.segments[-1].y_hi

    def locate(self, t: int) -> tuple[int, int]:
        """(segment, sublevel) containing slot ``t``."""
        if not self.s <= t <= self.end:
            raise UsageError(f"slot {t} outside [{self.s}, {self.end}]")
        starts = [seg.t for seg in self.segments]
        i = bisect.bisect_right(starts, t) - 1
        offset = t - self.segments[i].t
        return i, offset.bit_length()

    def __getitem__(self, i: int) -> Segment:
        return self.segments[i]

    def __len__(self) -> int:
        return len(self.segments)


@lru_cache(maxsize=4096)
def decompose(s: int, k: int) -> Decomposition:
    n = 1 << k
    if not 0 <= s < n:
        raise UsageError(f"start slot {s} outside [0, {n - 1}]")
    ts, ls = [s], [trailing_zero_run(s, k)]
    while ls[-1] != k:
        ts.append(ts[-1] + (1 << ls[-1]))
        ls.append(trailing_zero_run(ts[-1], k))
    last = len(ts) - 1
    segments = []
    for i, (t, level) in enumerate(zip(ts, ls)):
        beta = bin_fixed(rev_k(t, k), k - level)
        alpha = None
        if i <= last - 2:
            alpha = beta[ls[i + 1] - level + 1:]
        segments.append(Segment(i, t, level, k, beta, alpha))
    return Decomposition(k, s, tuple(segments))


def x_image(k: int, lo: int, hi: int) -> frozenset[int]:
    """Indices broadcast during the slots ``lo..hi``."""
    return frozenset(rev_k(t, k) for t in range(lo, hi + 1))


def segment_image(seg: Segment, j: int | None = None) -> frozenset[int]:
    lo, hi = (seg.y_lo, seg.y_hi) if j is None else sublevel(seg, j)
    return x_image(seg.k, lo, hi)


def extension_modulus(seg: Segment, j: int | None = None) -> int:
    return 1 << (seg.k - (seg.level if j is None else j))


def in_extension(x: int, seg: Segment, j: int | None = None) -> bool:
    """Congruence membership: ``x mod 2**(k - level) == beta`` (level = j if given)."""
    return x % extension_modulus(seg, j) == seg.beta_value


def p_left(seg: Segment, r_lo: int, j: int | None = None) -> int:
    """Largest member of the congruence class below ``r_lo``; may be negative."""
    m = extension_modulus(seg, j)
    return r_lo - 1 - ((r_lo - 1 - seg.beta_value) % m)


def p_right(seg: Segment, r_hi: int, j: int | None = None) -> int:
    """Smallest member of the congruence class above ``r_hi``; may exceed n-1."""
    m = extension_modulus(seg, j)
    return r_hi + 1 + ((seg.beta_value - r_hi - 1) % m)


def gamma(dec: Decomposition, j: int) -> BitString:
    """``(0)`` followed by ``l_{j+1} - l_j - 1`` ones."""
    if not 0 <= j <= dec.last - 1:
        raise UsageError(f"gamma index {j} outside [0, {dec.last - 1}]")
    return concat(ZERO, ones(dec[j + 1].level - dec[j].level - 1))


@dataclass
class SideQuantities:
    """p/m/x values for one side of one run.

    ``p[i][j]`` and ``m[i][j]`` are per sublevel; ``p_seg``, ``m_seg`` and
    ``x`` are per segment (``m_seg[i] == m[i][l_i]``).
    """

    side: str
    r_bound: int
    p: list[list[int]]
    m: list[list[int]]
    p_seg: list[int]
    m_seg: list[int]
    x: list[int]
    t_first: int | None


def side_quantities(dec: Decomposition, trace: ReceiverTrace, r_bound: int,
                    side: str) -> SideQuantities:
    if trace.s != dec.s or trace.k != dec.k:
        raise UsageError("trace and decomposition describe different runs")
    if side == LEFT:
        p_fn, t_first = p_left, trace.t_first_left

        def m_fn(hi):
            return trace.lb_at(hi + 1) - 1
    elif side == RIGHT:
        p_fn, t_first = p_right, trace.t_first_right

        def m_fn(hi):
            return trace.ub_at(hi + 1) + 1
    else:
        raise UsageError(f"unknown side {side!r}")

    p, m, p_seg, m_seg, xs = [], [], [], [], []
    for seg in dec.segments:
        p.append([p_fn(seg, r_bound, j) for j in range(seg.level + 1)])
        m.append([m_fn(sublevel(seg, j)[1]) for j in range(seg.level + 1)])
        p_seg.append(p_fn(seg, r_bound))
        m_seg.append(m[-1][-1])
        xs.append(p_seg[-1] // extension_modulus(seg))
    return SideQuantities(side, r_bound, p, m, p_seg, m_seg, xs, t_first)


def max_x_value(seg: Segment) -> int:
    """Largest index broadcast in the segment: the free high bits all set."""
    return concat(ones(seg.level), seg.beta).value


def min_x_value(seg: Segment) -> int:
    return concat(zeros(seg.level), seg.beta).value
