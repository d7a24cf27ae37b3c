"""Binary strings and bit-reversal arithmetic.

Bit strings are written most significant bit first, so ``BitString.parse("0101")``
has value 5.  Concatenation puts the left operand in the high bits.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InvalidWidthError

MAX_WIDTH = 64
MAX_REV_WIDTH = 63


def _check_width(width: int, cap: int = MAX_WIDTH) -> None:
    if width < 0 or width > cap:
        raise InvalidWidthError(f"width {width} outside [0, {cap}]")


@dataclass(frozen=True)
class BitString:
    """Immutable MSB-first sequence of binary digits (at most 64 of them)."""

    bits: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        bits = tuple(int(b) for b in self.bits)
        if any(b not in (0, 1) for b in bits):
            raise ValueError(f"not a binary sequence: {self.bits!r}")
        _check_width(len(bits))
        object.__setattr__(self, "bits", bits)

    @classmethod
    def parse(cls, text: str) -> BitString:
        """Build from a digit string; parentheses are ignored, so "(0101)" works."""
        return cls(tuple(int(c) for c in text.strip("()")))

    def __len__(self) -> int:
        return len(self.bits)

    def __iter__(self):
        return iter(self.bits)

    def __getitem__(self, item):
        if isinstance(item, slice):
            return BitString(self.bits[item])
        return self.bits[item]

    def __add__(self, other: BitString) -> BitString:
        return concat(self, other)

    def __mul__(self, d: int) -> BitString:
        return repeat(self, d)

    @property
    def value(self) -> int:
        return to_value(self)

    def __str__(self) -> str:
        return "(" + "".join(map(str, self.bits)) + ")"


EMPTY = BitString()
ZERO = BitString((0,))
ONE = BitString((1,))


def bin_fixed(x: int, width: int) -> BitString:
    """The ``width``-digit binary representation of ``x mod 2**width``."""
    _check_width(width)
    if x < 0:
        raise ValueError("bin_fixed is defined for x >= 0")
    x %= 1 << width
    return BitString(tuple((x >> (width - 1 - p)) & 1 for p in range(width)))


def bin_natural(x: int) -> BitString:
    """Shortest binary representation of ``x``; empty for ``x == 0``."""
    return bin_fixed(x, x.bit_length())


def to_value(alpha: BitString) -> int:
    v = 0
    for b in alpha.bits:
        v = (v << 1) | b
    return v


def reverse(alpha: BitString) -> BitString:
    return BitString(alpha.bits[::-1])


def concat(alpha: BitString, beta: BitString) -> BitString:
    _check_width(len(alpha) + len(beta))
    return BitString(alpha.bits + beta.bits)


def repeat(alpha: BitString, d: int) -> BitString:
    if d < 0:
        raise ValueError("repeat count must be non-negative")
    _check_width(len(alpha) * d)
    return BitString(alpha.bits * d)


def zeros(d: int) -> BitString:
    return repeat(ZERO, d)


def ones(d: int) -> BitString:
    return repeat(ONE, d)


def rev_k_reference(x: int, k: int) -> int:
    """Bit reversal by literally reversing the k-digit string (slow, obviously right)."""
    _check_width(k, MAX_REV_WIDTH)
    return to_value(reverse(bin_fixed(x % (1 << k), k)))


def rev_k(x: int, k: int) -> int:
    """Reverse the low ``k`` bits of ``x``; negative ``x`` is reduced mod 2**k first."""
    _check_width(k, MAX_REV_WIDTH)
    x %= 1 << k
    r = 0
    for _ in range(k):
        r = (r << 1) | (x & 1)
        x >>= 1
    return r


@lru_cache(maxsize=32)
def _rev_table(k: int) -> np.ndarray:
    n = 1 << k
    table = np.zeros(n, dtype=np.int64)
    t = np.arange(n, dtype=np.int64)
    for p in range(k):
        table |= ((t >> p) & 1) << (k - 1 - p)
    table.setflags(write=False)
    return table


def rev_table(k: int) -> np.ndarray:
    """Read-only array ``table[t] == rev_k(t, k)`` for ``t`` in ``[0, 2**k)``."""
    if k < 0 or k > 24:
        raise InvalidWidthError(f"rev_table supports 0 <= k <= 24, got {k}")
    return _rev_table(k)


def trailing_zero_run(t: int, k: int) -> int:
    """Largest ``l <= k`` with ``t mod 2**l == 0``."""
    _check_width(k, MAX_REV_WIDTH)
    if t < 0:
        raise ValueError("t must be non-negative")
    if t == 0:
        return k
    return min(k, (t & -t).bit_length() - 1)
