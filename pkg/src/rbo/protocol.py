"""Broadcast schedule and the energy-limited receiver.

The broadcaster sends, in slot ``t``, the key whose sorted index is
``rev_k(t)``.  The receiver keeps an index window ``[lb, ub]`` that is known to
contain every index whose key lies in the query interval, and switches its radio
on only when the index being broadcast falls inside that window.
"""

from __future__ import annotations

import bisect
import enum
import math
from dataclasses import dataclass, field
from typing import Any, NamedTuple, Sequence

from .bitops import rev_k
from .errors import OrderError, ShapeError, UsageError


@dataclass(frozen=True)
class BroadcastCycle:
    keys: tuple
    k: int

    @property
    def n(self) -> int:
        return 1 << self.k

    def key(self, index: int):
        return self.keys[index]


def cycle_new(keys: Sequence) -> BroadcastCycle:
    """Validate an ascending key sequence of length ``2**k`` and wrap it."""
    keys = tuple(keys)
    n = len(keys)
    if n == 0 or n & (n - 1):
        raise ShapeError(f"cycle length must be a power of two, got {n}")
    for i in range(n - 1):
        if keys[i + 1] < keys[i]:
            raise OrderError(f"keys not ascending at index {i}: {keys[i]!r} > {keys[i + 1]!r}")
    return BroadcastCycle(keys, n.bit_length() - 1)


@dataclass(frozen=True)
class QueryInterval:
    lo: Any
    hi: Any

    def __post_init__(self) -> None:
        for v in (self.lo, self.hi):
            if isinstance(v, float) and not math.isfinite(v):
                raise ValueError("query endpoints must be finite")
        if self.hi < self.lo:
            raise ValueError(f"empty query interval [{self.lo!r}, {self.hi!r}]")

    def __contains__(self, key) -> bool:
        return self.lo <= key <= self.hi


def message_at(cycle: BroadcastCycle, t: int) -> tuple[int, Any]:
    """(index, key) broadcast in slot ``t``; the cycle repeats every n slots."""
    index = rev_k(t, cycle.k)
    return index, cycle.keys[index]


def target_bounds(cycle: BroadcastCycle, q: QueryInterval) -> tuple[int, int]:
    """Smallest index with key >= q.lo and largest index with key <= q.hi.

    The first lies in ``[0, n]`` and the second in ``[-1, n-1]``; they differ
    by exactly one when no key falls inside the query.
    """
    r_lo = bisect.bisect_left(cycle.keys, q.lo)
    r_hi = bisect.bisect_right(cycle.keys, q.hi) - 1
    return r_lo, r_hi


class EventKind(str, enum.Enum):
    IN_RANGE = "in-range"
    LB_UPDATE = "lb-update"
    UB_UPDATE = "ub-update"
    EMPTY = "empty-detected"


RECEPTION_KINDS = (EventKind.IN_RANGE, EventKind.LB_UPDATE, EventKind.UB_UPDATE)


class ReceptionEvent(NamedTuple):
    slot: int
    index: int
    key: Any
    kind: EventKind


@dataclass
class ReceiverState:
    lb: int
    ub: int
    done: bool = False

    @classmethod
    def initial(cls, n: int) -> ReceiverState:
        return cls(0, n - 1)


def receiver_step(state: ReceiverState, t: int, cycle: BroadcastCycle,
                  q: QueryInterval) -> ReceptionEvent | None:
    """Advance the receiver through slot ``t``.

    Returns ``None`` when the radio stays off.  Sets ``state.done`` once the
    window becomes empty; the caller decides how to report that.
    """
    if state.done:
        raise UsageError("receiver already finished")
    index = rev_k(t, cycle.k)
    if not state.lb <= index <= state.ub:
        return None
    key = cycle.keys[index]
    if key < q.lo:
        state.lb = index + 1
        kind = EventKind.LB_UPDATE
    elif key > q.hi:
        state.ub = index - 1
        kind = EventKind.UB_UPDATE
    else:
        kind = EventKind.IN_RANGE
    if state.lb > state.ub:
        state.done = True
    return ReceptionEvent(t, index, key, kind)


@dataclass
class ReceiverTrace:
    """Complete record of one receiver run over the slots ``s .. s+n-1``.

    ``lb_history[m]`` is the value of lb just before slot ``s + m``, for
    ``m`` in ``0..n``; likewise ``ub_history``.  ``left_changes`` and
    ``right_changes`` map a slot to the index that moved lb, respectively ub,
    in that slot.
    """

    k: int
    s: int
    lb_history: list[int]
    ub_history: list[int]
    events: list[ReceptionEvent] = field(default_factory=list)
    left_changes: dict[int, int] = field(default_factory=dict)
    right_changes: dict[int, int] = field(default_factory=dict)
    t_first_left: int | None = None
    t_first_right: int | None = None
    done_slot: int | None = None

    @property
    def n(self) -> int:
        return 1 << self.k

    @property
    def end(self) -> int:
        """First slot after the simulated window."""
        return self.s + self.n

    def lb_at(self, t: int) -> int:
        """lb just before slot ``t``; constant outside the simulated window."""
        if t <= self.s:
            return self.lb_history[0]
        return self.lb_history[min(t, self.end) - self.s]

    def ub_at(self, t: int) -> int:
        if t <= self.s:
            return self.ub_history[0]
        return self.ub_history[min(t, self.end) - self.s]

    def left_set(self, t: int) -> set[int]:
        """Index whose reception moved lb in slot ``t`` (empty set if none)."""
        return {self.left_changes[t]} if t in self.left_changes else set()

    def right_set(self, t: int) -> set[int]:
        return {self.right_changes[t]} if t in self.right_changes else set()

    @property
    def final_lb(self) -> int:
        return self.lb_history[-1]

    @property
    def final_ub(self) -> int:
        return self.ub_history[-1]

    def in_range_indices(self) -> list[int]:
        return [e.index for e in self.events if e.kind is EventKind.IN_RANGE]


def run(cycle: BroadcastCycle, q: QueryInterval, s: int) -> ReceiverTrace:
    """Simulate a receiver that wakes up at slot ``s`` for one full cycle."""
    n = cycle.n
    s %= n
    state = ReceiverState.initial(n)
    trace = ReceiverTrace(cycle.k, s, [state.lb], [state.ub])
    for t in range(s, s + n):
        if not state.done:
            event = receiver_step(state, t, cycle, q)
            if event is not None:
                trace.events.append(event)
                if event.kind is EventKind.LB_UPDATE:
                    trace.left_changes[t] = event.index
                    if trace.t_first_left is None:
                        trace.t_first_left = t
                elif event.kind is EventKind.UB_UPDATE:
                    trace.right_changes[t] = event.index
                    if trace.t_first_right is None:
                        trace.t_first_right = t
                if state.done:
                    trace.done_slot = t
                    trace.events.append(event._replace(kind=EventKind.EMPTY))
        trace.lb_history.append(state.lb)
        trace.ub_history.append(state.ub)
    return trace


class Energies(NamedTuple):
    left: int
    right: int
    extra: int
    total: int


def energies(trace: ReceiverTrace) -> Energies:
    """Energy tallies; ``total`` counts every slot with the radio on."""
    left = len(set(trace.left_changes.values()))
    right = len(set(trace.right_changes.values()))
    total = sum(1 for e in trace.events if e.kind in RECEPTION_KINDS)
    return Energies(left, right, left + right, total)


def format_trace_records(trace: ReceiverTrace) -> str:
    """One ``slot,index,key,kind`` line per event."""
    return "".join(f"{e.slot},{e.index},{e.key},{e.kind.value}\n" for e in trace.events)


def parse_trace_records(text: str, key_type=int) -> list[ReceptionEvent]:
    events = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 4:
            raise ValueError(f"line {lineno}: expected 4 fields, got {len(parts)}")
        slot, index, key, kind = parts
        events.append(ReceptionEvent(int(slot), int(index), key_type(key), EventKind(kind.strip())))
    return events
