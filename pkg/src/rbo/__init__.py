"""Simulation and verification toolkit for bit-reversal broadcast scheduling."""

from .bitops import BitString, bin_fixed, concat, repeat, rev_k, reverse, to_value, trailing_zero_run
from .errors import ConfigError, InvalidWidthError, OrderError, RBOError, ShapeError, UsageError
from .protocol import (BroadcastCycle, EventKind, QueryInterval, ReceiverState, ReceiverTrace,
                       ReceptionEvent, cycle_new, energies, message_at, receiver_step, run,
                       target_bounds)
from .analysis import Decomposition, Segment, decompose, side_quantities, sublevel
from .verifier import (SweepConfig, SweepReport, check_lemma_suite, closed_form_crosscheck,
                       query_for_targets, sweep_bounds, worst_case)

__version__ = "0.1.0"
