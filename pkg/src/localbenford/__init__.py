"""Local Benford behaviour of arithmetic sequences.

Fixed-point fractional parts of ``log_b a_n``, leading-digit tuple
statistics, Weyl sums and difference-class estimates.
"""

from . import kernels
from .benford_stats import (
    DigitTupleCounter,
    OrderReport,
    algebraic_witness,
    benford_prob,
    count_tuples,
    deviation_report,
    estimate_max_order,
    killer_vector,
    leading_digit,
    leading_digits,
    merge,
    star_discrepancy_1d,
    weyl_average,
)
from .differencing import ClassEstimate, classify, expr_evaluator, forward_difference, sequence_evaluator
from .errors import (
    AmbiguousDigit,
    CancellationOverflow,
    DepthExceeded,
    ExceedsMaximum,
    InsufficientN,
    InvalidInput,
    LocalBenfordError,
    NotSeekable,
    PrecisionBudgetExceeded,
    SpecParseError,
)
from .fixed_frac import FixedReal, FracValue, add_mod1, log_const, scale_mod1
from .generators import frac_array, frac_at, frac_stream, make_state, parse, real_evaluator, render, seek_seed

__version__ = "0.1.0"

__all__ = [
    "kernels",
    "DigitTupleCounter", "OrderReport", "algebraic_witness", "benford_prob", "count_tuples",
    "deviation_report", "estimate_max_order", "killer_vector", "leading_digit", "leading_digits", "merge",
    "star_discrepancy_1d", "weyl_average",
    "ClassEstimate", "classify", "expr_evaluator", "forward_difference", "sequence_evaluator",
    "AmbiguousDigit", "CancellationOverflow", "DepthExceeded", "ExceedsMaximum", "InsufficientN",
    "InvalidInput", "LocalBenfordError", "NotSeekable", "PrecisionBudgetExceeded", "SpecParseError",
    "FixedReal", "FracValue", "add_mod1", "log_const", "scale_mod1",
    "frac_array", "frac_at", "frac_stream", "make_state", "parse", "real_evaluator", "render", "seek_seed",
]
