"""Fractional-part streams ``{log_b a_n}`` and real evaluators of ``log_b a_n``."""

from .checkpoint import Checkpoint, CheckpointWriter, latest_checkpoint, read_checkpoint, write_checkpoint
from .doubly import doubly_exp_frac, doubly_exp_log, theta_fixed
from .evaluators import fibonacci, real_evaluator
from .partition import partition_exact, partitions_upto
from .specs import (
    DoublyExp,
    Factorial,
    FibonacciExp,
    Geometric,
    IteratedProduct,
    NPowerN,
    Partition,
    PolyExp,
    PowerExp,
    PrimeExp,
    SequenceSpec,
    Theta,
    as_polyexp,
    parse,
    render,
)
from .state import (
    FracBlock,
    GeneratorState,
    frac_array,
    frac_at,
    frac_blocks,
    frac_stream,
    is_seekable,
    iterated_lift,
    make_state,
    seek_seed,
)

__all__ = [
    "Checkpoint", "CheckpointWriter", "latest_checkpoint", "read_checkpoint", "write_checkpoint",
    "doubly_exp_frac", "doubly_exp_log", "theta_fixed", "fibonacci", "real_evaluator",
    "partition_exact", "partitions_upto",
    "DoublyExp", "Factorial", "FibonacciExp", "Geometric", "IteratedProduct", "NPowerN", "Partition",
    "PolyExp", "PowerExp", "PrimeExp", "SequenceSpec", "Theta", "as_polyexp", "parse", "render",
    "FracBlock", "GeneratorState", "frac_array", "frac_at", "frac_blocks", "frac_stream", "is_seekable",
    "iterated_lift", "make_state", "seek_seed",
]
