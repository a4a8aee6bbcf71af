"""Leading digits, k-tuple statistics, Weyl sums and the local order estimator."""

from .counting import DigitTupleCounter, count_tuples, leading_digits, map_chunks
from .digits import benford_prob, benford_probs, digits_from_words, leading_digit, thresholds
from .order import (
    LevelEvidence,
    OrderPolicy,
    OrderReport,
    estimate_max_order,
    expected_order,
    feasible,
    max_feasible_k,
)
from .report import (
    DeviationReport,
    TupleRow,
    deviation_report,
    order_csv,
    order_json,
    product_expectations,
    tuples_csv,
    tuples_json,
    weyl_csv,
    weyl_json,
)
from .weyl import (
    WitnessResult,
    algebraic_witness,
    killer_vector,
    residue_spread,
    star_discrepancy_1d,
    star_discrepancy_words,
    weyl_average,
    weyl_residues,
    weyl_sum,
)


def merge(c1: DigitTupleCounter, c2: DigitTupleCounter) -> DigitTupleCounter:
    return c1.merge(c2)


__all__ = [
    "DigitTupleCounter", "count_tuples", "leading_digits", "map_chunks", "merge",
    "benford_prob", "benford_probs", "digits_from_words", "leading_digit", "thresholds",
    "LevelEvidence", "OrderPolicy", "OrderReport", "estimate_max_order", "expected_order",
    "feasible", "max_feasible_k",
    "DeviationReport", "TupleRow", "deviation_report", "order_csv", "order_json",
    "product_expectations", "tuples_csv", "tuples_json", "weyl_csv", "weyl_json",
    "WitnessResult", "algebraic_witness", "killer_vector", "residue_spread", "star_discrepancy_1d",
    "star_discrepancy_words", "weyl_average", "weyl_residues", "weyl_sum",
]
