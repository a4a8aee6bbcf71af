import math
import sys
from collections import Counter
from fractions import Fraction
from math import factorial

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from localbenford.benford_stats import (
    DigitTupleCounter,
    algebraic_witness,
    benford_prob,
    benford_probs,
    count_tuples,
    deviation_report,
    killer_vector,
    leading_digit,
    leading_digits,
    merge,
    product_expectations,
    residue_spread,
    star_discrepancy_1d,
    thresholds,
    tuples_csv,
    tuples_json,
    weyl_average,
    weyl_residues,
    weyl_sum,
)
from localbenford.errors import AmbiguousDigit, InvalidInput, ShapeMismatch
from localbenford.fixed_frac import FracValue, log_const
from localbenford.generators import frac_stream, parse, partition_exact

LOG10_2 = Fraction("0.30102999566398119521373889472449302676818988146211")
BENFORD_PAIRS = {(1, 1): 0.0906190582895, (1, 2): 0.05300875095, (2, 1): 0.05300875095, (2, 2): 0.0310081315158}


def brute_digits(values):
    return [int(str(v)[0]) for v in values]


@pytest.fixture(autouse=True)
def _long_int_strings():
    if hasattr(sys, "set_int_max_str_digits"):
        old = sys.get_int_max_str_digits()
        sys.set_int_max_str_digits(0)
        yield
        sys.set_int_max_str_digits(old)
    else:
        yield


BRUTE = {
    "2^n": lambda n: 2**n,
    "3^n": lambda n: 3**n,
    "n!": factorial,
    "n^n": lambda n: n**n,
    "p(n)": partition_exact,
}


# ---- digits -----------------------------------------------------------------

def test_benford_probabilities():
    assert benford_prob(1) == pytest.approx(0.301029995664, abs=1e-12)
    assert benford_probs(10).sum() == pytest.approx(1.0, abs=1e-15)
    assert benford_probs(2).tolist() == [1.0]
    with pytest.raises(InvalidInput):
        benford_prob(10, 10)


def test_thresholds_are_exact_logs():
    th = thresholds(10)
    with mpmath.workprec(300):
        for d in range(1, 10):
            true = mpmath.log10(d) * mpmath.mpf(2) ** 192
            assert abs(th.raw192[d - 1] - int(mpmath.floor(true))) <= 1


@pytest.mark.parametrize("x, d", [(Fraction(0), 1), (LOG10_2 + Fraction(1, 10**15), 2),
                                  (Fraction(99, 100), 9), (Fraction(1, 2), 3)])
def test_leading_digit_examples(x, d):
    assert leading_digit(FracValue.from_fraction(x), 10) == d


def test_leading_digit_ambiguous_near_threshold():
    x = FracValue.from_fraction(LOG10_2)
    with pytest.raises(AmbiguousDigit):
        leading_digit(x, 10)
    assert leading_digit(x, 10, margin_bits=None) in (1, 2)


def test_exact_threshold_is_not_ambiguous():
    # log_4 2 = 1/2 exactly; digit 2 starts there
    assert leading_digit(FracValue.from_fraction(Fraction(1, 2)), 4) == 2


@pytest.mark.parametrize("text", sorted(BRUTE))
def test_leading_digits_match_integers(text, backend):
    n1 = 1500
    got = leading_digits(parse(text), 10, 1, n1 + 1).tolist()
    assert got == brute_digits(BRUTE[text](n) for n in range(1, n1 + 1))


@pytest.mark.parametrize("base", [2, 3, 7, 16])
def test_leading_digits_other_bases(base):
    def lead(v):
        while v >= base:
            v //= base
        return v
    got = leading_digits(parse("3^n"), base, 1, 400).tolist()
    assert got == [lead(3**n) for n in range(1, 400)]


def test_table1_digit_strings():
    assert "".join(map(str, leading_digits(parse("2^n"), 10, 1, 51))) == \
        "".join(str(2**n)[0] for n in range(1, 51))
    assert "".join(map(str, leading_digits(parse("p(n)"), 10, 1, 11))) == "1235711234"


# ---- counting ---------------------------------------------------------------

@pytest.mark.parametrize("k", [1, 2, 3])
def test_count_tuples_brute_force(k, backend):
    n = 3000
    digs = brute_digits(2**m for m in range(1, n + k))
    ref = Counter(tuple(digs[i:i + k]) for i in range(n))
    c = count_tuples("2^n", 10, k, n)
    assert c.total == n
    assert all(c.count(t) == ref.get(t, 0) for t in c.tuples())


def test_count_tuples_two_to_n_squared_pairs():
    # frozen mpmath oracle at N = 10^4
    c = count_tuples("2^(n^2)", 10, 2, 10**4)
    assert [c.count(p) for p in [(1, 1), (1, 2), (2, 1), (2, 2)]] == [892, 544, 553, 315]


def test_count_two_to_n_first_fifty():
    assert count_tuples("2^n", 10, 1, 50).count((1,)) == 15


@pytest.mark.parametrize("workers", [2, 4])
def test_parallel_counts_are_identical(workers):
    ref = count_tuples("n!", 10, 2, 600_000, workers=1)
    assert count_tuples("n!", 10, 2, 600_000, workers=workers) == ref


def test_replay_only_parallel_with_checkpoints(tmp_path):
    ref = count_tuples("superfact(2)", 10, 2, 40_000)
    first = count_tuples("superfact(2)", 10, 2, 40_000, workers=2, checkpoint_dir=tmp_path)
    again = count_tuples("superfact(2)", 10, 2, 40_000, workers=2, checkpoint_dir=tmp_path)
    assert first == ref and again == ref


def test_count_from_value_iterable():
    values = [x for _, x in frac_stream(parse("2^n"), 10, 4, 204)]
    ref = DigitTupleCounter(10, 2)
    ref.add_digits(leading_digits(parse("2^n"), 10, 4, 204))
    assert count_tuples(iter(values), 10, 2, 199) == ref


def test_value_iterable_on_threshold_is_ambiguous():
    # {log10 2^1} sits on the digit-2 threshold and a bare value cannot be refined
    with pytest.raises(AmbiguousDigit):
        count_tuples(iter([FracValue.from_fraction(LOG10_2)]), 10, 1, 1)


def test_counter_validation():
    with pytest.raises(InvalidInput):
        DigitTupleCounter(10, 0)
    with pytest.raises(ShapeMismatch):
        DigitTupleCounter(10, 2, counts=np.zeros(9, np.int64))
    with pytest.raises(ShapeMismatch):
        DigitTupleCounter(10, 2).merge(DigitTupleCounter(10, 3))
    with pytest.raises(InvalidInput):
        DigitTupleCounter(10, 2).cell((0, 1))


counters = st.builds(
    lambda cs: DigitTupleCounter(10, 2, np.array(cs, dtype=np.int64), sum(cs)),
    st.lists(st.integers(0, 1000), min_size=81, max_size=81),
)


@given(counters, counters, counters)
def test_merge_is_commutative_monoid(a, b, c):
    assert merge(a, b) == merge(b, a)
    assert merge(merge(a, b), c) == merge(a, merge(b, c))
    assert merge(a, DigitTupleCounter(10, 2)) == a
    assert (a + b).total == a.total + b.total


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 4000), st.integers(1, 4000))
def test_split_counts_merge_to_whole(n1, n2):
    digs = leading_digits(parse("2^n"), 10, 1, n1 + n2 + 2)
    whole = DigitTupleCounter(10, 2)
    whole.add_digits(digs)
    left, right = DigitTupleCounter(10, 2), DigitTupleCounter(10, 2)
    left.add_digits(digs[: n1 + 1])
    right.add_digits(digs[n1:])
    assert left + right == whole


@settings(max_examples=25, deadline=None)
@given(st.lists(st.integers(1, 9), min_size=1, max_size=300), st.integers(1, 4))
def test_counts_sum_to_windows(digs, k):
    c = DigitTupleCounter(10, k)
    c.add_digits(np.array(digs, dtype=np.uint8))
    assert int(c.counts.sum()) == c.total == max(len(digs) - k + 1, 0)


# ---- Weyl sums and discrepancy ----------------------------------------------

def test_killer_vectors():
    assert killer_vector(1) == (-1, 1)
    assert killer_vector(2) == (1, -2, 1)
    assert killer_vector(3) == (-1, 3, -3, 1)
    with pytest.raises(InvalidInput):
        killer_vector(0)


@pytest.mark.parametrize("deg", [1, 2, 3])
def test_killer_annihilates_polynomial_exponent(deg, backend):
    hi, lo, err = weyl_residues(f"2^(n^{deg})", 10, killer_vector(deg), 5000)
    assert residue_spread(hi, lo) <= 2 * err + 2
    assert abs(weyl_average(f"2^(n^{deg})", 10, killer_vector(deg), 20_000)) == pytest.approx(1.0, abs=1e-12)


def test_weyl_residues_match_mpmath(backend):
    t = (3, -1, 2)
    hi, lo, err = weyl_residues("n!", 10, t, 50)
    with mpmath.workdps(80):
        for i, n in enumerate(range(1, 51)):
            v = sum(c * mpmath.log10(mpmath.factorial(n + j)) for j, c in enumerate(t))
            ref = int(mpmath.floor((v - mpmath.floor(v)) * 2**128))
            got = (int(hi[i]) << 64) | int(lo[i])
            d = abs(got - ref)
            assert min(d, 2**128 - d) <= err + 1


def test_weyl_sum_of_generic_sequence_is_small():
    assert weyl_average("2^n", 10, (1,), 10**5) < 1e-3
    assert weyl_average("2^(n^2)", 10, (1, -1), 10**5) < 2e-2


def test_weyl_sum_is_linear_in_chunks():
    s = weyl_sum("n!", 10, (2, 1), 300_000, workers=2)
    assert s == pytest.approx(weyl_sum("n!", 10, (2, 1), 300_000), abs=1e-9)


def test_weyl_rejects_zero_vector():
    with pytest.raises(InvalidInput):
        weyl_sum("2^n", 10, (0, 0), 10)


def test_star_discrepancy_examples():
    assert star_discrepancy_1d([Fraction(i, 7) for i in range(7)]) == Fraction(1, 7)
    assert star_discrepancy_1d([Fraction(2 * i + 1, 20) for i in range(10)]) == Fraction(1, 20)


@settings(max_examples=50)
@given(st.lists(st.fractions(min_value=0, max_value=Fraction(999, 1000)), min_size=1, max_size=40))
def test_star_discrepancy_bounds(values):
    d = star_discrepancy_1d(values)
    assert Fraction(1, 2 * len(values)) <= d <= 1


def test_discrepancy_of_log2_multiples_brute_force():
    values = [(n * LOG10_2) % 1 for n in range(1, 1001)]
    d = star_discrepancy_1d(values)
    brute = max(max(abs(sum(v < x for v in values) / 1000 - x) for x in values + [Fraction(1)]),
                max(abs(sum(v <= x for v in values) / 1000 - x) for x in values))
    assert d == pytest.approx(float(brute), abs=1e-12)


def test_algebraic_witness_vanishes_for_minimal_polynomial():
    assert algebraic_witness(2, 2, (-2, 1), 10, 40).vanishes
    assert algebraic_witness(2, "phi", (-1, -1, 1), 10, 60).vanishes
    assert algebraic_witness(3, "sqrt(2)", (-2, 0, 1), 10, 30).vanishes


def test_algebraic_witness_wrong_polynomial():
    w = algebraic_witness(2, 2, (-3, 1), 10, 10)
    assert not w.vanishes
    assert w.distance == pytest.approx(min(0.745284440083256101131, 1 - 0.745284440083256101131), abs=1e-15)


# ---- reports ----------------------------------------------------------------

def test_product_expectations():
    e = product_expectations(10, 2)
    for (a, b), v in BENFORD_PAIRS.items():
        assert e[(a - 1) * 9 + b - 1] == pytest.approx(v, abs=1e-12)
    assert product_expectations(10, 3).sum() == pytest.approx(1.0)


def test_deviation_report_fields():
    c = count_tuples("2^n", 10, 2, 10**5)
    r = deviation_report(c)
    row = r.row((1, 1))
    assert row.observed == pytest.approx(c.freq((1, 1)))
    assert row.deviation == pytest.approx(row.observed - row.expected)
    assert r.linf == pytest.approx(max(abs(x.deviation) for x in r.rows))
    assert r.flagged == 0 and r.chi_df == 80


def test_deviation_report_flags_sparse_cells():
    r = deviation_report(count_tuples("2^n", 10, 2, 1000))
    assert r.flagged > 0
    assert any(x.flagged for x in r.rows)


def test_report_emitters():
    r = deviation_report(count_tuples("2^n", 10, 1, 1000))
    lines = tuples_csv(r).splitlines()
    assert lines[0].startswith("tuple,") and len(lines) == 10
    assert '"(1)"' in tuples_csv(r) or "(1)" in tuples_csv(r)
    import json
    doc = json.loads(tuples_json(r, seq="2^n"))
    assert doc["N"] == 1000 and len(doc["rows"]) == 9


def test_log2_of_power_of_ten_is_not_benford():
    c = count_tuples("10^n", 10, 1, 100)
    assert c.count((1,)) == 100
    assert math.isclose(log_const(10, 10).to_fraction(), 1)
