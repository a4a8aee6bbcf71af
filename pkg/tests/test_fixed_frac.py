from fractions import Fraction

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from localbenford.errors import InvalidInput
from localbenford.fixed_frac import FRAC_BITS, FixedReal, FracValue, add_mod1, log_const, scale_mod1

ONE = 1 << FRAC_BITS
LOG10_2 = "0.30102999566398119521373889472449302676818988146211"
LOG10_2_RAW192 = 1889595908185821346144366738539203194586237552713217407396
TWO_LOG10_2 = "0.60205999132796239042747778944898605353637976292422"
NEG_TWO_LOG10_2 = "0.39794000867203760957252221055101394646362023707578"

fracs = st.integers(min_value=0, max_value=ONE - 1).map(FracValue)


def frac_of(decimal: str) -> FracValue:
    return FracValue.from_fraction(Fraction(decimal))


def close(x: FracValue, decimal: str, ulps: int = 4) -> bool:
    return x.circular_distance(frac_of(decimal)) <= ulps


def test_add_mod1_wraps():
    assert add_mod1(FracValue.from_fraction(Fraction(3, 4)), FracValue.from_fraction(Fraction(1, 2))) == \
        FracValue.from_fraction(Fraction(1, 4))


def test_add_mod1_identity():
    x = frac_of(LOG10_2)
    assert add_mod1(x, FracValue.zero()) == x


def test_add_mod1_doubles_log10_2():
    x = log_const(2, 10, 192).mod1()
    assert close(add_mod1(x, x), TWO_LOG10_2)


def test_scale_mod1_examples():
    assert scale_mod1(frac_of(LOG10_2), 0) == FracValue.zero()
    assert scale_mod1(FracValue.from_fraction(Fraction(1, 4)), 7) == FracValue.from_fraction(Fraction(3, 4))
    assert close(scale_mod1(log_const(2, 10, 192).mod1(), -2), NEG_TWO_LOG10_2)


def test_scale_rejects_non_integer():
    with pytest.raises(InvalidInput):
        scale_mod1(FracValue.zero(), 1.5)


def test_fracvalue_range_checked():
    with pytest.raises(ValueError):
        FracValue(ONE)
    with pytest.raises(ValueError):
        FracValue(-1)


def test_log_const_log10_2():
    v = log_const(2, 10, 192)
    assert v.bits == 192 and v.err <= 1
    assert abs(v.raw - LOG10_2_RAW192) <= 1
    assert abs(v.to_fraction() - Fraction(LOG10_2)) <= v.error_bound + Fraction(1, 10**49)


def test_log_const_exact_powers():
    assert log_const(100, 10) == FixedReal.from_int(2, 192)
    assert log_const(1, 7).raw == 0 and log_const(1, 7).err == 0
    assert log_const(Fraction(1, 1000), 10).to_fraction() == -3
    assert log_const(2, 4).to_fraction() == Fraction(1, 2) and log_const(2, 4).is_exact
    assert log_const(8, 4).to_fraction() == Fraction(3, 2)


@pytest.mark.parametrize("bad", [0, -3, Fraction(-1, 2)])
def test_log_const_rejects_non_positive(bad):
    with pytest.raises(InvalidInput):
        log_const(bad, 10)


def test_log_const_rejects_float():
    with pytest.raises(InvalidInput):
        log_const(2.0, 10)


def test_reduce_mod1_truncates_and_adds_ulp():
    v = FixedReal.from_rational(Fraction(7, 3), 192)
    frac, bound = v.reduce_mod1()
    assert frac == FracValue.from_fraction(Fraction(1, 3))
    assert bound <= Fraction(2, ONE)


def test_negative_value_reduces_into_unit_interval():
    v = FixedReal.from_rational(Fraction(-1, 4), 192)
    assert v.mod1() == FracValue.from_fraction(Fraction(3, 4))


def test_fixed_real_error_propagation_mul():
    a = log_const(3, 10, 160)
    b = log_const(7, 10, 160)
    lo, hi = (a * b).interval()
    with mpmath.workprec(400):
        exact = mpmath.log10(3) * mpmath.log10(7)
        assert mpmath.mpf(lo.numerator) / lo.denominator <= exact <= mpmath.mpf(hi.numerator) / hi.denominator


@given(fracs, fracs, fracs)
def test_mod1_group_laws(a, b, c):
    assert add_mod1(add_mod1(a, b), c) == add_mod1(a, add_mod1(b, c))
    assert add_mod1(a, b) == add_mod1(b, a)
    assert add_mod1(a, FracValue.zero()) == a
    assert add_mod1(a, -a) == FracValue.zero()
    assert -a == FracValue((ONE - a.raw) % ONE)


@given(fracs, st.integers(min_value=-300, max_value=300))
def test_scale_equals_repeated_addition(a, m):
    acc = FracValue.zero()
    step = a if m >= 0 else -a
    for _ in range(abs(m)):
        acc = add_mod1(acc, step)
    assert scale_mod1(a, m) == acc


def test_scale_equals_repeated_addition_to_ten_thousand():
    a = log_const(2, 10, 192).mod1()
    acc = FracValue.zero()
    for m in range(1, 10**4 + 1):
        acc = add_mod1(acc, a)
        if m % 997 == 0 or m == 10**4:
            assert scale_mod1(a, m) == acc
            assert scale_mod1(a, -m) == -acc


@given(st.integers(2, 10**6), st.integers(2, 10**6), st.sampled_from([2, 3, 10, 16]))
def test_log_const_product_rule(x, y, base):
    lx, ly, lxy = log_const(x, base, 160), log_const(y, base, 160), log_const(x * y, base, 160)
    assert abs((lx + ly).raw - lxy.raw) <= lx.err + ly.err + lxy.err


@given(st.fractions(min_value=Fraction(1, 10**6), max_value=10**6), st.sampled_from([2, 3, 7, 10, 12]),
       st.sampled_from([128, 192, 300]))
def test_log_const_encloses_true_value(q, base, bits):
    if q <= 0:
        return
    v = log_const(q, base, bits)
    with mpmath.workprec(bits + 64):
        true = mpmath.log(mpmath.mpf(q.numerator) / q.denominator) / mpmath.log(base)
        lo, hi = v.interval()
        assert mpmath.mpf(lo.numerator) / lo.denominator <= true <= mpmath.mpf(hi.numerator) / hi.denominator
    assert v.error_bound <= Fraction(1, 1 << bits)


@given(st.lists(st.tuples(st.sampled_from("+-*"), st.integers(2, 500)), min_size=1, max_size=6),
       st.sampled_from([3, 10]))
def test_composite_expression_error_budget(ops, base):
    """Random sums and products of logarithms stay within their propagated bound."""
    acc = log_const(2, base, 192)
    with mpmath.workprec(600):
        true = mpmath.log(2) / mpmath.log(base)
        for op, x in ops:
            term = log_const(x, base, 192)
            t_true = mpmath.log(x) / mpmath.log(base)
            if op == "+":
                acc, true = acc + term, true + t_true
            elif op == "-":
                acc, true = acc - term, true - t_true
            else:
                acc, true = acc * term, true * t_true
        lo, hi = acc.interval()
        assert mpmath.mpf(lo.numerator) / lo.denominator <= true <= mpmath.mpf(hi.numerator) / hi.denominator
