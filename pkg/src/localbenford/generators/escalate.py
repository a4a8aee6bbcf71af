"""Precision escalation for digits that sit near a threshold."""

from __future__ import annotations

import math
from fractions import Fraction
from math import factorial

from ..errors import AmbiguousDigit
from ..fixed_frac import FixedReal, log_const
from . import specs as S
from .evaluators import fibonacci, nth_prime, real_evaluator
from .partition import partition_exact

START_BITS = 256
MAX_BITS = 4096
EXACT_BITS = 1 << 22  # largest term materialised to settle a tie
EXACT_FIRST_BITS = 1 << 14  # terms this small are read exactly before any escalation


def digit_interval(value: FixedReal, base: int) -> int | None:
    """Digit of ``{value}`` if its whole error interval agrees, else None."""
    bits = value.bits
    lo_raw, hi_raw = value.raw - value.err, value.raw + value.err
    if lo_raw >> bits != hi_raw >> bits:
        return None
    mask = (1 << bits) - 1
    lo_f, hi_f = lo_raw & mask, hi_raw & mask
    digit = 0
    for d in range(1, base):
        t = log_const(d, base, bits)
        if value.err == 0 and t.err == 0:
            above = lo_f >= t.raw
        elif lo_f >= t.raw + t.err:
            above = True
        elif hi_f < t.raw - t.err:
            above = False
        else:
            return None
        if not above:
            break
        digit = d
    return digit


def resolve_digit(spec, base: int, n: int, evaluate=None, start_bits: int = START_BITS,
                  max_bits: int = MAX_BITS) -> int:
    """Leading digit of ``a_n`` from a certified evaluation, doubling precision."""
    evaluate = evaluate or real_evaluator(spec, base)
    size = abs(float(evaluate(n, 64))) * math.log2(base)
    if size <= EXACT_FIRST_BITS:
        value = exact_term(spec, n)
        if value is not None:
            return digit_of_rational(value, base)
    bits = start_bits
    while bits <= max_bits:
        digit = digit_interval(evaluate(n, bits), base)
        if digit is not None:
            return digit
        bits *= 2
    # an interval that never separates from a threshold means a_n = d * b^m
    if size <= EXACT_BITS:
        value = exact_term(spec, n)
        if value is not None:
            return digit_of_rational(value, base)
    raise AmbiguousDigit(f"digit of term {n} undecided at {max_bits} bits", index=n)


def digit_of_rational(q: Fraction, base: int) -> int:
    """Leading base-``base`` digit of a positive rational."""
    q = Fraction(q)
    if q <= 0:
        raise ValueError("leading digit needs a positive value")
    m = (q.numerator.bit_length() - q.denominator.bit_length()) * math.log(2) / math.log(base)
    m = math.floor(m) - 1
    scale = Fraction(base) ** m
    while q >= scale * base:
        scale *= base
    while q < scale:
        scale /= base
    return int(q / scale)


def _power(a: Fraction, e: Fraction):
    if e.denominator != 1:
        return None
    return Fraction(a) ** int(e)


def exact_term(spec, n: int):
    """``a_n`` as a rational when it is one, else None."""
    poly = S.as_polyexp(spec)
    if poly is not None:
        return _power(poly.a, poly.value(n))
    if isinstance(spec, S.Geometric):
        return Fraction(spec.a) ** n
    if isinstance(spec, S.NPowerN):
        return Fraction(n ** n)
    if isinstance(spec, S.Factorial):
        return Fraction(factorial(n))
    if isinstance(spec, S.Partition) and spec.mode == "exact":
        return Fraction(partition_exact(n))
    if isinstance(spec, S.FibonacciExp):
        return Fraction(spec.a) ** fibonacci(n)
    if isinstance(spec, S.PrimeExp):
        p = nth_prime(n)
        return Fraction((1 << p) - 1) if spec.mersenne else Fraction(spec.a) ** p
    if isinstance(spec, S.IteratedProduct):
        h = spec.h
        if h == 1:
            return exact_term(spec.inner, n)
        acc = Fraction(1)
        for m in range(1, n + 1):
            v = exact_term(S.IteratedProduct(spec.inner, h - 1) if h > 2 else spec.inner, m)
            if v is None:
                return None
            acc *= v
        return acc
    return None
