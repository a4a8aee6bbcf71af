"""High-precision real evaluators ``n -> log_base(a_n)`` for every family."""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from math import comb

from mpmath import bernfrac, iv

from ..errors import InvalidInput
from ..expr import enclose
from ..fixed_frac import FixedReal, _round_to, inv_ln, ln_fixed, log_const
from . import specs as S
from .doubly import doubly_exp_log
from .partition import partition_exact
from .primes import factor_table, nth_primes

_GUARD = 16


def fibonacci(n: int) -> int:
    """F_n with F_1 = F_2 = 1, by fast doubling."""
    def pair(k):
        if k == 0:
            return 0, 1
        a, b = pair(k >> 1)
        c = a * (2 * b - a)
        d = a * a + b * b
        return (d, c + d) if k & 1 else (c, d)

    return pair(n)[0]


def nth_prime(n: int) -> int:
    return int(nth_primes(n, 1)[0])


def _check_index(n):
    if not isinstance(n, int) or n < 1:
        raise InvalidInput(f"sequence index must be an integer >= 1, got {n!r}")


def _times_log(mult: Fraction, a: Fraction, base: int, bits: int) -> FixedReal:
    """``mult * log_base(a)`` rounded to ``bits``."""
    mult = Fraction(mult)
    if mult == 0:
        return FixedReal(0, bits, 0)
    extra = max(abs(mult.numerator).bit_length() - mult.denominator.bit_length() + 2, 0)
    wp = bits + extra + _GUARD
    lg = log_const(a, base, wp)
    if mult.denominator == 1:
        value = lg.scale(mult.numerator)
    else:
        value = FixedReal.from_rational(mult, wp) * lg
    return _round_to(value, bits)


@lru_cache(maxsize=1 << 16)
def _ln_prime(p: int, wp: int) -> FixedReal:
    return ln_fixed(p, wp)


def _prime_weight_log(exps: dict, base: int, bits: int) -> FixedReal:
    """``sum_p E_p log_base p`` for non-negative integer weights."""
    total = sum(exps.values())
    if total == 0:
        return FixedReal(0, bits, 0)
    wp = bits + total.bit_length() + len(exps).bit_length() + _GUARD
    acc = FixedReal(0, wp, 0)
    for p in sorted(exps):
        if exps[p]:
            acc = acc + _ln_prime(p, wp).scale(exps[p])
    return _round_to(acc * inv_ln(base, wp), bits)


def _legendre_weights(n: int, weight) -> dict:
    """``E_p = sum_{j<=n} weight(j) * v_p(j)`` for all primes p <= n."""
    table = factor_table(n)
    exps = {}
    for p in table.primes[: int(table.primes.searchsorted(n, side="right"))].tolist():
        e, pk = 0, p
        while pk <= n:
            e += sum(weight(j) for j in range(pk, n + 1, pk))
            pk *= p
        exps[p] = e
    return exps


def _factorial_exponents(n: int) -> dict:
    table = factor_table(n)
    exps = {}
    for p in table.primes[: int(table.primes.searchsorted(n, side="right"))].tolist():
        e, pk = 0, p
        while pk <= n:
            e += n // pk
            pk *= p
        exps[p] = e
    return exps


STIRLING_MIN = 256


def _stirling_interval(n: int, base: int):
    """``log_base n!`` from the Stirling series; None when the series cannot reach ``prec``.

    For real n > 0 the remainder after any number of correction terms is
    bounded by the first omitted term.
    """
    def evaluate(prec):
        target = -(prec + 8)
        corr, j = Fraction(0), 1
        while True:
            term = Fraction(*map(int, bernfrac(2 * j))) / (2 * j * (2 * j - 1) * Fraction(n) ** (2 * j - 1))
            size = math.log2(abs(term.numerator)) - math.log2(term.denominator)
            if size < target:
                break
            if j > 1 and size >= last:
                raise _SeriesDiverged
            corr += term
            last, j = size, j + 1
        rem = abs(term)
        r = iv.mpf(rem.numerator) / iv.mpf(rem.denominator)
        ln_n = iv.log(iv.mpf(n))
        total = ((n + iv.mpf(0.5)) * ln_n - n + iv.log(2 * iv.pi) / 2
                 + iv.mpf(corr.numerator) / iv.mpf(corr.denominator) + iv.mpf([-r.b, r.b]))
        return total / iv.log(iv.mpf(base))

    return evaluate


class _SeriesDiverged(Exception):
    pass


def _log_factorial(n: int, base: int, bits: int) -> FixedReal:
    if n >= STIRLING_MIN:
        try:
            return enclose(_stirling_interval(n, base), bits, f"log {n}!")
        except _SeriesDiverged:
            pass
    return _prime_weight_log(_factorial_exponents(n), base, bits)


def _powexp_interval(spec: S.PowerExp, base: int, n: int):
    def evaluate(prec):
        lam = spec.lam.interval(None, prec)
        gamma = spec.gamma.interval(None, prec)
        c = spec.c.interval(None, prec)
        beta = spec.beta.interval(None, prec)
        ln_n = iv.log(iv.mpf(n))
        total = iv.log(lam) + gamma * ln_n + c * iv.exp(beta * ln_n)
        return total / iv.log(iv.mpf(base))

    return evaluate


def _flatten(spec):
    """Collapse nested IteratedProducts: lift(lift(s, h1), h2) = lift(s, h1 + h2 - 1)."""
    h = 1
    while isinstance(spec, S.IteratedProduct):
        h += spec.h - 1
        spec = spec.inner
    return spec, h


def real_evaluator(spec, base: int):
    """Return ``f(n, bits=192) -> FixedReal`` enclosing ``log_base a_n``."""
    if not isinstance(base, int) or base < 2:
        raise InvalidInput("base must be an integer >= 2")

    def wrap(fn):
        def evaluate(n: int, bits: int = 192) -> FixedReal:
            _check_index(n)
            return fn(n, bits)

        evaluate.spec = spec
        evaluate.base = base
        return evaluate

    poly = S.as_polyexp(spec)
    if poly is not None:
        return wrap(lambda n, bits: _times_log(poly.value(n), poly.a, base, bits))
    if isinstance(spec, S.Geometric):
        return wrap(lambda n, bits: _times_log(n, spec.a, base, bits))
    if isinstance(spec, S.NPowerN):
        return wrap(lambda n, bits: _times_log(n, Fraction(n), base, bits))
    if isinstance(spec, S.Factorial):
        return wrap(lambda n, bits: _log_factorial(n, base, bits))
    if isinstance(spec, S.Partition):
        if spec.mode == "asymptotic":
            return real_evaluator(S.PARTITION_ASYMPTOTIC, base)
        return wrap(lambda n, bits: _round_to(log_const(partition_exact(n), base, bits + 2), bits))
    if isinstance(spec, S.PowerExp):
        return wrap(lambda n, bits: enclose(_powexp_interval(spec, base, n), bits, S.render(spec)))
    if isinstance(spec, S.FibonacciExp):
        return wrap(lambda n, bits: _times_log(fibonacci(n), spec.a, base, bits))
    if isinstance(spec, S.DoublyExp):
        return wrap(lambda n, bits: _round_to(doubly_exp_log(spec.a, spec.theta, base, n, bits + 2), bits))
    if isinstance(spec, S.PrimeExp):
        return wrap(lambda n, bits: _prime_exp_log(spec, base, nth_prime(n), bits))
    if isinstance(spec, S.IteratedProduct):
        return _iterated_evaluator(spec, base, wrap)
    raise InvalidInput(f"not a sequence spec: {spec!r}")


def _prime_exp_log(spec: S.PrimeExp, base: int, p: int, bits: int) -> FixedReal:
    if not spec.mersenne:
        return _times_log(p, spec.a, base, bits)
    if p <= bits + 64:
        return _round_to(log_const((1 << p) - 1, base, bits + 2), bits)
    # log_b(1 - 2^-p) is far below one ulp; widen the bound by an ulp
    value = _times_log(p, Fraction(2), base, bits)
    return FixedReal(value.raw, value.bits, value.err + 1)


def _iterated_evaluator(spec, base, wrap):
    inner, h = _flatten(spec)
    if h == 1:
        return real_evaluator(inner, base)
    if isinstance(inner, S.Factorial):
        # log of the h-fold product of m! is sum_j C(n - j + h - 1, h - 1) log j
        def weights(n):
            return _legendre_weights(n, lambda j: comb(n - j + h - 1, h - 1))
    elif isinstance(inner, S.NPowerN):
        def weights(n):
            return _legendre_weights(n, lambda j: comb(n - j + h - 2, h - 2) * j)
    else:
        inner_eval = real_evaluator(inner, base)

        def generic(n, bits):
            w_total = comb(n + h - 2, h - 1)
            wp = bits + w_total.bit_length() + n.bit_length() + _GUARD
            acc = FixedReal(0, wp, 0)
            for m in range(1, n + 1):
                acc = acc + inner_eval(m, wp).scale(comb(n - m + h - 2, h - 2))
            return _round_to(acc, bits)

        return wrap(generic)
    return wrap(lambda n, bits: _prime_weight_log(weights(n), base, bits))

