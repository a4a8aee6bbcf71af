"""Doubly exponential sequences ``a^(theta^n)`` at precision growing with n."""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

import mpmath
import numpy as np

from ..errors import DepthExceeded, InvalidInput
from ..fixed_frac import FRAC_BITS, FixedReal, FracValue, log_const, sqrt_fixed
from .specs import Theta

DEFAULT_MAX_BITS = 1 << 16
_GUARD = 64


def as_theta(theta) -> Theta:
    if isinstance(theta, Theta):
        return theta
    if isinstance(theta, str):
        from .specs import _Parser

        p = _Parser(theta)
        return p._theta(0, len(theta))
    if isinstance(theta, float):
        raise InvalidInput("theta must be exact: a rational, 'phi', 'sqrt(m)' or 'root(...)'")
    return Theta("rational", Fraction(theta))


def _poly_sign(coeffs, x_raw: int, bits: int) -> int:
    """Sign of p(x_raw / 2**bits) using exact integers."""
    k = len(coeffs) - 1
    acc = 0
    for i, c in enumerate(coeffs):
        acc += c * x_raw**i << (bits * (k - i))
    return (acc > 0) - (acc < 0)


def _largest_root_guess(coeffs) -> float:
    roots = np.roots(list(reversed([float(c) for c in coeffs])))
    real = [r.real for r in roots if abs(r.imag) < 1e-9 * max(1.0, abs(r))]
    if not real or max(real) <= 1:
        raise InvalidInput(f"polynomial {coeffs} has no real root above 1")
    return max(real)


@lru_cache(maxsize=256)
def _root_fixed(coeffs: tuple, bits: int) -> FixedReal:
    guess = _largest_root_guess(coeffs)
    with mpmath.workprec(bits + 32):
        poly = lambda x: mpmath.polyval(list(reversed(coeffs)), x)  # noqa: E731
        try:
            r = mpmath.findroot(poly, mpmath.mpf(guess))
            raw = int(mpmath.floor(r * mpmath.mpf(2) ** bits))
        except (ValueError, ZeroDivisionError):
            raw = int(guess * (1 << 52)) << max(bits - 52, 0) >> max(52 - bits, 0)
    lo, hi = raw - 2, raw + 2
    s_lo, s_hi = _poly_sign(coeffs, lo, bits), _poly_sign(coeffs, hi, bits)
    if s_lo == 0:
        return FixedReal(lo, bits, 0)
    if s_hi == 0:
        return FixedReal(hi, bits, 0)
    if s_lo == s_hi:
        # Newton landed elsewhere; bisect from a float bracket
        lo = int((guess - 1e-6) * (1 << 40)) << (bits - 40) if bits >= 40 else int((guess - 1e-6) * (1 << bits))
        hi = int((guess + 1e-6) * (1 << 40) + 1) << (bits - 40) if bits >= 40 else int((guess + 1e-6) * (1 << bits)) + 1
        s_lo, s_hi = _poly_sign(coeffs, lo, bits), _poly_sign(coeffs, hi, bits)
        if s_lo == s_hi:
            raise InvalidInput(f"cannot isolate the largest root of {coeffs}")
        while hi - lo > 1:
            mid = (lo + hi) // 2
            s = _poly_sign(coeffs, mid, bits)
            if s == 0:
                return FixedReal(mid, bits, 0)
            if s == s_lo:
                lo = mid
            else:
                hi = mid
    # the root lies in (lo, hi)
    return FixedReal((lo + hi) // 2, bits, (hi - lo + 1) // 2)


def theta_fixed(theta, bits: int) -> FixedReal:
    theta = as_theta(theta)
    if theta.kind == "rational":
        return FixedReal.from_rational(theta.value, bits)
    if theta.kind == "sqrt":
        return sqrt_fixed(theta.value, bits)
    if theta.kind == "phi":
        s5 = sqrt_fixed(5, bits + 1)
        # (1 + sqrt 5) / 2 is the same raw integer read one bit further right
        return FixedReal((1 << (bits + 1)) + s5.raw, bits + 2, s5.err).with_bits(bits)
    return _root_fixed(tuple(theta.value), bits)


def theta_float(theta) -> float:
    return float(theta_fixed(theta, 64))


def _power(x: FixedReal, n: int) -> FixedReal:
    result = FixedReal.from_int(1, x.bits)
    base = x
    while n:
        if n & 1:
            result = result * base
        n >>= 1
        if n:
            base = base * base
    return result


def doubly_exp_log(a, theta, base: int, n: int, bits: int = 192,
                   max_bits: int = DEFAULT_MAX_BITS) -> FixedReal:
    """``theta^n * log_base(a)`` with error at most ``2**-bits``."""
    theta = as_theta(theta)
    if n < 0:
        raise InvalidInput("index must be non-negative")
    log2_theta = math.log2(theta_float(theta))
    a = Fraction(a)
    extra = max(0, math.ceil(math.log2(max(abs(float(log_const(a, base, 64))), 1e-300))))
    work = bits + math.ceil(n * log2_theta) + extra + _GUARD + (n.bit_length() + 8)
    while True:
        if work > max_bits:
            raise DepthExceeded(
                f"index {n} needs {work} working bits, above the configured ceiling {max_bits}")
        if theta.kind == "rational":
            power = FixedReal.from_rational(theta.value**n, work)
        else:
            power = _power(theta_fixed(theta, work), n)
        value = power * log_const(a, base, work)
        if value.err <= 1 << (work - bits):
            return value
        work += _GUARD


def doubly_exp_frac(a, theta, base: int, n: int, output_bits: int = FRAC_BITS,
                    max_bits: int = DEFAULT_MAX_BITS) -> FracValue:
    """``{theta^n * log_base a}`` truncated to a ``FracValue``."""
    return doubly_exp_log(a, theta, base, n, output_bits + 8, max_bits).mod1()
