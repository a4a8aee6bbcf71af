"""Exact fixed-point residues modulo 1 and high-precision logarithms.

``FracValue`` is the currency shared by generators and statistics: an
unsigned 128-bit fraction, arithmetic mod 1, never rounded after
construction.  ``FixedReal`` carries a signed real at a chosen number of
fractional bits together with a conservative absolute error bound counted
in units of the last place (ulps).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from numbers import Rational

from .errors import InvalidInput

FRAC_BITS = 128
CONST_BITS = 192
GUARD_BITS = 64

_FRAC_ONE = 1 << FRAC_BITS
_FRAC_MASK = _FRAC_ONE - 1


@dataclass(frozen=True, slots=True)
class FracValue:
    """A residue in [0, 1) stored as ``raw / 2**128``."""

    raw: int

    def __post_init__(self):
        if not 0 <= self.raw < _FRAC_ONE:
            raise ValueError(f"raw fraction out of range: {self.raw!r}")

    @classmethod
    def zero(cls) -> FracValue:
        return cls(0)

    @classmethod
    def from_fraction(cls, q) -> FracValue:
        """Floor of ``{q} * 2**128`` for an exact rational ``q``."""
        q = Fraction(q)
        return cls((q.numerator << FRAC_BITS) // q.denominator & _FRAC_MASK)

    @classmethod
    def from_float(cls, x: float) -> FracValue:
        return cls.from_fraction(Fraction(x))

    @classmethod
    def from_words(cls, hi: int, lo: int) -> FracValue:
        return cls((int(hi) << 64) | int(lo))

    @property
    def hi(self) -> int:
        return self.raw >> 64

    @property
    def lo(self) -> int:
        return self.raw & 0xFFFFFFFFFFFFFFFF

    def __add__(self, other: FracValue) -> FracValue:
        return add_mod1(self, other)

    def __sub__(self, other: FracValue) -> FracValue:
        return FracValue((self.raw - other.raw) & _FRAC_MASK)

    def __neg__(self) -> FracValue:
        return FracValue(-self.raw & _FRAC_MASK)

    def __mul__(self, m: int) -> FracValue:
        return scale_mod1(self, m)

    __rmul__ = __mul__

    def __float__(self) -> float:
        return self.raw / _FRAC_ONE

    def to_fraction(self) -> Fraction:
        return Fraction(self.raw, _FRAC_ONE)

    def circular_distance(self, other: FracValue) -> int:
        """Distance on the circle R/Z, in units of 2**-128."""
        d = (self.raw - other.raw) & _FRAC_MASK
        return min(d, _FRAC_ONE - d)

    def __repr__(self):
        return f"FracValue({float(self):.17g})"


def add_mod1(a: FracValue, b: FracValue) -> FracValue:
    return FracValue((a.raw + b.raw) & _FRAC_MASK)


def scale_mod1(a: FracValue, m: int) -> FracValue:
    if not isinstance(m, int):
        raise InvalidInput(f"scale factor must be an integer, got {m!r}")
    return FracValue((a.raw * m) & _FRAC_MASK)


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


@dataclass(frozen=True, slots=True)
class FixedReal:
    """Signed fixed-point real ``raw / 2**bits`` with error ``err / 2**bits``.

    The error is an absolute bound on ``|true value - represented value|``,
    kept as an exact ulp count and propagated conservatively by every
    operation.
    """

    raw: int
    bits: int = CONST_BITS
    err: int = 0

    @classmethod
    def from_rational(cls, q, bits: int = CONST_BITS) -> FixedReal:
        q = Fraction(q)
        num = q.numerator << bits
        raw, rem = divmod(num, q.denominator)
        return cls(raw, bits, 1 if rem else 0)

    @classmethod
    def from_int(cls, n: int, bits: int = CONST_BITS) -> FixedReal:
        return cls(n << bits, bits, 0)

    @property
    def integer_part(self) -> int:
        return self.raw >> self.bits

    @property
    def fraction(self) -> int:
        return self.raw & ((1 << self.bits) - 1)

    @property
    def error_bound(self) -> Fraction:
        return Fraction(self.err, 1 << self.bits)

    @property
    def is_exact(self) -> bool:
        return self.err == 0

    def to_fraction(self) -> Fraction:
        return Fraction(self.raw, 1 << self.bits)

    def interval(self) -> tuple[Fraction, Fraction]:
        one = 1 << self.bits
        return Fraction(self.raw - self.err, one), Fraction(self.raw + self.err, one)

    def __float__(self) -> float:
        return self.raw / (1 << self.bits) if self.bits < 1000 else float(self.to_fraction())

    def with_bits(self, bits: int) -> FixedReal:
        if bits >= self.bits:
            s = bits - self.bits
            return FixedReal(self.raw << s, bits, self.err << s)
        s = self.bits - bits
        raw = self.raw >> s
        lost = self.raw - (raw << s)
        return FixedReal(raw, bits, _ceil_div(self.err, 1 << s) + (1 if lost else 0))

    def _coerce(self, other) -> FixedReal:
        if isinstance(other, FixedReal):
            return other
        if isinstance(other, int):
            return FixedReal.from_int(other, self.bits)
        if isinstance(other, Rational):
            return FixedReal.from_rational(other, self.bits)
        return NotImplemented

    def _aligned(self, other: FixedReal):
        bits = max(self.bits, other.bits)
        return self.with_bits(bits), other.with_bits(bits), bits

    def __add__(self, other) -> FixedReal:
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        a, b, bits = self._aligned(other)
        return FixedReal(a.raw + b.raw, bits, a.err + b.err)

    __radd__ = __add__

    def __neg__(self) -> FixedReal:
        return FixedReal(-self.raw, self.bits, self.err)

    def __sub__(self, other) -> FixedReal:
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> FixedReal:
        return (-self) + other

    def scale(self, m: int) -> FixedReal:
        return FixedReal(self.raw * m, self.bits, self.err * abs(m))

    def __mul__(self, other) -> FixedReal:
        if isinstance(other, int):
            return self.scale(other)
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        a, b, bits = self._aligned(other)
        prod = a.raw * b.raw
        raw = prod >> bits
        lost = prod - (raw << bits)
        spread = abs(a.raw) * b.err + abs(b.raw) * a.err + a.err * b.err
        err = _ceil_div(spread, 1 << bits) + (1 if lost else 0)
        return FixedReal(raw, bits, err)

    __rmul__ = __mul__

    def __truediv__(self, other) -> FixedReal:
        if isinstance(other, int):
            other = FixedReal.from_int(other, self.bits)
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        a, b, bits = self._aligned(other)
        if abs(b.raw) <= b.err:
            raise ZeroDivisionError("divisor interval contains zero")
        num = a.raw << bits
        raw = num // b.raw
        lost = num - raw * b.raw
        rb = abs(b.raw)
        spread = (a.err * rb + abs(a.raw) * b.err) << bits
        err = _ceil_div(spread, (rb - b.err) * rb) + (1 if lost else 0)
        return FixedReal(raw, bits, err)

    def reduce_mod1(self) -> tuple[FracValue, Fraction]:
        """Truncate to a ``FracValue`` and return it with its error bound."""
        shift = self.bits - FRAC_BITS
        if shift >= 0:
            frac = (self.raw >> shift) & _FRAC_MASK
            truncated = self.raw & ((1 << shift) - 1)
            bound = self.error_bound + (Fraction(1, _FRAC_ONE) if truncated else 0)
        else:
            frac = (self.raw << -shift) & _FRAC_MASK
            bound = self.error_bound
        return FracValue(frac), bound

    def mod1(self) -> FracValue:
        return self.reduce_mod1()[0]

    def __repr__(self):
        return f"FixedReal({float(self):.17g} ± 2^{_log2(self.error_bound)})"


def _log2(q: Fraction) -> str:
    if q == 0:
        return "-inf"
    return f"{math.log2(q.numerator) - math.log2(q.denominator):.1f}"


# ---------------------------------------------------------------------------
# logarithms

def _atanh_ratio(p: int, q: int, wp: int) -> tuple[int, int]:
    """atanh(p/q) for 0 <= p/q <= 1/3, as (raw, err) at ``wp`` bits."""
    if p == 0:
        return 0, 0
    p2, q2 = p * p, q * q
    power = (p << wp) // q
    total = power
    k = 1
    terms = 1
    while power:
        power = power * p2 // q2
        total += power // (2 * k + 1)
        k += 1
        terms += 1
    return total, 3 * terms + 3


@lru_cache(maxsize=64)
def _ln2(wp: int) -> tuple[int, int]:
    raw, err = _atanh_ratio(1, 3, wp)
    return 2 * raw, 2 * err


@lru_cache(maxsize=16)
def _ln_small_table(wp: int) -> tuple[tuple[int, int], ...]:
    """ln(256 + j) for j = 0..255, chained upward from ln 256 = 8 ln 2."""
    l2, e2 = _ln2(wp)
    raw, err = 8 * l2, 8 * e2
    out = [(raw, err)]
    for m in range(257, 512):
        a, e = _atanh_ratio(1, 2 * m - 1, wp)
        raw, err = raw + 2 * a, err + 2 * e
        out.append((raw, err))
    return tuple(out)


def _ln_int(n: int, wp: int) -> tuple[int, int]:
    """Natural log of a positive integer as (raw, err) at ``wp`` bits."""
    if n < 1:
        raise InvalidInput("logarithm of a non-positive number")
    if n == 1:
        return 0, 0
    l2, e2 = _ln2(wp)
    shift = 0
    extra_err = 0
    if n.bit_length() > wp + 64:
        shift = n.bit_length() - (wp + 64)
        n >>= shift
        # dropped low bits change ln by less than 2**-(wp+63)
        extra_err = 1
    k = n.bit_length() - 1
    # n = 2**k * m with m in [1, 2); pick j = floor((m - 1) * 256)
    if k >= 8:
        j = (n >> (k - 8)) - 256
    else:
        j = (n << (8 - k)) - 256
    table = _ln_small_table(wp)
    t_raw, t_err = table[j]
    # r = n * 256 / ((256 + j) * 2**k) lies in [1, 1 + 1/256)
    num = n << 8
    den = (256 + j) << k
    a_raw, a_err = _atanh_ratio(num - den, num + den, wp)
    total_k = k - 8 + shift
    raw = total_k * l2 + t_raw + 2 * a_raw
    err = abs(total_k) * e2 + t_err + 2 * a_err + extra_err
    return raw, err


def _ln_rational(q: Fraction, wp: int) -> tuple[int, int]:
    a, ea = _ln_int(q.numerator, wp)
    b, eb = _ln_int(q.denominator, wp)
    return a - b, ea + eb


def ln_fixed(x, bits: int = CONST_BITS) -> FixedReal:
    """Natural logarithm of a positive rational with error <= 2**-bits."""
    q = Fraction(x)
    if q <= 0:
        raise InvalidInput(f"logarithm of non-positive value {x!r}")
    wp = bits + GUARD_BITS
    raw, err = _ln_rational(q, wp)
    return _round_to(FixedReal(raw, wp, err), bits)


def _round_to(value: FixedReal, bits: int) -> FixedReal:
    """Round to nearest at ``bits``; the error stays within one ulp."""
    s = value.bits - bits
    if s <= 0:
        return value.with_bits(bits)
    raw = (value.raw + (1 << (s - 1))) >> s
    if value.err == 0 and raw << s == value.raw:
        return FixedReal(raw, bits, 0)
    # |rounding| <= 1/2 ulp, plus the carried error
    err = 1 if value.err <= (1 << (s - 1)) else _ceil_div(value.err + (1 << (s - 1)), 1 << s)
    return FixedReal(raw, bits, err)


def _perfect_root(base: int) -> tuple[int, int]:
    """(r, j) with base == r**j and j maximal."""
    for j in range(base.bit_length(), 1, -1):
        guess = round(base ** (1.0 / j))
        for r in (guess - 1, guess, guess + 1):
            if r > 1 and r**j == base:
                return r, j
    return base, 1


def _exact_log(q: Fraction, base: int):
    """Rational e with base**e == q, or None."""
    if q == 1:
        return Fraction(0)
    if q < 1:
        e = _exact_log(1 / q, base)
        return -e if e is not None else None
    if q.denominator != 1:
        return None
    r, j = _perfect_root(base)
    n, i = q.numerator, 0
    while n % r == 0:
        n //= r
        i += 1
    return Fraction(i, j) if n == 1 else None


def _as_rational(x) -> Fraction:
    if isinstance(x, float):
        raise InvalidInput("log_const needs an exact rational, not a float")
    try:
        return Fraction(x)
    except (TypeError, ValueError) as exc:
        raise InvalidInput(f"not a rational number: {x!r}") from exc


def log_const(x, base: int, bits: int = CONST_BITS) -> FixedReal:
    """``log_base(x)`` for rational ``x > 0`` with error at most ``2**-bits``.

    Exact (zero error) whenever ``x`` is an integer power of ``base``.
    Results are cached per ``(x, base, bits)``.
    """
    q = _as_rational(x)
    if q <= 0:
        raise InvalidInput(f"log_const needs x > 0, got {x!r}")
    if not isinstance(base, int) or base < 2:
        raise InvalidInput(f"base must be an integer >= 2, got {base!r}")
    return _log_const_cached(q, base, bits)


@lru_cache(maxsize=4096)
def _log_const_cached(q: Fraction, base: int, bits: int) -> FixedReal:
    e = _exact_log(q, base)
    if e is not None:
        return FixedReal.from_rational(e, bits)
    wp = bits + GUARD_BITS
    num_raw, num_err = _ln_rational(q, wp)
    den_raw, den_err = _ln_int(base, wp)
    quotient = FixedReal(num_raw, wp, num_err) / FixedReal(den_raw, wp, den_err)
    return _round_to(quotient, bits)


def inv_ln(base: int, bits: int = CONST_BITS) -> FixedReal:
    """``1 / ln(base)``."""
    wp = bits + GUARD_BITS
    raw, err = _ln_int(base, wp)
    return _round_to(FixedReal.from_int(1, wp) / FixedReal(raw, wp, err), bits)


def sqrt_fixed(x, bits: int = CONST_BITS) -> FixedReal:
    """Square root of a non-negative rational, truncated, error < 1 ulp."""
    q = Fraction(x)
    if q < 0:
        raise InvalidInput("square root of a negative number")
    scaled, rem = divmod(q.numerator << (2 * bits), q.denominator)
    root = math.isqrt(scaled)
    exact = rem == 0 and root * root == scaled
    return FixedReal(root, bits, 0 if exact else 1)
