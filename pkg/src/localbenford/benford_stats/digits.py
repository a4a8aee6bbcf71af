"""Leading digits from fractional parts of logarithms."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..errors import AmbiguousDigit, InvalidInput
from ..fixed_frac import FRAC_BITS, FracValue, log_const

THRESHOLD_BITS = 192
MARGIN_BITS = 60
# margin in units of the top 64-bit word
_MARGIN_HI = 1 << (64 - MARGIN_BITS)


@dataclass(frozen=True)
class Thresholds:
    """``log_base d`` for d = 1..base-1."""

    base: int
    values: tuple         # FixedReal per digit, 8 bits beyond THRESHOLD_BITS
    raw192: tuple         # floor of the lower enclosure at 192 bits
    hi: np.ndarray        # top 64-bit word of raw192, uint64


@lru_cache(maxsize=64)
def thresholds(base: int) -> Thresholds:
    if not isinstance(base, int) or base < 2:
        raise InvalidInput("base must be an integer >= 2")
    values = tuple(log_const(d, base, THRESHOLD_BITS + 8) for d in range(1, base))
    raw = tuple((v.raw - v.err) >> 8 for v in values)
    hi = np.array([r >> (THRESHOLD_BITS - 64) for r in raw], dtype=np.uint64)
    return Thresholds(base, values, raw, hi)


@lru_cache(maxsize=64)
def _benford_probs(base: int) -> tuple:
    out = []
    for d in range(1, base):
        p = log_const(d + 1, base, 128) - log_const(d, base, 128)
        out.append(float(p))
    return tuple(out)


def benford_prob(d: int, base: int = 10) -> float:
    """``log_base(1 + 1/d)``."""
    if not isinstance(base, int) or base < 2:
        raise InvalidInput("base must be an integer >= 2")
    if not isinstance(d, (int, np.integer)) or not 1 <= d <= base - 1:
        raise InvalidInput(f"digit must be in 1..{base - 1}, got {d!r}")
    return _benford_probs(base)[int(d) - 1]


def benford_probs(base: int = 10) -> np.ndarray:
    benford_prob(1, base)
    return np.array(_benford_probs(base))


def _ge_threshold(x192: int, th: Thresholds, i: int) -> bool | None:
    """Exact comparison ``x >= log_b(i + 1)``; None if undecidable at this precision."""
    v = th.values[i]
    x = x192 << 8
    if v.err == 0:
        return x >= v.raw
    if x >= v.raw + v.err:
        return True
    if x < v.raw - v.err:
        return False
    return None


def digit_of_exact(x192: int, base: int) -> int:
    """Digit for an exactly known 192-bit residue."""
    th = thresholds(base)
    d = 0
    for i in range(base - 1):
        ge = _ge_threshold(x192, th, i)
        if ge is None:
            raise AmbiguousDigit(f"value coincides with log_{base}({i + 1}) to 192 bits")
        if ge:
            d = i + 1
        else:
            break
    return d


def leading_digit(x: FracValue, base: int = 10, margin_bits: int | None = MARGIN_BITS) -> int:
    """Leading digit d with ``log_b d <= x < log_b(d + 1)``.

    ``x`` is taken as the value itself.  With ``margin_bits`` set, a value
    within ``2**-margin_bits`` of an inexact threshold (or just below 1)
    raises ``AmbiguousDigit`` so the caller can escalate precision.
    """
    if not isinstance(x, FracValue):
        raise InvalidInput("leading_digit expects a FracValue")
    th = thresholds(base)
    x192 = x.raw << (THRESHOLD_BITS - FRAC_BITS)
    if margin_bits is not None:
        m = 1 << (THRESHOLD_BITS - margin_bits)
        for i in range(base - 1):
            r = th.raw192[i]
            if th.values[i].err == 0 and x192 << 8 == th.values[i].raw:
                continue
            if abs(x192 - r) < m:
                raise AmbiguousDigit(f"{float(x):.20f} lies within 2^-{margin_bits} of log_{base}({i + 1})")
        if (1 << THRESHOLD_BITS) - x192 < m:
            raise AmbiguousDigit(f"{float(x):.20f} lies within 2^-{margin_bits} of 1")
    # 128-bit inputs padded to 192 bits never tie an irrational threshold
    return digit_of_exact(x192, base)


def digits_from_words(words: np.ndarray, base: int, err: int):
    """Vectorised digits of 192-bit residues with a common error bound.

    Returns ``(digits, ambiguous)``: ``digits`` is uint8 and ``ambiguous`` a
    boolean mask of positions the caller must resolve at higher precision.
    When ``err`` is zero the values are exact and every position is
    resolved here.
    """
    th = thresholds(base)
    hi = words[:, 0]
    idx = np.searchsorted(th.hi, hi, side="right")
    digits = idx.astype(np.uint8)
    lower = hi - th.hi[idx - 1]
    upper_ext = np.append(th.hi[1:], np.uint64(0xFFFFFFFFFFFFFFFF))
    upper = upper_ext[idx - 1] - hi
    close = (lower < _MARGIN_HI) | (upper < _MARGIN_HI)
    if not close.any():
        return digits, close
    positions = np.flatnonzero(close)
    if err == 0:
        for pos in positions.tolist():
            w = words[pos]
            x192 = (int(w[0]) << 128) | (int(w[1]) << 64) | int(w[2])
            digits[pos] = digit_of_exact(x192, base)
        return digits, np.zeros_like(close)
    return digits, close
