"""Weyl sums over digit windows, star discrepancy and polynomial witnesses."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np

from .. import kernels
from ..errors import InvalidInput
from ..fixed_frac import FRAC_BITS, FixedReal, FracValue
from ..generators.doubly import DEFAULT_MAX_BITS, as_theta, doubly_exp_log
from .counting import _as_spec, map_chunks, window_blocks

_TWO_PI = 2.0 * math.pi
_HI_SCALE = 2.0 ** -64
_LO_SCALE = 2.0 ** -128


def _check_t(t) -> np.ndarray:
    t = np.asarray(t)
    if t.ndim != 1 or t.size == 0 or not np.issubdtype(t.dtype, np.integer):
        raise InvalidInput("t must be a non-empty integer vector")
    if not t.any():
        raise InvalidInput("t must not be the zero vector")
    return t.astype(np.int64)


def killer_vector(k: int) -> tuple:
    """``t_i = (-1)^(k-i) C(k, i)`` for i = 0..k; annihilates degree k-1 polynomials."""
    if not isinstance(k, int) or not 1 <= k <= 30:
        raise InvalidInput("killer_vector needs 1 <= k <= 30")
    return tuple((-1) ** (k - i) * comb(k, i) for i in range(k + 1))


def _window_err(err192: int, t: np.ndarray) -> int:
    """Bound in 2^-128 units on a 128-bit window sum built from truncated words."""
    per_term = -(-err192 // (1 << 64)) + 1
    return int(np.abs(t).sum()) * per_term


def weyl_residues(spec, base: int, t, N: int, n0: int = 1, **options):
    """``{sum_i t_i f(n + i)}`` for n = n0..n0+N-1 as 128-bit words.

    Returns ``(hi, lo, err)`` with ``err`` in units of 2^-128.
    """
    from ..generators.state import seek_seed

    t = _check_t(t)
    spec = _as_spec(spec)
    state = seek_seed(spec, base, n0, replay=True, **options)
    his, los, worst = [], [], 0
    for _, words, err in window_blocks(state, N, t.size):
        m = words.shape[0] - t.size + 1
        hi, lo = kernels.window_residues(words[:, 0], words[:, 1], t, m)
        his.append(hi)
        los.append(lo)
        worst = max(worst, err)
    hi = np.concatenate(his) if his else np.zeros(0, np.uint64)
    lo = np.concatenate(los) if los else np.zeros(0, np.uint64)
    return hi, lo, _window_err(worst, t)


def residue_spread(hi: np.ndarray, lo: np.ndarray) -> int:
    """Width (in 2^-128 units) of the shortest arc holding every residue."""
    if hi.size == 0:
        return 0
    vals = sorted((int(h) << 64) | int(w) for h, w in zip(hi.tolist(), lo.tolist()))
    one = 1 << FRAC_BITS
    gaps = [b - a for a, b in zip(vals, vals[1:])] + [vals[0] + one - vals[-1]]
    return one - max(gaps)


def _phase_sums(hi: np.ndarray, lo: np.ndarray) -> tuple[float, float]:
    phase = hi.astype(np.float64) * _HI_SCALE + lo.astype(np.float64) * _LO_SCALE
    angle = _TWO_PI * phase
    return math.fsum(np.cos(angle).tolist()), math.fsum(np.sin(angle).tolist())


def weyl_sum(spec, base: int, t, N: int, workers: int = 1, checkpoint_dir=None, **options) -> complex:
    """``sum_{n <= N} exp(2 pi i {sum_i t_i f(n + i)})`` with compensated summation."""
    t = _check_t(t)
    if not isinstance(N, int) or N < 1:
        raise InvalidInput("N must be a positive integer")
    spec = _as_spec(spec)

    def chunk(state, windows):
        re, im = [], []
        for _, words, _ in window_blocks(state, windows, t.size):
            m = words.shape[0] - t.size + 1
            hi, lo = kernels.window_residues(words[:, 0], words[:, 1], t, m)
            c, s = _phase_sums(hi, lo)
            re.append(c)
            im.append(s)
        return re, im

    parts = map_chunks(spec, base, N, chunk, workers, checkpoint_dir, **options)
    re = math.fsum(x for p in parts for x in p[0])
    im = math.fsum(x for p in parts for x in p[1])
    return complex(re, im)


def weyl_average(spec, base: int, t, N: int, workers: int = 1, checkpoint_dir=None, **options) -> float:
    """``|(1/N) sum_{n <= N} exp(2 pi i f_t(n))|`` with ``f_t(n) = sum_i t_i f(n + i)``."""
    return abs(weyl_sum(spec, base, t, N, workers, checkpoint_dir, **options)) / N


def star_discrepancy_1d(values) -> Fraction:
    """Exact star discrepancy of a finite sample in [0, 1).

    Accepts ``FracValue`` items or rationals; the result is exact.
    """
    vals = []
    for v in values:
        if isinstance(v, FracValue):
            vals.append(Fraction(v.raw, 1 << FRAC_BITS))
        elif isinstance(v, (int, Fraction)):
            vals.append(Fraction(v))
        else:
            raise InvalidInput("values must be FracValue or rational")
    if not vals:
        raise InvalidInput("star discrepancy of an empty sample")
    if any(not 0 <= v < 1 for v in vals):
        raise InvalidInput("values must lie in [0, 1)")
    n = len(vals)
    # common denominator keeps the scan in integers
    den = math.lcm(*{v.denominator for v in vals})
    xs = sorted(v.numerator * (den // v.denominator) for v in vals)
    scale = den  # x_i = xs[i] / den; i/N = i * den / (N * den)
    best = 0
    for i, x in enumerate(xs):
        xn = x * n
        best = max(best, (i + 1) * scale - xn, xn - i * scale)
    return Fraction(best, n * den)


def star_discrepancy_words(hi: np.ndarray, lo: np.ndarray) -> Fraction:
    """Star discrepancy of 128-bit residues given as word arrays."""
    n = hi.size
    if n == 0:
        raise InvalidInput("star discrepancy of an empty sample")
    xs = sorted((int(h) << 64) | int(w) for h, w in zip(hi.tolist(), lo.tolist()))
    one = 1 << FRAC_BITS
    best = 0
    for i, x in enumerate(xs):
        xn = x * n
        best = max(best, (i + 1) * one - xn, xn - i * one)
    return Fraction(best, n * one)


@dataclass(frozen=True)
class WitnessResult:
    n: int
    residual: FracValue   # {sum_i c_i alpha theta^(n+i)}
    distance: float       # distance of the residual to 0 mod 1
    bound: float          # propagated error bound
    vanishes: bool        # distance within the bound


def algebraic_witness(a, theta, poly, base: int, n: int, bits: int = 192,
                      max_bits: int = DEFAULT_MAX_BITS) -> WitnessResult:
    """Evaluate ``{sum_i poly[i] * alpha * theta^(n+i)}`` with ``alpha = log_base a``.

    For a polynomial vanishing at ``theta`` the residual is zero up to the
    propagated error.
    """
    theta = as_theta(theta)
    coeffs = tuple(poly)
    if not coeffs or any(not isinstance(c, (int, np.integer)) for c in coeffs) or coeffs[-1] == 0:
        raise InvalidInput("poly needs integer coefficients with a nonzero leading term")
    if not isinstance(n, int) or n < 0:
        raise InvalidInput("n must be a non-negative integer")
    wp = bits + sum(abs(int(c)) for c in coeffs).bit_length() + 8
    acc = FixedReal(0, wp, 0)
    for i, c in enumerate(coeffs):
        if c:
            term = doubly_exp_log(a, theta, base, n + i, wp, max_bits)
            acc = acc + term.scale(int(c))
    wp = acc.bits
    r = acc.raw % (1 << wp)
    dist_raw = min(r, (1 << wp) - r)
    residual = FracValue((r >> (wp - FRAC_BITS)) if wp >= FRAC_BITS else r << (FRAC_BITS - wp))
    distance = math.ldexp(dist_raw, -wp)
    bound = math.ldexp(acc.err, -wp)
    return WitnessResult(n, residual, distance, bound, dist_raw <= acc.err)
