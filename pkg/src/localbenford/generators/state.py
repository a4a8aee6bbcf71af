"""Streaming generators of 192-bit residues ``{log_b a_n}``.

A state emits consecutive residues in blocks.  Each block is an ``(m, 3)``
uint64 array of words, most significant first; the first two columns are
the 128-bit ``FracValue``.  ``err`` bounds the error of every value in the
block in units of 2**-192.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from math import comb

import numpy as np

from .. import kernels
from .._pykernels import _ints_to_rows as from_int_rows
from .._pykernels import _rows_to_ints as to_int_rows
from ..errors import ExceedsMaximum, InvalidInput, NotSeekable, PrecisionBudgetExceeded
from ..fixed_frac import FixedReal, FracValue, log_const
from . import specs as S
from .doubly import DEFAULT_MAX_BITS, doubly_exp_log
from .evaluators import _flatten, _prime_exp_log, _times_log, fibonacci
from .logtable import prime_log_table
from .partition import DEFAULT_MAX as PARTITION_MAX
from .partition import partitions_upto
from .primes import nth_prime_upper_bound, segmented_primes, simple_sieve

WIDE_BITS = 192
_M192 = (1 << WIDE_BITS) - 1
BUDGET_ULPS = 1 << (WIDE_BITS - 64)  # 2**-64 in units of 2**-192
DEFAULT_BLOCK = 1 << 16
FIB_CUTOVER = 64


@dataclass
class FracBlock:
    n0: int
    words: np.ndarray
    err: int

    def __len__(self):
        return self.words.shape[0]

    @property
    def hi(self) -> np.ndarray:
        return self.words[:, 0]

    @property
    def lo(self) -> np.ndarray:
        return self.words[:, 1]

    def frac(self, i: int) -> FracValue:
        return FracValue.from_words(int(self.words[i, 0]), int(self.words[i, 1]))


def _residue(value: FixedReal) -> tuple[int, int]:
    """192-bit residue of a FixedReal (truncated) and its error in 192-ulps."""
    s = value.bits - WIDE_BITS
    if s >= 0:
        raw = value.raw >> s
        lost = value.raw - (raw << s)
        err = -(-value.err // (1 << s)) + (1 if lost else 0)
    else:
        raw = value.raw << -s
        err = value.err << -s
    return raw & _M192, err


class GeneratorState:
    """Base class: ``index`` is the next n to emit."""

    seekable = True

    def __init__(self, spec, base: int):
        self.spec = spec
        self.base = base
        self.index = 1
        self.err = 0

    def next_block(self, count: int) -> FracBlock:
        if count < 0:
            raise InvalidInput("block size must be non-negative")
        n0 = self.index
        words = kernels.wide(count)
        err = self._fill(words) if count else self.err
        self.index += count
        self.err = err
        if err > BUDGET_ULPS:
            raise PrecisionBudgetExceeded(
                f"{S.render(self.spec)}: error bound 2^{math.log2(err) - WIDE_BITS:.1f} "
                f"exceeds 2^-64 by index {self.index - 1}")
        return FracBlock(n0, words, err)

    def _fill(self, words) -> int:
        raise NotImplementedError

    def seek(self, n0: int) -> None:
        if n0 < 1:
            raise InvalidInput("start index must be >= 1")
        self._seek(n0)
        self.index = n0

    def _seek(self, n0: int) -> None:
        raise NotSeekable(f"{S.render(self.spec)} can only be replayed from n = 1")

    # checkpoint support: a flat list of 192-bit integers
    def registers(self) -> list[int]:
        return []

    def load_registers(self, regs: list[int], index: int, err: int) -> None:
        self.index = index
        self.err = err


class PolyExpState(GeneratorState):
    """Exact forward-difference table of ``c * P(n)`` mod 1, ``c = log_b a``.

    Register j holds ``Delta^j (cP)(n)``; stepping adds register j+1 into j.
    Seeds at n = 1 are truncated products ``c * Delta^j P(1)``; seeking to n0
    applies ``R_j(n0) = sum_i C(n0 - 1, i - j) R_i(1)`` so the state is
    bit-identical to stepping.
    """

    def __init__(self, spec, base: int, poly: S.PolyExp):
        super().__init__(spec, base)
        self.poly = poly
        seeds, errs = [], []
        for b in poly.binomial_coeffs():
            value = _times_log(b, poly.a, base, WIDE_BITS + 8)
            r, e = _residue(value)
            seeds.append(r)
            errs.append(e)
        self.seeds = seeds
        self.seed_errs = errs
        self.regs = np.zeros((len(seeds), 3), dtype=np.uint64)
        from_int_rows(seeds, self.regs)
        self.err = self.err_at(1)

    def err_at(self, n: int) -> int:
        return sum(comb(n - 1, i) * e for i, e in enumerate(self.seed_errs))

    def _fill(self, words):
        kernels.polyexp_fill(self.regs, words)
        return self.err_at(self.index + words.shape[0] - 1)

    def _seek(self, n0):
        d = len(self.seeds)
        regs = [sum(comb(n0 - 1, i - j) * self.seeds[i] for i in range(j, d)) & _M192 for j in range(d)]
        from_int_rows(regs, self.regs)
        self.err = self.err_at(n0)

    def registers(self):
        return to_int_rows(self.regs)

    def load_registers(self, regs, index, err):
        from_int_rows(regs, self.regs)
        super().load_registers(regs, index, err)


def _bitlen_sum(n: int) -> int:
    """sum_{m=1}^{n} bit_length(m)."""
    total, k = 0, 1
    while (1 << (k - 1)) <= n:
        lo, hi = 1 << (k - 1), min(n, (1 << k) - 1)
        total += k * (hi - lo + 1)
        k += 1
    return total


class _TableState(GeneratorState):
    """Families built from the prime log table (``log_b m`` for integer m)."""

    def __init__(self, spec, base):
        super().__init__(spec, base)
        self.table = prime_log_table(base, 1 << 16)

    def _logs(self, m0: int, count: int) -> np.ndarray:
        table = prime_log_table(self.base, m0 + count + 1)
        self.table = table
        out = kernels.wide(count)
        ft = table.table
        kernels.factor_log_fill(m0, out, ft.spf_idx, ft.primes, table.plog)
        return out

    def _log_err(self, m: int) -> int:
        # log m sums at most bit_length(m) - 1 table entries
        return self.table.entry_err * max(m.bit_length() - 1, 0)


class FactorialState(_TableState):
    """Running sum of ``log_b m``; seeks by Legendre's formula, which gives
    the same 192-bit residue as replay because the sum is exact mod 2**192."""

    def __init__(self, spec, base):
        super().__init__(spec, base)
        self.acc = np.zeros(3, dtype=np.uint64)

    def err_at(self, n: int) -> int:
        return self.table.entry_err * (_bitlen_sum(n) - n)

    def _fill(self, words):
        count = words.shape[0]
        words[:] = self._logs(self.index, count)
        kernels.prefix_sum_fill(words, self.acc)
        return self.err_at(self.index + count - 1)

    def _seek(self, n0):
        m = n0 - 1
        acc = 0
        if m >= 2:
            table = prime_log_table(self.base, m + 1)
            self.table = table
            primes = table.table.primes
            stop = int(primes.searchsorted(m, side="right"))
            for i, p in enumerate(primes[:stop].tolist()):
                e, pk = 0, p
                while pk <= m:
                    e += m // pk
                    pk *= p
                acc += e * table._frac[i]
        from_int_rows([acc & _M192], self.acc.reshape(1, 3))
        self.err = self.err_at(max(m, 1)) if m >= 1 else 0

    def registers(self):
        return to_int_rows(self.acc.reshape(1, 3))

    def load_registers(self, regs, index, err):
        from_int_rows(regs, self.acc.reshape(1, 3))
        super().load_registers(regs, index, err)


class NPowerNState(_TableState):
    def _fill(self, words):
        count = words.shape[0]
        m0 = self.index
        words[:] = self._logs(m0, count)
        kernels.scale_fill(words, np.arange(m0, m0 + count, dtype=np.uint64))
        last = m0 + count - 1
        return last * self._log_err(last)

    def _seek(self, n0):
        self.err = 0


class _PerTermState(GeneratorState):
    """Direct evaluation of every term; trivially seekable."""

    def _term(self, n: int) -> tuple[int, int]:
        raise NotImplementedError

    def _fill(self, words):
        vals, worst = [], 0
        for n in range(self.index, self.index + words.shape[0]):
            r, e = self._term(n)
            vals.append(r)
            worst = max(worst, e)
        from_int_rows(vals, words)
        return worst

    def _seek(self, n0):
        self.err = 0


class PartitionState(_PerTermState):
    def __init__(self, spec, base, max_n: int = PARTITION_MAX):
        super().__init__(spec, base)
        self.max_n = max_n

    def _fill(self, words):
        last = self.index + words.shape[0] - 1
        if last > self.max_n:
            raise ExceedsMaximum(f"p({last}) exceeds the configured exact maximum {self.max_n}")
        self._values = partitions_upto(last, self.max_n)
        return super()._fill(words)

    def _term(self, n):
        return _residue(log_const(self._values[n], self.base, WIDE_BITS + 2))


class EvaluatorState(_PerTermState):
    """Per-term multiprecision evaluation (PowerExp and asymptotic p(n))."""

    def __init__(self, spec, base, evaluate):
        super().__init__(spec, base)
        self.evaluate = evaluate

    def _term(self, n):
        return _residue(self.evaluate(n, WIDE_BITS + 8))


class FibonacciExpState(GeneratorState):
    """``{c F_n}`` by the additive recurrence below the cutover, directly above."""

    def __init__(self, spec, base):
        super().__init__(spec, base)
        r, e = _residue(log_const(spec.a, base, WIDE_BITS + 8))
        self.c, self.c_err = r, e
        self.prev, self.cur = 0, r  # {c F_0}, {c F_1}
        self.err = e

    def _fill(self, words):
        vals, worst = [], self.err
        fib = None
        for n in range(self.index, self.index + words.shape[0]):
            if n < FIB_CUTOVER:
                if n > 1:
                    self.prev, self.cur = self.cur, (self.prev + self.cur) & _M192
                vals.append(self.cur)
                worst = max(worst, fibonacci(n) * self.c_err)
            else:
                if fib is None:
                    fib = (fibonacci(n - 1), fibonacci(n))
                else:
                    fib = (fib[1], fib[0] + fib[1])
                r, e = self._big_term(fib[1])
                vals.append(r)
                worst = max(worst, e)
        from_int_rows(vals, words)
        return worst

    def _big_term(self, f):
        # working precision rounded up to a grain so one constant serves many terms
        grain = 1 << 12
        wp = WIDE_BITS + 64 + -(-f.bit_length() // grain) * grain
        lg = log_const(self.spec.a, self.base, wp)
        return _residue(FixedReal((f * lg.raw) & ((1 << wp) - 1), wp, f * lg.err))

    def _seek(self, n0):
        self.prev, self.cur = 0, self.c
        n = 1
        while n < min(n0 - 1, FIB_CUTOVER - 1):
            n += 1
            self.prev, self.cur = self.cur, (self.prev + self.cur) & _M192
        self.err = self.c_err

    def registers(self):
        return [self.prev, self.cur]

    def load_registers(self, regs, index, err):
        self.prev, self.cur = regs
        super().load_registers(regs, index, err)


class PrimeExpState(GeneratorState):
    """``p_n * log_b a`` with primes from a segmented sieve."""

    def __init__(self, spec, base):
        super().__init__(spec, base)
        r, e = _residue(log_const(spec.a, base, WIDE_BITS + 8))
        self.c, self.c_err = r, e
        self._reset_primes(2)

    def _reset_primes(self, start: int):
        self._segments = segmented_primes(start)
        self._buffer = np.zeros(0, dtype=np.int64)

    def _take(self, count: int) -> np.ndarray:
        parts, have = [self._buffer], self._buffer.size
        while have < count:
            seg = next(self._segments)
            parts.append(seg)
            have += seg.size
        allp = np.concatenate(parts)
        self._buffer = allp[count:]
        return allp[:count]

    def _fill(self, words):
        primes = self._take(words.shape[0]).tolist()
        vals, worst = [], 0
        for p in primes:
            if self.spec.mersenne and p <= WIDE_BITS + 64:
                r, e = _residue(_prime_exp_log(self.spec, self.base, p, WIDE_BITS + 8))
            else:
                r, e = (p * self.c) & _M192, p * self.c_err + (1 if self.spec.mersenne else 0)
            vals.append(r)
            worst = max(worst, e)
        from_int_rows(vals, words)
        return worst

    def _seek(self, n0):
        if n0 == 1:
            self._reset_primes(2)
        else:
            primes = simple_sieve(nth_prime_upper_bound(n0))
            self._reset_primes(int(primes[n0 - 1]))
        self.err = 0


class DoublyExpState(_PerTermState):
    def __init__(self, spec, base, max_bits: int = DEFAULT_MAX_BITS):
        super().__init__(spec, base)
        self.max_bits = max_bits

    def _term(self, n):
        return _residue(doubly_exp_log(self.spec.a, self.spec.theta, self.base, n, WIDE_BITS + 8, self.max_bits))


class IteratedState(GeneratorState):
    """``h - 1`` running prefix sums over an inner state (replay only)."""

    seekable = False

    def __init__(self, spec, base, inner: GeneratorState, h: int):
        super().__init__(spec, base)
        self.inner = inner
        self.h = h
        self.accs = np.zeros((h - 1, 3), dtype=np.uint64)

    def _fill(self, words):
        block = self.inner.next_block(words.shape[0])
        words[:] = block.words
        for level in range(self.h - 1):
            kernels.prefix_sum_fill(words, self.accs[level])
        last = self.index + words.shape[0] - 1
        return comb(last + self.h - 2, self.h - 1) * block.err

    def registers(self):
        return self.inner.registers() + to_int_rows(self.accs)

    def load_registers(self, regs, index, err):
        k = self.h - 1
        inner_regs = regs[: len(regs) - k]
        from_int_rows(regs[len(regs) - k:], self.accs)
        self.inner.load_registers(inner_regs, index, 0)
        super().load_registers(regs, index, err)


def make_state(spec, base: int, **options) -> GeneratorState:
    """Fresh state positioned at n = 1."""
    if not isinstance(base, int) or base < 2:
        raise InvalidInput("base must be an integer >= 2")
    poly = S.as_polyexp(spec)
    if poly is not None:
        return PolyExpState(spec, base, poly)
    if isinstance(spec, S.Geometric):
        # a <= 1: constant or decreasing geometric sequence, still a polynomial exponent of a
        flipped = S.PolyExp(1 / spec.a, (0, -1)) if spec.a < 1 else None
        if flipped is None:
            return _ConstantZero(spec, base)
        return PolyExpState(spec, base, flipped)
    if isinstance(spec, S.Factorial):
        return FactorialState(spec, base)
    if isinstance(spec, S.NPowerN):
        return NPowerNState(spec, base)
    if isinstance(spec, S.Partition):
        if spec.mode == "exact":
            return PartitionState(spec, base, options.get("partition_max", PARTITION_MAX))
        from .evaluators import real_evaluator

        return EvaluatorState(spec, base, real_evaluator(spec, base))
    if isinstance(spec, S.PowerExp):
        from .evaluators import real_evaluator

        return EvaluatorState(spec, base, real_evaluator(spec, base))
    if isinstance(spec, S.FibonacciExp):
        return FibonacciExpState(spec, base)
    if isinstance(spec, S.PrimeExp):
        return PrimeExpState(spec, base)
    if isinstance(spec, S.DoublyExp):
        return DoublyExpState(spec, base, options.get("max_bits", DEFAULT_MAX_BITS))
    if isinstance(spec, S.IteratedProduct):
        inner, h = _flatten(spec)
        inner_state = make_state(inner, base, **options)
        if h == 1:
            return inner_state
        return IteratedState(spec, base, inner_state, h)
    raise InvalidInput(f"not a sequence spec: {spec!r}")


class _ConstantZero(_PerTermState):
    def _term(self, n):
        return 0, 0


def is_seekable(spec) -> bool:
    return make_state(spec, 10).seekable


def seek_seed(spec, base: int, n0: int, checkpoint_dir=None, replay: bool = False, **options) -> GeneratorState:
    """State positioned at ``n0``, bit-identical to streaming from n = 1.

    Replay-only families use the newest checkpoint at or before ``n0`` when
    ``checkpoint_dir`` is given, then replay; with ``replay=True`` they replay
    from n = 1; otherwise ``NotSeekable`` is raised.
    """
    state = make_state(spec, base, **options)
    if n0 == 1:
        return state
    if state.seekable:
        state.seek(n0)
        return state
    if checkpoint_dir is not None:
        from .checkpoint import latest_checkpoint

        found = latest_checkpoint(checkpoint_dir, spec, base, n0)
        if found is not None:
            found.restore_into(state)
            _replay(state, n0)
            return state
    if not replay:
        raise NotSeekable(f"{S.render(spec)} is replay-only; provide a checkpoint or allow replay")
    _replay(state, n0)
    return state


def _replay(state: GeneratorState, n0: int) -> None:
    while state.index < n0:
        state.next_block(min(DEFAULT_BLOCK, n0 - state.index))


def frac_blocks(spec, base: int, n0: int, n1: int, block: int = DEFAULT_BLOCK, state=None, **options):
    """Yield ``FracBlock`` objects covering indices ``[n0, n1)``."""
    if n0 < 1 or n1 < n0:
        raise InvalidInput("range must satisfy 1 <= n0 <= n1")
    if state is None:
        state = seek_seed(spec, base, n0, replay=True, **options)
    while state.index < n1:
        yield state.next_block(min(block, n1 - state.index))


def frac_stream(spec, base: int, n0: int, n1: int, **options):
    """Yield ``(n, FracValue)`` for ``n`` in ``[n0, n1)``."""
    for blk in frac_blocks(spec, base, n0, n1, **options):
        hi = blk.hi.tolist()
        lo = blk.lo.tolist()
        for i in range(len(blk)):
            yield blk.n0 + i, FracValue.from_words(hi[i], lo[i])


def frac_array(spec, base: int, n0: int, n1: int, **options) -> tuple[np.ndarray, int]:
    """All 192-bit words for ``[n0, n1)`` as one array, with the worst error."""
    parts, worst = [], 0
    for blk in frac_blocks(spec, base, n0, n1, **options):
        parts.append(blk.words)
        worst = max(worst, blk.err)
    words = np.concatenate(parts) if parts else kernels.wide(0)
    return words, worst


def iterated_lift(inner, h: int):
    """Prefix-sum a stream of ``FracValue`` ``h - 1`` times, mod 1.

    ``inner`` must start at n = 1.  Accepts either ``FracValue`` items or
    ``(n, FracValue)`` pairs and yields the same shape.
    """
    if not isinstance(h, int) or h < 1:
        raise InvalidInput("h must be an integer >= 1")
    accs = [0] * (h - 1)
    mask = (1 << 128) - 1
    for item in inner:
        pair = isinstance(item, tuple)
        x = (item[1] if pair else item).raw
        for level in range(h - 1):
            accs[level] = (accs[level] + x) & mask
            x = accs[level]
        out = FracValue(x)
        yield (item[0], out) if pair else out


def frac_at(spec, base: int, n: int, **options) -> FracValue:
    state = seek_seed(spec, base, n, replay=True, **options)
    return state.next_block(1).frac(0)


__all__ = [
    "FracBlock", "GeneratorState", "make_state", "seek_seed", "frac_blocks", "frac_stream",
    "frac_array", "iterated_lift", "frac_at", "is_seekable",
]
