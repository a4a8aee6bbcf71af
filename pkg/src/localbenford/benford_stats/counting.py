"""Mergeable k-tuple digit histograms and the chunked counting driver."""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidInput, ShapeMismatch
from ..fixed_frac import FracValue
from ..generators import specs as S
from ..generators.checkpoint import CheckpointWriter, checkpoint_indices
from ..generators.escalate import MAX_BITS, resolve_digit
from ..generators.evaluators import real_evaluator
from ..generators.state import make_state, seek_seed
from ..kernels import wide as kernels_wide
from .digits import digits_from_words, leading_digit

CHUNK = 1 << 18  # windows per parallel chunk, independent of the worker count
BLOCK = 1 << 16


@dataclass
class DigitTupleCounter:
    base: int
    k: int
    counts: np.ndarray = field(default=None)
    total: int = 0
    escalations: int = 0

    def __post_init__(self):
        if not isinstance(self.base, int) or self.base < 2:
            raise InvalidInput("base must be an integer >= 2")
        if not isinstance(self.k, int) or self.k < 1:
            raise InvalidInput("k must be an integer >= 1")
        cells = (self.base - 1) ** self.k
        if self.counts is None:
            self.counts = np.zeros(cells, dtype=np.int64)
        elif self.counts.shape != (cells,):
            raise ShapeMismatch(f"counts must have {cells} cells")

    @property
    def cells(self) -> int:
        return self.counts.shape[0]

    def merge(self, other: DigitTupleCounter) -> DigitTupleCounter:
        if not isinstance(other, DigitTupleCounter) or (other.base, other.k) != (self.base, self.k):
            raise ShapeMismatch("counters differ in base or k")
        return DigitTupleCounter(self.base, self.k, self.counts + other.counts,
                                 self.total + other.total, self.escalations + other.escalations)

    __add__ = merge

    def tuples(self):
        """Digit tuples in cell order."""
        return itertools.product(range(1, self.base), repeat=self.k)

    def cell(self, digits) -> int:
        idx = 0
        for d in digits:
            if not 1 <= d <= self.base - 1:
                raise InvalidInput(f"digit {d} out of range for base {self.base}")
            idx = idx * (self.base - 1) + (d - 1)
        return idx

    def count(self, digits) -> int:
        return int(self.counts[self.cell(digits)])

    def freq(self, digits) -> float:
        return self.count(digits) / self.total if self.total else 0.0

    def frequencies(self) -> np.ndarray:
        return self.counts / self.total if self.total else np.zeros(self.cells)

    def add_digits(self, digits: np.ndarray) -> None:
        """Tally every full window of a digit array."""
        n = digits.shape[0] - self.k + 1
        if n <= 0:
            return
        b1 = self.base - 1
        idx = np.zeros(n, dtype=np.int64)
        for i in range(self.k):
            idx = idx * b1 + (digits[i:i + n].astype(np.int64) - 1)
        self.counts += np.bincount(idx, minlength=self.cells)
        self.total += n

    def __eq__(self, other):
        return (isinstance(other, DigitTupleCounter) and (self.base, self.k, self.total, self.escalations)
                == (other.base, other.k, other.total, other.escalations)
                and np.array_equal(self.counts, other.counts))


class DigitSource:
    """Digits of a sequence, escalating ambiguous terms through the evaluator."""

    def __init__(self, spec, base: int, **options):
        self.spec = spec
        self.base = base
        self.max_bits = options.get("escalate_bits", MAX_BITS)
        self._evaluate = None

    def _resolve(self, digits, ambiguous, n0) -> int:
        positions = np.flatnonzero(ambiguous)
        if positions.size == 0:
            return 0
        if self._evaluate is None:
            self._evaluate = real_evaluator(self.spec, self.base)
        for pos in positions.tolist():
            digits[pos] = resolve_digit(self.spec, self.base, n0 + pos, self._evaluate,
                                        max_bits=self.max_bits)
        return int(positions.size)

    def digits(self, state, count: int):
        """Next ``count`` digits from ``state`` and the number of escalations."""
        out = np.empty(count, dtype=np.uint8)
        esc = 0
        done = 0
        while done < count:
            blk = state.next_block(min(BLOCK, count - done))
            d, amb = digits_from_words(blk.words, self.base, blk.err)
            esc += self._resolve(d, amb, blk.n0)
            out[done:done + len(blk)] = d
            done += len(blk)
        return out, esc


def leading_digits(spec, base: int, n0: int, n1: int, **options) -> np.ndarray:
    """Certified leading digits of ``a_n`` for n in ``[n0, n1)``."""
    spec = _as_spec(spec)
    src = DigitSource(spec, base, **options)
    state = seek_seed(spec, base, n0, replay=True, **options)
    digits, _ = src.digits(state, n1 - n0)
    return digits


def _as_spec(spec):
    return S.parse(spec) if isinstance(spec, str) else spec


def window_blocks(state, windows: int, k: int, block: int = BLOCK, hook=None):
    """Yield ``(n0, words, err)`` covering windows ``n0 .. n0 + m - 1``.

    ``words`` holds ``m + k - 1`` rows; consecutive blocks overlap by
    ``k - 1`` rows.  ``hook(state)`` runs after every block.
    """
    tail = kernels_wide(0)
    err = state.err
    n0 = state.index
    end = state.index + windows + k - 1
    while state.index < end:
        blk = state.next_block(min(block, end - state.index))
        err = max(err, blk.err)
        words = np.concatenate([tail, blk.words]) if len(tail) else blk.words
        m = words.shape[0] - k + 1
        if m > 0:
            yield n0, words, err
            n0 += m
            tail = words[m:]
        else:
            tail = words
        if hook is not None:
            hook(state)


def map_chunks(spec, base: int, N: int, fn, workers: int = 1, checkpoint_dir=None, **options) -> list:
    """Apply ``fn(state, windows)`` over chunks of windows 1..N, in chunk order.

    Seekable specs are cut into chunks of ``CHUNK`` windows.  Replay-only
    specs are cut at the snapshots found in ``checkpoint_dir`` (a single
    chunk when there are none).  Chunks run on up to ``workers`` threads;
    the boundaries never depend on ``workers``.
    """
    if not isinstance(workers, int) or workers < 1:
        raise InvalidInput("workers must be a positive integer")
    if make_state(spec, base, **options).seekable:
        starts = list(range(1, N + 1, CHUNK))
    else:
        found = checkpoint_indices(checkpoint_dir, spec, base) if checkpoint_dir is not None else {}
        starts = [1] + sorted(i for i in found if 1 < i <= N)
    jobs = [(s, e - s) for s, e in zip(starts, starts[1:] + [N + 1])]

    def run(job):
        return fn(seek_seed(spec, base, job[0], checkpoint_dir=checkpoint_dir, **options), job[1])

    if workers == 1 or len(jobs) <= 1:
        return [run(job) for job in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, jobs))


def count_tuples(source, base: int, k: int, N: int, workers: int = 1, checkpoint_dir=None,
                 **options) -> DigitTupleCounter:
    """Tally windows ``(d(a_n), ..., d(a_{n+k-1}))`` for n = 1..N.

    ``source`` is a sequence spec (or its text) or an iterable of
    ``FracValue`` supplying indices 1..N+k-1.  Seekable specs are split into
    fixed chunks counted on up to ``workers`` threads and merged in chunk
    order, so the result does not depend on ``workers``.
    """
    if not isinstance(N, int) or N < 0:
        raise InvalidInput("N must be a non-negative integer")
    if not isinstance(k, int) or k < 1:
        raise InvalidInput("k must be an integer >= 1")
    if not isinstance(source, (str, *S._SPEC_TYPES)):
        return _count_values(source, base, k, N)
    spec = _as_spec(source)
    counter = DigitTupleCounter(base, k)
    if N == 0:
        return counter
    writer = CheckpointWriter(checkpoint_dir)

    def count(state, windows):
        src = DigitSource(spec, base, **options)
        part = DigitTupleCounter(base, k)
        tail = np.zeros(0, dtype=np.uint8)
        need = windows + k - 1
        done = 0
        while done < need:
            digits, esc = src.digits(state, min(BLOCK, need - done))
            done += digits.shape[0]
            buf = np.concatenate([tail, digits])
            part.add_digits(buf)
            part.escalations += esc
            tail = buf[buf.shape[0] - (k - 1):] if k > 1 else buf[:0]
            if not state.seekable:
                writer(state)
        return part

    for part in map_chunks(spec, base, N, count, workers, checkpoint_dir, **options):
        counter = counter.merge(part)
    return counter


def _count_values(values, base, k, N):
    counter = DigitTupleCounter(base, k)
    digits = []
    for item in values:
        x = item[1] if isinstance(item, tuple) else item
        if not isinstance(x, FracValue):
            raise InvalidInput("stream items must be FracValue or (n, FracValue)")
        digits.append(leading_digit(x, base))
        if len(digits) == N + k - 1:
            break
    if len(digits) < N + k - 1:
        raise InvalidInput(f"stream ended after {len(digits)} terms; need {N + k - 1}")
    counter.add_digits(np.array(digits, dtype=np.uint8))
    return counter
