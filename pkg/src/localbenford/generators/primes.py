"""Prime sieves: smallest-prime-factor tables and a segmented nth-prime stream."""

from __future__ import annotations

import math
import threading

import numpy as np


def simple_sieve(limit: int) -> np.ndarray:
    """All primes <= limit."""
    if limit < 2:
        return np.array([], dtype=np.int64)
    is_prime = np.ones(limit + 1, dtype=bool)
    is_prime[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if is_prime[p]:
            is_prime[p * p:: p] = False
    return np.flatnonzero(is_prime).astype(np.int64)


class FactorTable:
    """Smallest-prime-factor index for every m <= limit.

    ``spf_idx[m]`` is the position of the smallest prime factor of ``m`` in
    ``primes``; entries 0 and 1 are unused.
    """

    def __init__(self, limit: int):
        limit = max(int(limit), 2)
        self.limit = limit
        spf = np.zeros(limit + 1, dtype=np.int64)
        for p in range(2, math.isqrt(limit) + 1):
            if spf[p] == 0:
                block = spf[p * p:: p]
                block[block == 0] = p
        rest = np.flatnonzero(spf == 0)
        rest = rest[rest >= 2]
        spf[rest] = rest
        self.primes = rest.astype(np.int64)
        idx = np.zeros(limit + 1, dtype=np.int32)
        idx[2:] = np.searchsorted(self.primes, spf[2:]).astype(np.int32)
        self.spf_idx = idx

    def factorize(self, m: int) -> list[int]:
        out = []
        while m > 1:
            p = int(self.primes[self.spf_idx[m]])
            out.append(p)
            m //= p
        return out


_table_lock = threading.Lock()
_factor_table: FactorTable | None = None


def factor_table(limit: int) -> FactorTable:
    """Shared table covering at least ``limit``, grown by doubling."""
    global _factor_table
    with _table_lock:
        if _factor_table is None or _factor_table.limit < limit:
            size = max(limit, 2 * (_factor_table.limit if _factor_table else 0), 1 << 16)
            _factor_table = FactorTable(size)
        return _factor_table


def nth_prime_upper_bound(n: int) -> int:
    if n < 6:
        return 13
    ln = math.log(n)
    return int(n * (ln + math.log(ln))) + 3


def segmented_primes(start: int, segment: int = 1 << 18):
    """Yield arrays of consecutive primes >= start, one segment at a time."""
    lo = max(2, int(start))
    base_limit = 1 << 16
    base = simple_sieve(base_limit)
    while True:
        hi = lo + segment
        if base_limit * base_limit < hi:
            base_limit = math.isqrt(hi) * 2
            base = simple_sieve(base_limit)
        mask = np.ones(hi - lo, dtype=bool)
        for p in base:
            p = int(p)
            if p * p >= hi:
                break
            first = max(p * p, ((lo + p - 1) // p) * p)
            mask[first - lo:: p] = False
        found = np.flatnonzero(mask) + lo
        if found.size:
            yield found.astype(np.int64)
        lo = hi


def nth_primes(n0: int, count: int) -> np.ndarray:
    """p_{n0}, ..., p_{n0+count-1} (1-based: p_1 = 2)."""
    limit = nth_prime_upper_bound(n0 + count)
    primes = simple_sieve(limit)
    return primes[n0 - 1:n0 - 1 + count]
