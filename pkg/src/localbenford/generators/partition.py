"""Exact partition numbers via Euler's pentagonal-number recurrence."""

from __future__ import annotations

import threading

from ..errors import ExceedsMaximum, InvalidInput

DEFAULT_MAX = 10**5

_values = [1]
_lock = threading.Lock()


def _pentagonal_offsets(n: int):
    plus, minus = [], []
    k = 1
    while True:
        g1 = k * (3 * k - 1) // 2
        if g1 > n:
            break
        bucket = plus if k % 2 else minus
        bucket.append(g1)
        g2 = k * (3 * k + 1) // 2
        if g2 <= n:
            bucket.append(g2)
        k += 1
    return sorted(plus), sorted(minus)


def _extend(n: int) -> None:
    p = _values
    start = len(p)
    if start > n:
        return
    plus, minus = _pentagonal_offsets(n)
    p.extend([0] * (n + 1 - start))
    for m in range(start, n + 1):
        s = 0
        for g in plus:
            if g > m:
                break
            s += p[m - g]
        for g in minus:
            if g > m:
                break
            s -= p[m - g]
        p[m] = s


def partitions_upto(n: int, max_n: int = DEFAULT_MAX) -> list[int]:
    """``[p(0), ..., p(n)]``; the list is a shared memo, do not mutate it."""
    if n < 0:
        raise InvalidInput("partition index must be >= 0")
    if n > max_n:
        raise ExceedsMaximum(f"p({n}) exceeds the configured exact maximum {max_n}")
    with _lock:
        _extend(n)
    return _values


def partition_exact(n: int, max_n: int = DEFAULT_MAX) -> int:
    return partitions_upto(n, max_n)[n]
