"""Fractional parts of log_b p for all primes p up to a limit.

Natural logs are chained upward, ``ln p = ln(p - 1) + 2 atanh(1/(2p - 1))``,
with ``ln(p - 1)`` assembled from already-known smaller primes.  Each entry
is stored as a 192-bit residue; ``entry_err`` bounds the error of every
entry in units of 2**-192.
"""

from __future__ import annotations

import threading

import numpy as np

from .. import _pykernels
from ..fixed_frac import _atanh_ratio, _ceil_div, inv_ln
from .primes import factor_table

WIDE_BITS = 192
_WP = 256
_M192 = (1 << WIDE_BITS) - 1


class PrimeLogTable:
    def __init__(self, base: int):
        self.base = base
        self.limit = 1
        self._ln: list[int] = []
        self._ln_err: list[int] = []
        self._frac: list[int] = []
        self.entry_err = 0
        inv = inv_ln(base, _WP)
        self._inv_raw, self._inv_err = inv.raw, inv.err
        self.plog = np.zeros((0, 3), dtype=np.uint64)
        self.table = None

    def ensure(self, limit: int) -> None:
        if limit <= self.limit:
            return
        ft = factor_table(limit)
        primes = ft.primes
        spf_idx = ft.spf_idx
        stop = int(np.searchsorted(primes, ft.limit, side="right"))
        ln, ln_err, frac = self._ln, self._ln_err, self._frac
        prime_list = primes[:stop].tolist()
        shift = _WP - WIDE_BITS
        worst = self.entry_err
        for i in range(len(ln), stop):
            p = prime_list[i]
            m = p - 1
            s = e = 0
            while m > 1:
                idx = int(spf_idx[m])
                s += ln[idx]
                e += ln_err[idx]
                m //= prime_list[idx]
            a, ea = _atanh_ratio(1, 2 * p - 1, _WP)
            raw = s + 2 * a
            err = e + 2 * ea
            ln.append(raw)
            ln_err.append(err)
            prod = raw * self._inv_raw
            lb = prod >> _WP
            lb_err = _ceil_div(raw * self._inv_err + self._inv_raw * err + err * self._inv_err, 1 << _WP) + 1
            frac.append((lb >> shift) & _M192)
            worst = max(worst, _ceil_div(lb_err, 1 << shift) + 1)
        self.entry_err = worst
        plog = np.zeros((len(frac), 3), dtype=np.uint64)
        if frac:
            _pykernels._ints_to_rows(frac, plog)
        self.plog = plog
        self.table = ft
        self.limit = ft.limit

    def log_frac_int(self, m: int) -> int:
        """192-bit residue of log_b m (sum of prime entries)."""
        self.ensure(m)
        acc = 0
        ft = self.table
        while m > 1:
            idx = int(ft.spf_idx[m])
            acc += self._frac[idx]
            m //= int(ft.primes[idx])
        return acc & _M192


_tables: dict[int, PrimeLogTable] = {}
_lock = threading.Lock()


def prime_log_table(base: int, limit: int) -> PrimeLogTable:
    with _lock:
        table = _tables.get(base)
        if table is None:
            table = _tables[base] = PrimeLogTable(base)
        table.ensure(limit)
        return table
