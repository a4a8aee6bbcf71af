"""Backend selection for the hot loops.

The compiled extension is used when it imports; otherwise the pure-Python
twin.  ``LOCALBENFORD_BACKEND=python`` forces the fallback and
``LOCALBENFORD_BACKEND=cython`` makes a missing extension an error.
"""

import os
from contextlib import contextmanager

import numpy as np

from . import _pykernels

_forced = os.environ.get("LOCALBENFORD_BACKEND", "").strip().lower()

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None
    if _forced == "cython":
        raise

_BACKENDS = {"python": _pykernels}
if _ckernels is not None:
    _BACKENDS["cython"] = _ckernels

_impl = _pykernels if (_forced == "python" or _ckernels is None) else _ckernels


def backend() -> str:
    return _impl.NAME


def available() -> list[str]:
    return sorted(_BACKENDS)


def set_backend(name: str) -> None:
    global _impl
    try:
        _impl = _BACKENDS[name]
    except KeyError:
        raise ValueError(f"backend {name!r} not available; have {available()}") from None


@contextmanager
def using(name: str):
    previous = _impl.NAME
    set_backend(name)
    try:
        yield
    finally:
        set_backend(previous)


def wide(n: int) -> np.ndarray:
    return np.zeros((n, 3), dtype=np.uint64)


def polyexp_fill(regs: np.ndarray, out: np.ndarray) -> None:
    """Emit register 0 for ``len(out)`` indices, stepping the difference table."""
    _impl.polyexp_fill(regs, out)


def prefix_sum_fill(values: np.ndarray, acc: np.ndarray) -> None:
    _impl.prefix_sum_fill(values, acc)


def factor_log_fill(m0: int, out, spf_idx, primes, plog) -> None:
    if m0 < 1 or m0 + out.shape[0] > spf_idx.shape[0]:
        raise ValueError("factor table does not cover the requested range")
    _impl.factor_log_fill(int(m0), out, spf_idx, primes, plog)


def scale_fill(values: np.ndarray, mult: np.ndarray) -> None:
    _impl.scale_fill(values, np.ascontiguousarray(mult, dtype=np.uint64))


def window_residues(hi, lo, t, n: int):
    t = np.ascontiguousarray(t, dtype=np.int64)
    if int(np.abs(t).sum()) >= 1 << 31:
        raise ValueError("weight vector too large for exact window sums")
    out_hi = np.empty(n, dtype=np.uint64)
    out_lo = np.empty(n, dtype=np.uint64)
    _impl.window_residues(np.ascontiguousarray(hi), np.ascontiguousarray(lo), t, out_hi, out_lo)
    return out_hi, out_lo
