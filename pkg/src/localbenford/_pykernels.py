"""Pure-Python twins of the compiled kernels in ``_ckernels.pyx``.

Same signatures, same in-place conventions, bit-identical results.  The
192-bit registers become Python ints inside each loop.
"""

import numpy as np

NAME = "python"

_M64 = (1 << 64) - 1
_M192 = (1 << 192) - 1


def _rows_to_ints(arr):
    return [(a << 128) | (b << 64) | c for a, b, c in arr.tolist()]


def _ints_to_rows(vals, out):
    n = len(vals)
    out[:, 0] = np.fromiter((v >> 128 for v in vals), dtype=np.uint64, count=n)
    out[:, 1] = np.fromiter(((v >> 64) & _M64 for v in vals), dtype=np.uint64, count=n)
    out[:, 2] = np.fromiter((v & _M64 for v in vals), dtype=np.uint64, count=n)


def polyexp_fill(regs, out):
    r = _rows_to_ints(regs)
    d = len(r) - 1
    n = out.shape[0]
    vals = [0] * n
    if d == 0:
        vals = [r[0]] * n
    elif d == 1:
        r0, r1 = r
        for i in range(n):
            vals[i] = r0
            r0 = (r0 + r1) & _M192
        r = [r0, r1]
    elif d == 2:
        r0, r1, r2 = r
        for i in range(n):
            vals[i] = r0
            r0 = (r0 + r1) & _M192
            r1 = (r1 + r2) & _M192
        r = [r0, r1, r2]
    else:
        steps = range(d)
        for i in range(n):
            vals[i] = r[0]
            for j in steps:
                r[j] = (r[j] + r[j + 1]) & _M192
    if n:
        _ints_to_rows(vals, out)
    _ints_to_rows(r, regs)


def prefix_sum_fill(values, acc):
    a = (int(acc[0]) << 128) | (int(acc[1]) << 64) | int(acc[2])
    vals = _rows_to_ints(values)
    for i, v in enumerate(vals):
        a = (a + v) & _M192
        vals[i] = a
    if vals:
        _ints_to_rows(vals, values)
    acc[0], acc[1], acc[2] = a >> 128, (a >> 64) & _M64, a & _M64


def factor_log_fill(m0, out, spf_idx, primes, plog):
    n = out.shape[0]
    logs = _rows_to_ints(plog)
    prime_list = primes.tolist()
    idx_table = spf_idx
    vals = [0] * n
    hi = int(m0) + n
    idx_slice = idx_table[:hi].tolist()
    for j in range(n):
        m = m0 + j
        acc = 0
        while m > 1:
            idx = idx_slice[m] if m < hi else int(idx_table[m])
            acc += logs[idx]
            m //= prime_list[idx]
        vals[j] = acc & _M192
    if n:
        _ints_to_rows(vals, out)


def scale_fill(values, mult):
    vals = _rows_to_ints(values)
    for i, m in enumerate(mult.tolist()):
        vals[i] = (vals[i] * m) & _M192
    if vals:
        _ints_to_rows(vals, values)


def window_residues(hi, lo, t, out_hi, out_lo):
    """Exact ``sum_i t_i x_{n+i} mod 1`` at 128 bits, vectorised by limbs."""
    n = out_hi.shape[0]
    k = t.shape[0]
    if hi.shape[0] < n + k - 1:
        raise ValueError("window input shorter than n + k - 1")
    s_hi = np.zeros(n, dtype=np.uint64)
    s_mid = np.zeros(n, dtype=np.int64)
    s_low = np.zeros(n, dtype=np.int64)
    lo_low = (lo & np.uint64(0xFFFFFFFF)).astype(np.int64)
    lo_mid = (lo >> np.uint64(32)).astype(np.int64)
    with np.errstate(over="ignore"):
        for i, ti in enumerate(t.tolist()):
            if ti == 0:
                continue
            s_hi += hi[i:i + n] * np.uint64(ti & _M64)
            s_mid += lo_mid[i:i + n] * ti
            s_low += lo_low[i:i + n] * ti
        # carry propagation; arithmetic shifts floor toward -inf as required
        s_mid += s_low >> 32
        low32 = (s_low & 0xFFFFFFFF).astype(np.uint64)
        carry = s_mid >> 32
        mid32 = (s_mid & 0xFFFFFFFF).astype(np.uint64)
        s_hi += carry.astype(np.uint64)
    out_hi[:] = s_hi
    out_lo[:] = (mid32 << np.uint64(32)) | low32
