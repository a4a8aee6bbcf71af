"""Iterated forward differences and numerical class estimates C_{k,0}, C_{k,alpha}, C_{k,1}.

An evaluator is any callable ``f(n, bits) -> FixedReal`` returning a
certified value of ``f(n)`` with absolute error at most a few units of
``2**-bits``; ``real_evaluator`` and ``expr_evaluator`` build them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb

import numpy as np

from .errors import CancellationOverflow, InvalidInput
from .expr import Expr, parse_expr
from .fixed_frac import FixedReal
from .generators import specs as S
from .generators.evaluators import real_evaluator

MAX_K = 12
MAX_CLASS_K = 8
GUARD_BITS = 64
DEFAULT_BITS = 128
MAX_BITS = 1 << 14
DEFAULT_TOL = 1e-4
BOUNDARY_MARGIN = 0.01  # alpha this close to 0 or 1 is left undecided


def expr_evaluator(expr):
    """Evaluator for ``f(n)`` given as an expression in ``n``."""
    e = expr if isinstance(expr, Expr) else parse_expr(expr)

    def evaluate(n: int, bits: int = 192) -> FixedReal:
        return e.fixed(n, bits)

    evaluate.expr = e
    return evaluate


def sequence_evaluator(source, base: int = 10):
    """Evaluator from a sequence spec (``log_base a_n``) or a log expression."""
    if isinstance(source, str):
        try:
            return real_evaluator(S.parse(source), base)
        except InvalidInput:
            return expr_evaluator(source)
    if isinstance(source, Expr):
        return expr_evaluator(source)
    if callable(source):
        return source
    return real_evaluator(source, base)


def _difference_at(evaluate, k: int, n: int, wp: int) -> FixedReal:
    acc = FixedReal(0, wp, 0)
    for i in range(k + 1):
        w = (-1) ** (k - i) * comb(k, i)
        acc = acc + evaluate(n + i, wp).with_bits(wp).scale(w)
    return acc


def forward_difference(evaluate, k: int, n: int, bits: int = DEFAULT_BITS,
                       max_bits: int = MAX_BITS) -> FixedReal:
    """``Delta^k f(n) = sum_i (-1)^(k-i) C(k, i) f(n + i)`` with relative error below ``2**-bits``.

    Working precision grows with the cancellation observed; an exact zero is
    returned as such.  ``CancellationOverflow`` is raised when ``max_bits``
    cannot resolve the value to the requested relative accuracy.
    """
    if not isinstance(k, int) or not 0 <= k <= MAX_K:
        raise InvalidInput(f"difference order must be in 0..{MAX_K}")
    if not isinstance(n, int) or n < 1:
        raise InvalidInput("index must be a positive integer")
    wp = bits + GUARD_BITS + (2 ** k).bit_length()
    while True:
        d = _difference_at(evaluate, k, n, wp)
        if d.err == 0 or abs(d.raw) >= d.err << bits:
            return d
        # bits of the result still below the error: raise precision by the shortfall
        short = bits + d.err.bit_length() - max(abs(d.raw).bit_length(), 1) + 16
        wp += max(short, GUARD_BITS)
        if wp > max_bits:
            raise CancellationOverflow(
                f"Delta^{k} f({n}) not resolved to 2^-{bits} relative within {max_bits} working bits")


def difference_evaluator(evaluate, m: int = 1):
    """Evaluator of ``Delta^m f`` with the absolute accuracy of ``f``."""
    if not isinstance(m, int) or not 1 <= m <= MAX_K:
        raise InvalidInput(f"difference order must be in 1..{MAX_K}")
    extra = (2 ** m).bit_length() + 2

    def evaluate_diff(n: int, bits: int = 192) -> FixedReal:
        return _difference_at(evaluate, m, n, bits + extra)

    return evaluate_diff


def default_grid(lo: float = 1e2, hi: float = 1e7) -> tuple:
    """``ceil(10^(j/4))`` over ``[lo, hi]``, deduplicated and increasing."""
    j0 = math.ceil(4 * math.log10(lo) - 1e-9)
    j1 = math.floor(4 * math.log10(hi) + 1e-9)
    return tuple(sorted({math.ceil(10 ** (j / 4) - 1e-9) for j in range(j0, j1 + 1)}))


@dataclass(frozen=True)
class ClassEstimate:
    k: int | None
    kind: str                           # "C_k0", "C_k_alpha", "C_k1" or "inconclusive"
    alpha: float | None = None
    alpha_fraction: Fraction | None = None
    limit_constant: float | None = None  # theta for C_k0, lambda otherwise
    limit_fixed: FixedReal | None = None
    irrationality_caveat: bool = False
    diagnostics: dict = field(default_factory=dict)

    @property
    def label(self) -> str:
        if self.kind == "inconclusive":
            return "inconclusive"
        if self.kind == "C_k0":
            return f"C_{{{self.k},0}}"
        if self.kind == "C_k1":
            return f"C_{{{self.k},1}}"
        a = self.alpha_fraction
        if a is not None:
            return f"C_{{{self.k},{a.numerator}/{a.denominator}}}"
        return f"C_{{{self.k},{self.alpha:.6g}}}"

    @property
    def alpha_decimal(self) -> str | None:
        if self.alpha is None:
            return None
        return f"{float(self.alpha_fraction or self.alpha):g}"


def _converged(vals, tol: float) -> bool:
    """Last three values agree to ``tol`` and earlier residuals shrink toward the last."""
    if len(vals) < 3:
        return False
    ref = vals[-1]
    if ref == 0 or not math.isfinite(ref):
        return False
    if any(abs(v - ref) > tol * abs(ref) for v in vals[-3:]):
        return False
    resid = [abs(v - ref) for v in vals[-6:-1]]
    slack = 1e-12 * abs(ref)
    return all(b <= a + slack for a, b in zip(resid, resid[1:]))


def _snap(alpha: float, tol: float) -> Fraction | None:
    q = Fraction(alpha).limit_denominator(12)
    return q if 0 < q < 1 and abs(float(q) - alpha) <= tol else None


class _Table:
    """Cached ``Delta^k f(n)`` over the grid as floats and exact values."""

    def __init__(self, evaluate, grid, bits):
        self.evaluate = evaluate
        self.grid = grid
        self.bits = bits
        self._cache = {}
        self.unresolved = []

    def fixed(self, k, n):
        key = (k, n)
        if key not in self._cache:
            self._cache[key] = forward_difference(self.evaluate, k, n, self.bits)
        return self._cache[key]

    def values(self, k):
        out = []
        for n in self.grid:
            try:
                out.append(float(self.fixed(k, n)))
            except CancellationOverflow:
                # indistinguishable from zero at the working-precision ceiling
                self.unresolved.append((k, n))
                out.append(0.0)
        return out


def classify(evaluate, k_max: int = 4, grid=None, tol: float = DEFAULT_TOL,
             bits: int = DEFAULT_BITS) -> ClassEstimate:
    """Smallest k and class among C_{k,0}, C_{k,alpha}, C_{k,1} whose limit is observed on ``grid``.

    For each k from 0 upward: ``Delta^k f`` tending to a nonzero constant gives
    C_{k,0}; ``n^alpha Delta^k f`` stabilising for some alpha in (0, 1) gives
    C_{k,alpha}; ``n Delta^{k+1} f`` tending to a nonzero constant gives
    C_{k,1}.  Nothing converging up to ``k_max`` is reported as inconclusive.
    """
    if not isinstance(k_max, int) or not 0 <= k_max <= MAX_CLASS_K:
        raise InvalidInput(f"k_max must be in 0..{MAX_CLASS_K}")
    grid = tuple(grid) if grid is not None else default_grid()
    if len(grid) < 3 or any(not isinstance(n, int) or n < 1 for n in grid) or list(grid) != sorted(set(grid)):
        raise InvalidInput("grid must be at least three increasing positive integers")
    if grid[-1] < 100 * grid[0]:
        raise InvalidInput("grid must span at least two decades")
    table = _Table(evaluate, grid, bits)
    logn = np.log(np.array(grid, dtype=float))
    trace = {}
    diag = {"grid": list(grid), "tol": tol, "trajectories": trace}
    for k in range(k_max + 1):
        vk = table.values(k)
        trace[f"D{k}"] = vk
        # (a) Delta^k f -> nonzero constant
        if _converged(vk, tol):
            return ClassEstimate(k, "C_k0", limit_constant=vk[-1], limit_fixed=table.fixed(k, grid[-1]),
                                 irrationality_caveat=True, diagnostics=diag)
        # (b) |Delta^k f| ~ lambda n^-alpha
        if all(v != 0 for v in vk) and len(set(np.sign(vk[-4:]))) == 1:
            logv = np.log(np.abs(vk))
            slope = float(np.polyfit(logn, logv, 1)[0])
            local = [-(logv[j + 1] - logv[j]) / (logn[j + 1] - logn[j]) for j in range(len(grid) - 1)]
            trace[f"alpha{k}"] = local
            diag[f"slope{k}"] = slope
            alpha = local[-1]
            boundary = min(alpha, 1 - alpha) < BOUNDARY_MARGIN
            if boundary:
                diag.setdefault("boundary", []).append(k)
            if -1 < slope < 0 and not boundary and 0 < alpha < 1 and _converged(local, max(tol, 1e-3)):
                snapped = _snap(alpha, 10 * tol)
                a = float(snapped) if snapped is not None else alpha
                lam = [v * n ** a for v, n in zip(vk, grid)]
                trace[f"lambda{k}"] = lam
                if _converged(lam, max(tol, 1e-3)):
                    return ClassEstimate(k, "C_k_alpha", alpha=a, alpha_fraction=snapped,
                                         limit_constant=lam[-1], diagnostics=diag)
        # (c) n Delta^{k+1} f -> nonzero constant
        if k + 1 <= MAX_K:
            w = [n * v for n, v in zip(grid, table.values(k + 1))]
            trace[f"nD{k + 1}"] = w
            if _converged(w, tol):
                return ClassEstimate(k, "C_k1", limit_constant=w[-1], diagnostics=diag)
    diag["unresolved"] = table.unresolved
    return ClassEstimate(None, "inconclusive", diagnostics=diag)


__all__ = [
    "ClassEstimate", "classify", "default_grid", "difference_evaluator", "expr_evaluator",
    "forward_difference", "sequence_evaluator",
]
