"""Finite-N estimate of the maximal local Benford order.

Level k passes when every k-tuple cell frequency lies within ``sigmas``
standard deviations of the Benford product law and the Weyl average of the
window sum with weights ``killer_vector(k - 1)`` (the (k-1)-th difference)
does not show a concentrated phase.  A concentrated phase means the k
consecutive fractional parts are confined to a lower-dimensional set, so
level k cannot hold.  The killer probe needs no cell counts, which lets it
settle levels whose tuple test would be under-populated.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

from ..errors import InsufficientN, InvalidInput
from ..fixed_frac import log_const
from ..generators import specs as S
from .counting import _as_spec, count_tuples
from .digits import benford_probs
from .report import MIN_EXPECTED, deviation_report
from .weyl import killer_vector, weyl_average

PASS, FAIL, SKIP, UNDECIDED = "PASS", "FAIL", "SKIP", "UNDECIDED"


@dataclass(frozen=True)
class OrderPolicy:
    sigmas: float = 4.0             # per-cell deviation threshold in standard deviations
    min_expected: float = MIN_EXPECTED
    killer: bool = True             # run the difference-vector Weyl probe
    killer_floor: float = 0.05      # magnitudes above max(floor, killer_sigmas / sqrt(N)) are concentrated
    killer_sigmas: float = 8.0

    def killer_threshold(self, N: int) -> float:
        return max(self.killer_floor, self.killer_sigmas / math.sqrt(N))


@dataclass(frozen=True)
class LevelEvidence:
    k: int
    verdict: str
    feasible: bool
    statistic: float | None          # max |dev| / sigma over cells
    threshold: float
    linf: float | None
    chi_square: float | None
    chi_df: int | None
    killer_t: tuple | None
    killer_magnitude: float | None
    killer_threshold: float | None


@dataclass(frozen=True)
class OrderReport:
    spec: str
    base: int
    N: int
    k_max: int
    order: int
    at_least: bool                  # every tested level passed or the next was undecided
    levels: tuple
    policy: OrderPolicy
    expected_order: float | None = None
    notes: tuple = field(default=())

    @property
    def estimated_order(self):
        return f"≥ {self.order}" if self.at_least else self.order

    @property
    def consistent(self) -> bool | None:
        """Agreement with the known order of the family, when there is one."""
        if self.expected_order is None:
            return None
        if self.at_least:
            return self.expected_order >= self.order
        return self.expected_order == self.order

    def summary(self) -> dict:
        return {"spec": self.spec, "base": self.base, "N": self.N, "k_max": self.k_max,
                "estimated_order": self.estimated_order, "expected_order": self.expected_order,
                "consistent": self.consistent, "policy": asdict(self.policy), "notes": list(self.notes)}


def _is_rational_log(a, base: int) -> bool:
    return log_const(a, base, 64).err == 0


def expected_order(spec, base: int = 10):
    """Known maximal order of a family: an int, ``math.inf``, or None when unknown."""
    spec = _as_spec(spec)
    poly = S.as_polyexp(spec)
    if poly is not None:
        if poly.degree == 0 or _is_rational_log(poly.a, base):
            return None
        return poly.degree
    if isinstance(spec, S.Geometric):
        return None if _is_rational_log(spec.a, base) else 1
    if isinstance(spec, (S.Factorial, S.NPowerN, S.Partition)):
        return 1
    if isinstance(spec, (S.FibonacciExp, S.DoublyExp)):
        return math.inf
    if isinstance(spec, S.PrimeExp):
        return None if spec.mersenne else math.inf
    if isinstance(spec, S.IteratedProduct):
        inner = expected_order(spec.inner, base)
        return None if inner is None or inner == math.inf else inner + spec.h - 1
    return None


def min_cell_prob(base: int, k: int) -> float:
    return float(benford_probs(base)[-1]) ** k


def feasible(N: int, base: int, k: int, min_expected: float = MIN_EXPECTED) -> bool:
    return N * min_cell_prob(base, k) >= min_expected


def max_feasible_k(N: int, base: int, min_expected: float = MIN_EXPECTED) -> int:
    k = 0
    while feasible(N, base, k + 1, min_expected):
        k += 1
    return k


def _killer_t(k: int) -> tuple:
    return (1,) if k == 1 else killer_vector(k - 1)


def estimate_max_order(spec, base: int = 10, N: int = 10**6, k_max: int = 3,
                       policy: OrderPolicy | None = None, workers: int = 1,
                       checkpoint_dir=None, **options) -> OrderReport:
    """Largest k such that levels 1..k all pass; see the module notes for the tests."""
    policy = policy or OrderPolicy()
    spec = _as_spec(spec)
    if not isinstance(N, int) or N < 1:
        raise InvalidInput("N must be a positive integer")
    if not isinstance(k_max, int) or k_max < 1:
        raise InvalidInput("k_max must be a positive integer")
    if not feasible(N, base, 1, policy.min_expected):
        raise InsufficientN(f"N = {N} leaves base-{base} digit cells below {policy.min_expected} expected counts")
    kill_thr = policy.killer_threshold(N)
    levels, notes = [], []
    order, at_least, stopped = 0, False, False
    # with the probe on, one level beyond k_max is checked by the probe alone
    last = k_max + 1 if policy.killer else k_max
    for k in range(1, last + 1):
        probe_only = k > k_max
        if stopped:
            if not probe_only:
                levels.append(LevelEvidence(k, SKIP, False, None, policy.sigmas, None, None, None,
                                            None, None, None))
            continue
        ok_cells = feasible(N, base, k, policy.min_expected) and not probe_only
        mag = t = None
        if policy.killer:
            t = _killer_t(k)
            mag = weyl_average(spec, base, t, N, workers, checkpoint_dir, **options)
        concentrated = mag is not None and mag > kill_thr
        stat = linf = chi = df = None
        if ok_cells:
            rep = deviation_report(count_tuples(spec, base, k, N, workers, checkpoint_dir, **options))
            stat, linf, chi, df = rep.max_z, rep.linf, rep.chi_square, rep.chi_df
            verdict = PASS if stat <= policy.sigmas and not concentrated else FAIL
        elif concentrated:
            verdict = FAIL
        else:
            verdict = UNDECIDED
        if probe_only and verdict == UNDECIDED:
            at_least = True
            stopped = True
            continue
        levels.append(LevelEvidence(k, verdict, ok_cells, stat, policy.sigmas, linf, chi, df,
                                    t, mag, kill_thr if policy.killer else None))
        if verdict == PASS:
            order = k
            if k == k_max and not policy.killer:
                at_least = True
        else:
            if verdict == UNDECIDED:
                at_least = True
                notes.append(f"level {k}: cells under-populated and the difference probe is not concentrated")
            stopped = True
    if not policy.killer and order == k_max:
        at_least = True
    return OrderReport(S.render(spec), base, N, k_max, order, at_least, tuple(levels), policy,
                       expected_order(spec, base), tuple(notes))
