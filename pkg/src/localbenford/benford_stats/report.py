"""Deviation reports against the Benford product law and their CSV/JSON forms."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from ..errors import InvalidInput
from .counting import DigitTupleCounter
from .digits import benford_probs

SCHEMA_VERSION = 1
MIN_EXPECTED = 50

TUPLE_COLUMNS = ("tuple", "observed", "expected", "deviation")
WEYL_COLUMNS = ("t", "N", "magnitude")
ORDER_COLUMNS = ("k", "statistic", "threshold", "verdict")


def product_expectations(base: int, k: int) -> np.ndarray:
    """``prod_i P_b(d_i)`` in counter cell order."""
    p = benford_probs(base)
    out = np.ones(1)
    for _ in range(k):
        out = np.outer(out, p).ravel()
    return out


def format_tuple(digits) -> str:
    return "(" + ",".join(str(d) for d in digits) + ")"


@dataclass(frozen=True)
class TupleRow:
    tuple: tuple
    observed: float
    expected: float
    deviation: float
    count: int
    flagged: bool          # expected count below the chi-square floor


@dataclass(frozen=True)
class DeviationReport:
    base: int
    k: int
    N: int
    rows: tuple
    linf: float            # max |observed - expected| over cells
    max_z: float           # max |observed - expected| / sigma_cell
    chi_square: float      # over cells with expected count >= MIN_EXPECTED
    chi_df: int
    flagged: int           # cells left out of the chi-square sum

    def row(self, digits) -> TupleRow:
        for r in self.rows:
            if r.tuple == tuple(digits):
                return r
        raise InvalidInput(f"no cell {digits!r}")


def deviation_report(counter: DigitTupleCounter, base: int | None = None) -> DeviationReport:
    """Per-cell observed and expected frequencies with L-infinity and chi-square summaries."""
    if base is not None and base != counter.base:
        raise InvalidInput("base does not match the counter")
    if counter.total <= 0:
        raise InvalidInput("deviation report needs a non-empty counter")
    n = counter.total
    expected = product_expectations(counter.base, counter.k)
    observed = counter.counts / n
    dev = observed - expected
    sigma = np.sqrt(expected * (1.0 - expected) / n)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(sigma > 0, np.abs(dev) / sigma, 0.0)
    exp_counts = expected * n
    ok = exp_counts >= MIN_EXPECTED
    chi = math.fsum(((counter.counts[ok] - exp_counts[ok]) ** 2 / exp_counts[ok]).tolist())
    rows = tuple(
        TupleRow(t, float(o), float(e), float(d), int(c), not bool(f))
        for t, o, e, d, c, f in zip(counter.tuples(), observed, expected, dev, counter.counts, ok)
    )
    return DeviationReport(counter.base, counter.k, n, rows, float(np.abs(dev).max()), float(z.max()),
                           chi, max(int(ok.sum()) - 1, 0), int((~ok).sum()))


def _csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _num(x) -> str:
    return repr(float(x))


def tuples_csv(report: DeviationReport) -> str:
    return _csv(TUPLE_COLUMNS, [(format_tuple(r.tuple), _num(r.observed), _num(r.expected), _num(r.deviation))
                                for r in report.rows])


def tuples_json(report: DeviationReport, **meta) -> str:
    doc = {
        "schema": "tuples", "schema_version": SCHEMA_VERSION, **meta,
        "base": report.base, "k": report.k, "N": report.N,
        "linf": report.linf, "max_z": report.max_z,
        "chi_square": report.chi_square, "chi_df": report.chi_df, "flagged": report.flagged,
        "columns": list(TUPLE_COLUMNS),
        "rows": [[list(r.tuple), r.observed, r.expected, r.deviation] for r in report.rows],
    }
    return json.dumps(doc, indent=2)


def weyl_csv(rows) -> str:
    """``rows`` are ``(t, N, magnitude)`` triples."""
    return _csv(WEYL_COLUMNS, [(format_tuple(t), n, _num(m)) for t, n, m in rows])


def weyl_json(rows, **meta) -> str:
    doc = {"schema": "weyl", "schema_version": SCHEMA_VERSION, **meta, "columns": list(WEYL_COLUMNS),
           "rows": [[list(t), n, m] for t, n, m in rows]}
    return json.dumps(doc, indent=2)


def order_csv(report) -> str:
    return _csv(ORDER_COLUMNS, [(e.k, "" if e.statistic is None else _num(e.statistic), _num(e.threshold), e.verdict)
                                for e in report.levels])


def order_json(report, **meta) -> str:
    doc = {"schema": "order", "schema_version": SCHEMA_VERSION, **meta, **report.summary(),
           "columns": list(ORDER_COLUMNS),
           "rows": [[e.k, e.statistic, e.threshold, e.verdict] for e in report.levels],
           "levels": [asdict(e) for e in report.levels]}
    return json.dumps(doc, indent=2, default=str)
