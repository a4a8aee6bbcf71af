"""Data behind the leading-digit tables and figures, as CSV-ready rows."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

from ..benford_stats import benford_probs, count_tuples, leading_digits, product_expectations
from ..benford_stats.report import SCHEMA_VERSION, format_tuple
from ..errors import InvalidInput
from ..generators.partition import DEFAULT_MAX as PARTITION_MAX

TARGETS = ("table1", "table3", "fig1", "fig2")
SEQUENCES = (("2^n", "{2^n}"), ("2^(n^2)", "{2^(n^2)}"), ("n!", "{n!}"), ("p(n)", "{p(n)}"))
PAIRS = ((1, 1), (1, 2), (2, 1), (2, 2))
PARTITION_FLOOR = 5 * 10**4
TABLE1_TERMS = 50


@dataclass(frozen=True)
class Table:
    name: str
    header: tuple
    rows: tuple
    meta: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.header)
        writer.writerows(self.rows)
        return buf.getvalue()

    def to_json(self) -> str:
        doc = {"schema": self.name, "schema_version": SCHEMA_VERSION, **self.meta,
               "columns": list(self.header), "rows": [list(r) for r in self.rows]}
        return json.dumps(doc, indent=2)

    def to_plain(self) -> str:
        cells = [list(map(str, self.header))] + [[str(c) for c in r] for r in self.rows]
        widths = [max(len(r[i]) for r in cells) for i in range(len(self.header))]
        return "\n".join("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in cells) + "\n"


def _num(x) -> str:
    return repr(float(x))


def _cap(seq: str, N: int, k: int) -> int:
    """Windows available for ``seq``: the exact partition stream stops at its ceiling."""
    if seq != "p(n)":
        return N
    n = min(N, PARTITION_MAX - k + 1)
    if n < min(N, PARTITION_FLOOR):
        raise InvalidInput(f"p(n) is limited to {PARTITION_MAX} terms")
    return n


def table1() -> Table:
    rows = []
    for seq, label in SEQUENCES:
        digits = leading_digits(seq, 10, 1, TABLE1_TERMS + 1)
        rows.append((label, "".join(str(d) for d in digits.tolist())))
    return Table("table1", ("sequence", "leading_digits"), tuple(rows), {"terms": TABLE1_TERMS})


def table3_sizes(max_N: int, min_N: int = 10**4) -> list:
    sizes, n = [], min_N
    while n <= max_N:
        sizes.append(n)
        n *= 10
    if not sizes:
        raise InvalidInput(f"max N must be at least {min_N}")
    return sizes


def table3(max_N: int = 10**6, workers: int = 1, checkpoint_dir=None, sizes=None) -> Table:
    """Pair frequencies of ``{2^(n^2)}`` at N = 10^4, 10^5, ... with the Benford row last."""
    sizes = sizes or table3_sizes(max_N)
    rows = []
    for n in sizes:
        c = count_tuples("2^(n^2)", 10, 2, n, workers, checkpoint_dir)
        rows.append((str(n), *(_num(c.freq(p)) for p in PAIRS)))
    exp = product_expectations(10, 2)
    rows.append(("Benford", *(_num(exp[(a - 1) * 9 + (b - 1)]) for a, b in PAIRS)))
    return Table("table3", ("N", *(format_tuple(p) for p in PAIRS)), tuple(rows), {"sequence": "2^(n^2)"})


def fig1(N: int = 10**5, workers: int = 1) -> Table:
    """Single-digit frequencies of the four sequences with the Benford column last."""
    cols, used = [], {}
    for seq, label in SEQUENCES:
        n = _cap(seq, N, 1)
        used[label] = n
        cols.append(count_tuples(seq, 10, 1, n, workers).frequencies())
    p = benford_probs(10)
    rows = tuple((str(d), *(_num(c[d - 1]) for c in cols), _num(p[d - 1])) for d in range(1, 10))
    return Table("fig1", ("digit", *(label for _, label in SEQUENCES), "Benford"), rows, {"N": used})


def fig2(N: int = 10**5, workers: int = 1) -> Table:
    """Selected pair frequencies of the four sequences with the Benford product last."""
    counters, used = [], {}
    for seq, label in SEQUENCES:
        n = _cap(seq, N, 2)
        used[label] = n
        counters.append(count_tuples(seq, 10, 2, n, workers))
    exp = product_expectations(10, 2)
    rows = tuple((format_tuple(p), *(_num(c.freq(p)) for c in counters), _num(exp[(p[0] - 1) * 9 + p[1] - 1]))
                 for p in PAIRS)
    return Table("fig2", ("pair", *(label for _, label in SEQUENCES), "Benford"), rows, {"N": used})


def build(target: str, N: int | None = None, max_N: int | None = None, workers: int = 1,
          checkpoint_dir=None) -> Table:
    if target == "table1":
        return table1()
    if target == "table3":
        return table3(max_N or N or 10**6, workers, checkpoint_dir)
    if target == "fig1":
        return fig1(N or 10**5, workers)
    if target == "fig2":
        return fig2(N or 10**5, workers)
    raise InvalidInput(f"unknown target {target!r}; choose from {', '.join(TARGETS)}")
