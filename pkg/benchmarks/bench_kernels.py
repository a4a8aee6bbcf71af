"""Compiled vs pure-Python kernels: per-kernel throughput and end-to-end tuple counting.

    python3 benchmarks/bench_kernels.py [--n 200000] [--repeat 3]
"""

from __future__ import annotations

import time

import click
import numpy as np

from localbenford import kernels
from localbenford.benford_stats import count_tuples, weyl_average
from localbenford.generators.primes import factor_table


def _best(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def _cases(n: int):
    rng = np.random.default_rng(12345)
    words = rng.integers(0, 2**63, size=(n, 3), dtype=np.uint64) * np.uint64(2) + np.uint64(1)
    regs = rng.integers(0, 2**63, size=(4, 3), dtype=np.uint64)
    mult = rng.integers(1, 2**40, size=n, dtype=np.uint64)
    table = factor_table(n + 2)
    plog = rng.integers(0, 2**63, size=(len(table.primes), 3), dtype=np.uint64)
    t = np.array([-1, 3, -3, 1], dtype=np.int64)

    def polyexp():
        kernels.polyexp_fill(regs.copy(), kernels.wide(n))

    def prefix():
        kernels.prefix_sum_fill(words.copy(), np.zeros(3, dtype=np.uint64))

    def factor():
        kernels.factor_log_fill(1, kernels.wide(n), table.spf_idx, table.primes, plog)

    def scale():
        kernels.scale_fill(words.copy(), mult)

    def window():
        kernels.window_residues(words[:, 0], words[:, 1], t, n - 3)

    return {"polyexp_fill (deg 3)": polyexp, "prefix_sum_fill": prefix, "factor_log_fill": factor,
            "scale_fill": scale, "window_residues (k=4)": window}


def _pipelines(n: int):
    return {
        "count pairs 2^(n^2)": lambda: count_tuples("2^(n^2)", 10, 2, n),
        "count pairs n!": lambda: count_tuples("n!", 10, 2, n),
        "count pairs superfact(2)": lambda: count_tuples("superfact(2)", 10, 2, n),
        "weyl 2^(n^3), t=(-1,3,-3,1)": lambda: weyl_average("2^(n^3)", 10, (-1, 3, -3, 1), n),
    }


@click.command()
@click.option("--n", "n", type=int, default=200_000, show_default=True, help="Elements per call.")
@click.option("--repeat", type=int, default=3, show_default=True, help="Best of this many runs.")
def main(n, repeat):
    backends = kernels.available()
    if "cython" not in backends:
        click.echo("compiled backend not built; timing the Python kernels only")
    rows = []
    for group, cases in (("kernel", _cases(n)), ("pipeline", _pipelines(n))):
        for name, fn in cases.items():
            times = {}
            for b in backends:
                with kernels.using(b):
                    times[b] = _best(fn, repeat)
            rows.append((group, name, times))
    click.echo(f"n = {n}, best of {repeat}; throughput in million elements per second\n")
    header = f"{'':9} {'case':30}" + "".join(f" {b + ' s':>12} {b + ' M/s':>12}" for b in backends)
    if len(backends) > 1:
        header += f" {'speedup':>9}"
    click.echo(header)
    for group, name, times in rows:
        line = f"{group:9} {name:30}" + "".join(f" {times[b]:12.4f} {n / times[b] / 1e6:12.2f}" for b in backends)
        if len(backends) > 1:
            line += f" {times['python'] / times['cython']:8.1f}x"
        click.echo(line)


if __name__ == "__main__":
    main()
