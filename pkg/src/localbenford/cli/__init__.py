"""Command-line front end: ``localbenford <command> --seq SPEC ...``."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from ..errors import InvalidInput, LocalBenfordError
from .config import DIGITS_CAP, FORMATS, make_config, parse_count, parse_t

EXIT_INTERNAL = 4


class _Group(click.Group):
    """Maps library errors to exit codes: 2 invalid input, 3 refusal, 4 internal."""

    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except LocalBenfordError as exc:
            click.echo(f"error: {exc}", err=True)
            ctx.exit(exc.exit_code)
        except (click.ClickException, click.exceptions.Exit, click.exceptions.Abort):
            raise
        except Exception as exc:  # anything else breaks an internal invariant
            click.echo(f"internal error: {type(exc).__name__}: {exc}", err=True)
            ctx.exit(EXIT_INTERNAL)


def _emit(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text)
    else:
        click.echo(text, nl=not text.endswith("\n"))


def _common(f):
    f = click.option("--format", "fmt", type=click.Choice(FORMATS), default="plain", show_default=True,
                     help="Output format.")(f)
    f = click.option("--output", "-o", default=None, help="Write the report to this file.")(f)
    f = click.option("--base", "-b", type=int, default=10, show_default=True, help="Digit base.")(f)
    return f


def _parallel(f):
    f = click.option("--workers", "-w", type=int, default=1, show_default=True,
                     help="Worker threads for seekable sequences.")(f)
    f = click.option("--checkpoint-dir", default=None, envvar="LOCALBENFORD_CHECKPOINT_DIR",
                     help="Snapshot directory for replay-only sequences.")(f)
    f = click.option("--escalate-bits", type=int, default=4096, show_default=True,
                     help="Precision ceiling for digits near a threshold.")(f)
    return f


@click.group(cls=_Group)
@click.version_option(package_name="artifact")
def main():
    """Leading-digit statistics of arithmetic sequences."""


@main.command()
@click.option("--seq", "-s", required=True, help='Sequence, e.g. "2^n", "n!", "p(n)".')
@click.option("-N", "N", default="50", show_default=True, help="Number of terms.")
@click.option("--start", type=int, default=1, show_default=True, help="First index.")
@_common
def digits(seq, N, start, base, fmt, output):
    """Concatenated leading digits of the N terms from index start on."""
    from ..benford_stats import leading_digits

    cfg = make_config(seq, base, N, fmt)
    if cfg.N > DIGITS_CAP:
        raise InvalidInput(f"digits renders at most {DIGITS_CAP} terms")
    if start < 1:
        raise InvalidInput("start must be >= 1")
    ds = leading_digits(cfg.spec, base, start, start + cfg.N).tolist()
    text = "".join(map(str, ds)) if base <= 10 else " ".join(map(str, ds))
    if fmt == "json":
        text = json.dumps({"schema": "digits", "schema_version": 1, "seq": cfg.seq, "base": base,
                           "start": start, "N": cfg.N, "digits": ds})
    elif fmt == "csv":
        text = "n,digit\n" + "".join(f"{start + i},{d}\n" for i, d in enumerate(ds))
    _emit(text, output)


@main.command()
@click.option("--seq", "-s", required=True, help="Sequence spec.")
@click.option("-k", "k", type=int, default=2, show_default=True, help="Tuple length.")
@click.option("-N", "N", default="1e6", show_default=True, help="Number of windows.")
@_common
@_parallel
def tuples(seq, k, N, base, fmt, output, workers, checkpoint_dir, escalate_bits):
    """k-tuple leading-digit frequencies against the Benford product law."""
    from ..benford_stats import count_tuples, deviation_report, tuples_csv, tuples_json

    cfg = make_config(seq, base, N, fmt, workers, checkpoint_dir, escalate_bits=escalate_bits, k=k)
    counter = count_tuples(cfg.spec, base, k, cfg.N, workers, cfg.checkpoint_dir, **cfg.options())
    rep = deviation_report(counter)
    if rep.flagged:
        click.echo(f"warning: {rep.flagged} cells expect fewer than 50 counts; N is too small for "
                   f"reliable k = {k} statistics", err=True)
    if fmt == "csv":
        text = tuples_csv(rep)
    elif fmt == "json":
        text = tuples_json(rep, seq=cfg.seq, escalations=counter.escalations)
    else:
        lines = [f"{'tuple':<{2 * k + 3}} {'observed':>12} {'expected':>12} {'deviation':>13}"]
        for r in rep.rows:
            lines.append(f"{_tuple_text(r.tuple):<{2 * k + 3}} {r.observed:12.7f} {r.expected:12.7f} "
                         f"{r.deviation:+13.7f}")
        lines.append(f"N = {rep.N}  L_inf = {rep.linf:.3g}  max |z| = {rep.max_z:.3g}  "
                     f"chi2 = {rep.chi_square:.6g} (df {rep.chi_df})  escalations = {counter.escalations}")
        text = "\n".join(lines) + "\n"
    _emit(text, output)


def _tuple_text(t) -> str:
    return "(" + ",".join(map(str, t)) + ")"


@main.command()
@click.option("--seq", "-s", required=True, help="Sequence spec.")
@click.option("-N", "N", default="1e6", show_default=True, help="Number of windows.")
@click.option("--kmax", "k_max", type=int, default=3, show_default=True, help="Largest order tested.")
@click.option("--sigmas", type=float, default=4.0, show_default=True, help="Per-cell threshold.")
@click.option("--killer/--no-killer", default=True, show_default=True,
              help="Use the difference-vector Weyl probe.")
@_common
@_parallel
def order(seq, N, k_max, sigmas, killer, base, fmt, output, workers, checkpoint_dir, escalate_bits):
    """Estimate the maximal local Benford order."""
    from ..benford_stats import OrderPolicy, estimate_max_order, order_csv, order_json

    cfg = make_config(seq, base, N, fmt, workers, checkpoint_dir, escalate_bits=escalate_bits, k_max=k_max)
    policy = OrderPolicy(sigmas=sigmas, killer=killer)
    rep = estimate_max_order(cfg.spec, base, cfg.N, k_max, policy, workers, cfg.checkpoint_dir, **cfg.options())
    if fmt == "csv":
        text = order_csv(rep)
    elif fmt == "json":
        text = order_json(rep)
    else:
        lines = []
        for e in rep.levels:
            if e.statistic is None:
                cells = "cells under-populated" if e.verdict != "SKIP" else "not tested"
            else:
                cells = f"max|z|={e.statistic:.3f} (<= {e.threshold:g})"
            probe = "" if e.killer_magnitude is None else \
                f"  probe t={_tuple_text(e.killer_t)} |S|/N={e.killer_magnitude:.4f}"
            lines.append(f"k={e.k}  {e.verdict:<9} {cells}{probe}")
        if rep.expected_order is not None:
            lines.append(f"known order: {rep.expected_order}")
        lines.append(f"order: {rep.estimated_order}")
        text = "\n".join(lines) + "\n"
    _emit(text, output)


@main.command()
@click.option("--seq", "-s", default=None, help="Sequence spec.")
@click.option("--t", "t", required=True, help="Comma-separated integer weights, e.g. 1,-2,1.")
@click.option("-N", "N", default="1e6", show_default=True, help="Number of windows.")
@_common
@_parallel
def weyl(seq, t, N, base, fmt, output, workers, checkpoint_dir, escalate_bits):
    """|(1/N) sum exp(2 pi i sum_j t_j f(n+j))| for f(n) = log_base a_n."""
    from ..benford_stats import expected_order, killer_vector, weyl_average, weyl_csv, weyl_json

    tv = parse_t(t)
    if seq is None:
        raise InvalidInput("--seq is required")
    cfg = make_config(seq, base, N, fmt, workers, checkpoint_dir, escalate_bits=escalate_bits, t=tv)
    mag = weyl_average(cfg.spec, base, tv, cfg.N, workers, cfg.checkpoint_dir, **cfg.options())
    known = expected_order(cfg.spec, base)
    hint = killer_vector(int(known)) if known not in (None, float("inf")) and known >= 1 else None
    if fmt == "csv":
        text = weyl_csv([(tv, cfg.N, mag)])
    elif fmt == "json":
        text = weyl_json([(tv, cfg.N, mag)], seq=cfg.seq, base=base,
                         killer_vector=list(hint) if hint else None)
    else:
        text = f"{mag:.10f}\n"
        if hint:
            text += f"killer vector for the known order {known}: {','.join(map(str, hint))}\n"
    _emit(text, output)


@main.command()
@click.option("--seq-log", default=None, help='f(n) as an expression in n, e.g. "n^1.5".')
@click.option("--seq", "-s", default=None, help="Sequence spec; classifies f(n) = log_base a_n.")
@click.option("--kmax", "k_max", type=int, default=4, show_default=True, help="Largest k tried.")
@click.option("--tol", type=float, default=1e-4, show_default=True, help="Relative convergence tolerance.")
@click.option("--min-n", default="1e2", show_default=True, help="Smallest grid index.")
@click.option("--max-n", default="1e7", show_default=True, help="Largest grid index.")
@click.option("--difference", "-d", type=int, default=0, show_default=True,
              help="Classify the d-th difference of f instead.")
@_common
def classify(seq_log, seq, k_max, tol, min_n, max_n, difference, base, fmt, output):
    """Estimate the class C_{k,0}, C_{k,alpha} or C_{k,1} of f."""
    from ..differencing import classify as run_classify
    from ..differencing import default_grid, difference_evaluator, expr_evaluator, sequence_evaluator
    from ..generators import parse

    if (seq_log is None) == (seq is None):
        raise InvalidInput("give exactly one of --seq-log or --seq")
    ev = expr_evaluator(seq_log) if seq_log is not None else sequence_evaluator(parse(seq), base)
    if difference:
        ev = difference_evaluator(ev, difference)
    grid = default_grid(parse_count(min_n, "--min-n"), parse_count(max_n, "--max-n"))
    est = run_classify(ev, k_max, grid, tol)
    record = {"class": est.label, "k": est.k, "kind": est.kind, "alpha": est.alpha,
              "alpha_fraction": str(est.alpha_fraction) if est.alpha_fraction is not None else None,
              "limit_constant": est.limit_constant, "irrationality_caveat": est.irrationality_caveat}
    if fmt == "json":
        text = json.dumps({"schema": "classify", "schema_version": 1, **record,
                           "grid": est.diagnostics.get("grid")}, indent=2)
    elif fmt == "csv":
        text = "class,k,kind,alpha,limit_constant\n" + \
            f"{est.label},{'' if est.k is None else est.k},{est.kind},{'' if est.alpha is None else est.alpha}," \
            f"{'' if est.limit_constant is None else repr(est.limit_constant)}\n"
    else:
        if est.kind == "inconclusive":
            text = "inconclusive: no difference order up to k_max converged on the grid\n"
            if est.diagnostics.get("boundary"):
                text += f"alpha near 0 or 1 at k = {est.diagnostics['boundary']}\n"
        else:
            name = "theta" if est.kind == "C_k0" else "lambda"
            text = f"{est.label}  {name} = {est.limit_constant:.10g}\n"
            if est.irrationality_caveat:
                text += "note: irrationality of theta is not decided numerically\n"
    _emit(text, output)


@main.command()
@click.argument("target", type=click.Choice(["table1", "table3", "fig1", "fig2"]))
@click.option("-N", "N", default=None, help="Terms for fig1/fig2 (default 1e5).")
@click.option("--max-N", "max_N", default=None, help="Largest N for table3 (default 1e6).")
@click.option("--out-dir", default=".", show_default=True, help="Directory for the output file.")
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv", show_default=True)
@click.option("--workers", "-w", type=int, default=1, show_default=True)
@click.option("--checkpoint-dir", default=None, envvar="LOCALBENFORD_CHECKPOINT_DIR")
def reproduce(target, N, max_N, out_dir, fmt, workers, checkpoint_dir):
    """Write the data of a table or figure and echo it."""
    from .reproduce import build

    n = parse_count(N) if N is not None else None
    mx = parse_count(max_N, "--max-N") if max_N is not None else None
    make_config(None, 10, None, "plain", workers, checkpoint_dir)
    table = build(target, n, mx, workers, checkpoint_dir)
    text = table.to_csv() if fmt == "csv" else table.to_json() + "\n"
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / f"{target}.{fmt}").write_text(text)
    click.echo(text, nl=False)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
