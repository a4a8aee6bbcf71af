from fractions import Fraction
from math import comb, factorial

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from localbenford.errors import ExceedsMaximum, InvalidInput, NotSeekable, SpecParseError
from localbenford.fixed_frac import FracValue
from localbenford.generators import (
    CheckpointWriter,
    Factorial,
    Geometric,
    IteratedProduct,
    PolyExp,
    doubly_exp_frac,
    fibonacci,
    frac_array,
    frac_at,
    frac_stream,
    is_seekable,
    iterated_lift,
    latest_checkpoint,
    make_state,
    parse,
    partition_exact,
    partitions_upto,
    read_checkpoint,
    render,
    seek_seed,
    write_checkpoint,
)
from localbenford.generators.checkpoint import Checkpoint

ONE = 1 << 128
TOL = 1 << 40  # 2^-88 in FracValue ulps, far inside the 2^-64 budget


def mp_frac(x_int_or_log, base=10, is_log=False):
    with mpmath.workdps(120):
        v = x_int_or_log if is_log else mpmath.log(mpmath.mpf(x_int_or_log)) / mpmath.log(base)
        f = v - mpmath.floor(v)
        return FracValue(int(mpmath.floor(f * ONE)))


def agree(a: FracValue, b: FracValue) -> bool:
    return a.circular_distance(b) <= TOL


def superfactorial(n, h):
    """Product of the (h-1)-fold iterated superfactorial, by brute force."""
    vals = [factorial(m) for m in range(1, n + 1)]
    for _ in range(h - 1):
        acc, out = 1, []
        for v in vals:
            acc *= v
            out.append(acc)
        vals = out
    return vals[-1]


ORACLES = {
    "2^n": lambda n: 2**n,
    "3^n": lambda n: 3**n,
    "(3/2)^n": lambda n: Fraction(3, 2) ** n,
    "2^(n^2)": lambda n: 2 ** (n * n),
    "2^(n^3)": lambda n: 2 ** (n**3),
    "n!": factorial,
    "n^n": lambda n: n**n,
    "p(n)": partition_exact,
    "fib-exp(2)": lambda n: 2 ** fibonacci(n),
    "2^prime(n)": lambda n: 2 ** int(mpmath.mpf(sorted(_primes(n))[n - 1])),
    "superfact(2)": lambda n: superfactorial(n, 2),
    "superfact(3)": lambda n: superfactorial(n, 3),
}


def _primes(n):
    out, c = [], 2
    while len(out) < n:
        if all(c % p for p in out if p * p <= c):
            out.append(c)
        c += 1
    return out


def as_log(v, base=10):
    with mpmath.workdps(150):
        if isinstance(v, Fraction):
            return (mpmath.log(v.numerator) - mpmath.log(v.denominator)) / mpmath.log(base)
        return mpmath.log(mpmath.mpf(v)) / mpmath.log(base)


@pytest.mark.parametrize("text", sorted(ORACLES))
def test_stream_matches_exact_integers(text, backend):
    n_max = 40
    got = dict(frac_stream(parse(text), 10, 1, n_max + 1))
    for n in range(1, n_max + 1):
        assert agree(got[n], mp_frac(as_log(ORACLES[text](n)), is_log=True)), (text, n)


@pytest.mark.parametrize("text", ["2^n", "2^(n^2)", "n!", "n^n", "p(n)", "2^prime(n)", "fib-exp(2)"])
def test_seek_is_bit_identical_to_stream(text, backend):
    spec = parse(text)
    words, _ = frac_array(spec, 10, 1, 3001)
    for n0 in (1, 2, 17, 1000, 2999):
        state = seek_seed(spec, 10, n0, replay=True)
        blk = state.next_block(3001 - n0)
        assert np.array_equal(blk.words, words[n0 - 1:]), (text, n0)


def test_frac_at_large_index():
    x = frac_at(parse("2^n"), 10, 10**6)
    assert agree(x, FracValue.from_fraction(Fraction("0.9956639811952137388947244930267681898815")))


def test_error_stays_within_budget():
    _, err = frac_array(parse("2^(n^3)"), 10, 1, 20001)
    assert err <= 1 << 128


def test_fibonacci_additive_law_on_words():
    words, _ = frac_array(parse("fib-exp(2)"), 10, 1, 64)
    ints = [(int(w[0]) << 128) | (int(w[1]) << 64) | int(w[2]) for w in words]
    m = (1 << 192) - 1
    for n in range(3, 64):
        # residues of exact products agree to the truncation ulps
        assert abs(((ints[n - 2] + ints[n - 3]) & m) - ints[n - 1]) <= 4 or \
            abs(((ints[n - 2] + ints[n - 3]) & m) - ints[n - 1]) >= m - 4


def test_partition_matches_dynamic_programme():
    n_max = 200
    dp = [1] + [0] * n_max
    for part in range(1, n_max + 1):
        for s in range(part, n_max + 1):
            dp[s] += dp[s - part]
    assert partitions_upto(n_max)[: n_max + 1] == dp
    assert partition_exact(100) == 190569292
    assert partition_exact(200) == 3972999029388


def test_partition_rejects_out_of_range():
    with pytest.raises(ExceedsMaximum):
        partition_exact(10, max_n=5)


def test_iterated_lift_reproduces_superfactorial():
    base = [x for _, x in frac_stream(parse("n!"), 10, 1, 31)]
    lifted = list(iterated_lift(iter(base), 2))
    direct = [x for _, x in frac_stream(parse("superfact(2)"), 10, 1, 31)]
    assert all(agree(a, b) for a, b in zip(lifted, direct))
    assert list(iterated_lift(iter(base), 1)) == base


def test_iterated_lift_of_geometric_is_binomial_polyexp():
    base = [x for _, x in frac_stream(parse("2^n"), 10, 1, 21)]
    lifted = list(iterated_lift(iter(base), 3))
    # sum_{m<=n} sum_{j<=m} j = C(n+2, 3); the binomial basis is C(n-1, j)
    ref = [x for _, x in frac_stream(PolyExp.from_binomial(2, (0, 0, 0, 1)), 10, 4, 24)]
    assert all(agree(a, b) for a, b in zip(lifted, ref))


def test_superfactorial_examples_h3():
    exp = ["0", "0.30102999566398119521", "0.3802112417116060229362", "0.8396037294708368735950"]
    got = [x for _, x in frac_stream(parse("superfact(3)"), 10, 1, 5)]
    for g, e in zip(got, exp):
        assert g.circular_distance(FracValue.from_fraction(Fraction(e))) < ONE >> 60


def test_superfactorial_examples_h2():
    exp = ["0", "0.30102999566398119521", "0.07918124604762482772", "0.45939248775923085066"]
    got = [x for _, x in frac_stream(parse("superfact(2)"), 10, 1, 5)]
    for g, e in zip(got, exp):
        assert g.circular_distance(FracValue.from_fraction(Fraction(e))) < ONE >> 60


def test_iterated_products_are_replay_only():
    assert not is_seekable(parse("superfact(2)"))
    assert is_seekable(parse("n!"))
    with pytest.raises(NotSeekable):
        seek_seed(parse("superfact(2)"), 10, 100)


def test_checkpoint_round_trip(tmp_path):
    spec = parse("superfact(2)")
    state = make_state(spec, 10)
    state.next_block(500)
    path = write_checkpoint(state, tmp_path)
    cp = read_checkpoint(path)
    assert Checkpoint.from_bytes(cp.to_bytes()) == cp
    resumed = seek_seed(spec, 10, 800, checkpoint_dir=tmp_path)
    fresh = seek_seed(spec, 10, 800, replay=True)
    assert np.array_equal(resumed.next_block(300).words, fresh.next_block(300).words)


def test_checkpoint_writer_and_latest(tmp_path):
    spec = parse("superfact(2)")
    state = make_state(spec, 10)
    writer = CheckpointWriter(tmp_path, every=1000)
    for _ in range(5):
        state.next_block(1000)
        writer(state)
    cp = latest_checkpoint(tmp_path, spec, 10, 3500)
    assert cp is not None and cp.index <= 3500
    assert latest_checkpoint(tmp_path, spec, 10, 1) is None or latest_checkpoint(tmp_path, spec, 10, 1).index <= 1


def test_checkpoint_rejects_other_sequence(tmp_path):
    state = make_state(parse("superfact(2)"), 10)
    state.next_block(10)
    cp = read_checkpoint(write_checkpoint(state, tmp_path))
    with pytest.raises(InvalidInput):
        cp.restore_into(make_state(parse("superfact(3)"), 10))


@pytest.mark.parametrize("blob", [b"", b"XXXX" + bytes(100)])
def test_checkpoint_rejects_garbage(blob):
    with pytest.raises(InvalidInput):
        Checkpoint.from_bytes(blob)


def test_doubly_exp_examples():
    # theta = 2 equals the polynomial family 2^(2^n)
    assert agree(doubly_exp_frac(2, 2, 10, 3), FracValue.from_fraction(
        Fraction("0.4082399653118495617099111577959442141455")))
    assert agree(doubly_exp_frac(2, "phi", 10, 2), FracValue.from_fraction(
        Fraction("0.7881067602815362393658999622679373776755")))


def test_dexp_stream_matches_mpmath():
    with mpmath.workdps(200):
        for n, x in frac_stream(parse("dexp(3, sqrt(2))"), 10, 1, 30):
            v = mpmath.sqrt(2) ** n * mpmath.log10(3)
            assert agree(x, mp_frac(v, is_log=True))


@pytest.mark.parametrize("text", ["2^n", "(3/2)^(n^2 - 1/2*n)", "n!", "superfact(3)", "p(n)", "p_asym(n)",
                                  "fib-exp(3)", "mersenne", "dexp(2, phi)", "iterprod(2^n, 2)", "n^n"])
def test_render_parse_round_trip(text):
    spec = parse(text)
    assert parse(render(spec)) == spec


@pytest.mark.parametrize("text", ["2^", "foo(n)", "superfact(0)", "0^n", "dexp(2, )"])
def test_parse_errors(text):
    with pytest.raises((SpecParseError, InvalidInput)):
        parse(text)


def test_parse_error_points_at_position():
    with pytest.raises(SpecParseError) as info:
        parse("2^(n^2 +* 1)")
    assert "^" in str(info.value)


def test_geometric_and_polyexp_agree():
    assert np.array_equal(frac_array(Geometric(2), 10, 1, 200)[0],
                          frac_array(PolyExp(2, (0, 1)), 10, 1, 200)[0])


def test_iterated_product_nesting_flattens():
    nested = IteratedProduct(IteratedProduct(Factorial(), 2), 1)
    assert np.array_equal(frac_array(nested, 10, 1, 100)[0], frac_array(parse("superfact(2)"), 10, 1, 100)[0])


@settings(max_examples=30, deadline=None)
@given(st.integers(-3, 3), st.integers(-3, 3), st.integers(1, 3), st.integers(1, 400))
def test_polyexp_random_coefficients(c1, c2, c3, n):
    spec = PolyExp(2, (0, c1, c2, c3))
    p = c1 * n + c2 * n * n + c3 * n**3
    with mpmath.workdps(150):
        assert agree(frac_at(spec, 10, n), mp_frac(p * as_log(2), is_log=True))


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 2000), st.integers(1, 500))
def test_seek_concatenation(n0, length):
    spec = parse("n!")
    a = seek_seed(spec, 10, n0).next_block(length).words
    b = frac_array(spec, 10, n0, n0 + length)[0]
    assert np.array_equal(a, b)


def test_binomial_coefficients_round_trip():
    spec = PolyExp(2, (Fraction(1, 3), 0, 5, 1))
    again = PolyExp.from_binomial(spec.a, spec.binomial_coeffs())
    assert again == spec
    assert spec.value(4) == Fraction(1, 3) + 80 + 64
    assert comb(5, 2) == 10


@pytest.mark.parametrize("n", [256, 1000, 54321])
def test_log_factorial_series_matches_exact_exponents(n):
    from localbenford.generators.evaluators import _factorial_exponents, _log_factorial, _prime_weight_log
    a = _log_factorial(n, 10, 256)
    b = _prime_weight_log(_factorial_exponents(n), 10, 256)
    assert abs(a.raw - b.raw) <= a.err + b.err
    with mpmath.workprec(400):
        ref = mpmath.loggamma(n + 1) / mpmath.log(10)
        assert abs(mpmath.mpf(a.to_fraction().numerator) / a.to_fraction().denominator - ref) < mpmath.mpf(2) ** -250
