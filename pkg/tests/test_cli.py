import json

import pytest
from click.testing import CliRunner

from localbenford.cli import main
from localbenford.cli.config import make_config, parse_count, parse_t
from localbenford.cli.reproduce import table3
from localbenford.errors import InvalidInput

TWO_N = "".join(str(2**n)[0] for n in range(1, 51))


def _runner():
    try:
        return CliRunner(mix_stderr=False)
    except TypeError:  # click >= 8.2 always separates stderr
        return CliRunner()


def run(*args, **kw):
    return _runner().invoke(main, list(args), **kw)


@pytest.mark.parametrize("text, value", [("1000", 1000), ("1e6", 10**6), ("10^6", 10**6), (5, 5)])
def test_parse_count(text, value):
    assert parse_count(text) == value


@pytest.mark.parametrize("bad", ["0", "-1", "1.5", "abc", "1e-3"])
def test_parse_count_rejects(bad):
    with pytest.raises(InvalidInput):
        parse_count(bad)


def test_parse_t():
    assert parse_t("1, -2,1") == (1, -2, 1)
    for bad in ("", "0,0", "1,x"):
        with pytest.raises(InvalidInput):
            parse_t(bad)


def test_make_config_validation():
    cfg = make_config("2^( n^2 )", 10, "1e4")
    assert cfg.seq == "2^(n^2)" and cfg.N == 10**4
    for kwargs in ({"base": 1}, {"fmt": "xml"}, {"workers": 0}, {"frac_bits": 64}, {"escalate_bits": 100}):
        with pytest.raises(InvalidInput):
            make_config("2^n", **kwargs)


def test_checkpoint_dir_from_environment(monkeypatch, tmp_path):
    monkeypatch.setenv("LOCALBENFORD_CHECKPOINT_DIR", str(tmp_path))
    assert make_config("n!").checkpoint_dir == str(tmp_path)


def test_digits_command():
    r = run("digits", "--seq", "2^n", "-N", "50")
    assert r.exit_code == 0
    assert r.stdout.strip() == TWO_N
    r = run("digits", "--seq", "p(n)", "-N", "10")
    assert r.stdout.strip() == "1235711234"


def test_digits_json_and_csv():
    doc = json.loads(run("digits", "--seq", "n!", "-N", "5", "--format", "json").stdout)
    assert doc["digits"] == [1, 2, 6, 2, 1]
    csv = run("digits", "--seq", "n!", "-N", "3", "--format", "csv").stdout
    assert csv.splitlines() == ["n,digit", "1,1", "2,2", "3,6"]


def test_parse_error_exit_code_and_caret():
    r = run("digits", "--seq", "2^(n^2 +* 1)")
    assert r.exit_code == 2
    assert "^" in r.stderr


def test_invalid_weights_exit_code():
    r = run("weyl", "--seq", "2^n", "--t", "0,0", "-N", "100")
    assert r.exit_code == 2


def test_refusal_exit_code():
    r = run("order", "--seq", "2^n", "-N", "100")
    assert r.exit_code == 3
    assert "error:" in r.stderr


def test_tuples_command_and_warning():
    r = run("tuples", "--seq", "2^n", "-k", "2", "-N", "1000")
    assert r.exit_code == 0
    assert "warning" in r.stderr
    assert r.stdout.splitlines()[1].startswith("(1,1)")


def test_tuples_json_output_file(tmp_path):
    out = tmp_path / "t.json"
    r = run("tuples", "--seq", "2^(n^2)", "-k", "2", "-N", "1e4", "--format", "json", "-o", str(out))
    assert r.exit_code == 0
    doc = json.loads(out.read_text())
    assert doc["columns"][0] == "tuple" and len(doc["rows"]) == 81
    assert doc["N"] == 10**4


def test_order_command():
    r = run("order", "--seq", "2^(n^2)", "-N", "1e5")
    assert r.exit_code == 0
    assert r.stdout.strip().splitlines()[-1] == "order: 2"


def test_weyl_command():
    r = run("weyl", "--seq", "2^(n^2)", "--t", "1,-2,1", "-N", "1e4")
    assert r.exit_code == 0
    assert "1.0000000000" in r.stdout


def test_classify_command():
    r = run("classify", "--seq-log", "n^1.5")
    assert r.exit_code == 0
    assert "C_{2,1/2}" in r.stdout


def test_classify_needs_one_source():
    r = run("classify")
    assert r.exit_code == 2


def test_reproduce_table1(tmp_path):
    r = run("reproduce", "table1", "--out-dir", str(tmp_path))
    assert r.exit_code == 0
    rows = (tmp_path / "table1.csv").read_text().splitlines()
    assert rows[0] == "sequence,leading_digits"
    assert rows[1] == "{2^n}," + TWO_N
    assert rows[4].startswith("{p(n)},1235711234")


def test_reproduce_table3_small():
    t = table3(sizes=[10**4])
    assert t.rows[0] == ("10000", repr(0.0892), repr(0.0544), repr(0.0553), repr(0.0315))
    assert t.rows[-1][0] == "Benford"


def test_version():
    r = run("--version")
    assert r.exit_code == 0 and "0.1.0" in r.stdout
