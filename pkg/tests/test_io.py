import numpy as np
import pytest

from hsvar.errors import (
    BreakOutOfRange,
    ConfigError,
    DuplicateRestriction,
    MissingValue,
    ParseError,
    SpecSyntaxError,
)
from hsvar.io import (
    ingest_csv,
    load_config,
    parse_pools,
    parse_restrictions,
    parse_restrictions_text,
    read_csv_table,
    resolve_break,
    write_csv,
)
from hsvar.reduced_form import Dataset
from hsvar.restrictions import SignRestriction, ZeroRestriction


def _write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


def test_csv_round_trip(tmp_path, rng):
    full = rng.standard_normal((40, 3))
    data = Dataset.from_array(full, 2, 15, ("a", "b", "c"))
    write_csv(tmp_path / "d.csv", data)
    back = ingest_csv(tmp_path / "d.csv", 2, 17)
    np.testing.assert_array_equal(back.full_array(), data.full_array())
    assert back.variable_names == ("a", "b", "c") and back.break_index == 15


def test_csv_with_dates_and_date_break(tmp_path):
    lines = ["month,x,y"] + [f"2000-{k:02d},{k}.0,{k * k}.5" for k in range(1, 13)]
    p = _write(tmp_path / "d.csv", "\n".join(lines) + "\n")
    names, dates, values = read_csv_table(p)
    assert names == ["x", "y"] and dates[0] == "2000-01" and values.shape == (12, 2)
    d = ingest_csv(p, 1, "2000-06")
    assert d.break_index == 5 and d.dates[0] == "2000-02"
    # unnamed date column detected from a non-numeric first cell
    p2 = _write(tmp_path / "e.csv", "\n".join(["t,x,y"] + lines[1:]) + "\n")
    assert read_csv_table(p2)[1] is not None


@pytest.mark.parametrize(
    "body, err, row, col",
    [
        ("x,y\n1,2\n3,\n", MissingValue, 3, 2),
        ("x,y\n1,2\n3,NA\n", MissingValue, 3, 2),
        ("x,y\n1,2\nabc,4\n", ParseError, 3, 1),
        ("x,y\n1,2\n3\n", ParseError, 3, None),
        ("date,x\n2000,1\n2001,inf\n", MissingValue, 3, 2),
    ],
)
def test_csv_errors_locate_cells(tmp_path, body, err, row, col):
    p = _write(tmp_path / "bad.csv", body)
    with pytest.raises(err) as info:
        read_csv_table(p)
    assert info.value.row == row and info.value.column == col


def test_empty_csv(tmp_path):
    with pytest.raises(ParseError):
        read_csv_table(_write(tmp_path / "e.csv", ""))
    with pytest.raises(ParseError):
        read_csv_table(_write(tmp_path / "h.csv", "x,y\n"))


@pytest.mark.parametrize("spec", ["1", "2", "10", "11", "nope", "2001-01"])
def test_break_out_of_range(spec):
    with pytest.raises(BreakOutOfRange):
        resolve_break(spec, 1, ["2000-01"] * 10, 10)


def test_break_valid():
    assert resolve_break("5", 2, None, 20) == 3
    assert resolve_break("c", 1, list("abcdef"), 6) == 2


def test_parse_restriction_language():
    spec = parse_restrictions_text(
        """
        # comment
        zero A0inv 1 2
        zero A0 2 3      # trailing comment
        zero A_l 2 1 3
        zero CIRinf 3 1
        zero IR 4 1 1
        sign IR 0 1 2 +
        sign IR 0..11 3 1 -
        interest 2
        pool 2..3
        shocks 2 3 1
        normalize C - + +
        """,
        label="x",
    )
    assert spec.zeros == (
        ZeroRestriction("A0inv", 0, 1),
        ZeroRestriction("A0", 1, 2),
        ZeroRestriction("A_l", 0, 2, 2),
        ZeroRestriction("CIRinf", 2, 0),
        ZeroRestriction("IRh", 0, 0, 4),
    )
    assert spec.signs == (SignRestriction(0, 1, 0, 1), SignRestriction(2, 0, 0, -1, 11))
    assert spec.interest == 1 and spec.pools == ((1, 2),) and spec.shock_order == (1, 2, 0)
    assert spec.sign_rule == "diag_C_nonneg" and spec.sign_directions == (-1, 1, 1)
    assert spec.max_horizon() == 11 and spec.label == "x"


@pytest.mark.parametrize(
    "text, err, line",
    [
        ("zero A0inv 1\n", SpecSyntaxError, 1),
        ("\nzero B 1 2\n", SpecSyntaxError, 2),
        ("sign IR 0 1 2 *\n", SpecSyntaxError, 1),
        ("sign IR 3..1 1 2 +\n", SpecSyntaxError, 1),
        ("zero A0inv 0 1\n", SpecSyntaxError, 1),
        ("zero A_l 0 1 1\n", SpecSyntaxError, 1),
        ("pool 3..2\n", SpecSyntaxError, 1),
        ("shocks 1 1 2\n", SpecSyntaxError, 1),
        ("frobnicate\n", SpecSyntaxError, 1),
        ("zero A0inv 1 2\nzero A0inv 1 2\n", DuplicateRestriction, 2),
        ("sign IR 0..2 1 2 +\nsign IR 2 1 2 -\n", DuplicateRestriction, 2),
        ("interest 1\ninterest 2\n", DuplicateRestriction, 2),
        ("pool 1..2\npool 1..2\n", DuplicateRestriction, 2),
    ],
)
def test_spec_errors_report_line(text, err, line):
    with pytest.raises(err) as info:
        parse_restrictions_text(text)
    assert info.value.line == line


def test_preset_and_file(tmp_path):
    preset = parse_restrictions("table2-oil")
    assert preset.pools == ((1, 2),) and preset.interest == 0 and len(preset.signs) == 4
    assert preset.sign_directions == (-1, 1, 1)
    p = _write(tmp_path / "r.txt", "pool 2..3\n")
    assert parse_restrictions(p).label == "r.txt"


def _config_files(tmp_path, extra=""):
    full = np.random.default_rng(0).standard_normal((30, 2))
    write_csv(tmp_path / "data.csv", Dataset.from_array(full, 1, 10))
    _write(tmp_path / "r.txt", "pool 1..2\n")
    return _write(tmp_path / "run.cfg", f"data = data.csv\nbreak = 11\nlag = 1\nrestrictions = r.txt\n{extra}")


def test_config_paths_and_aliases(tmp_path):
    cfg = load_config(_config_files(tmp_path, "cumulate = 1,2\nshock_names = a, b\npartition = 1..2\nM = 7\n"))
    assert cfg.data == str(tmp_path / "data.csv") and cfg.restrictions == str(tmp_path / "r.txt")
    assert cfg.lag_order == 1 and cfg.break_spec == "11" and cfg.M == 7
    assert cfg.cumulate == (0, 1) and cfg.shock_names == ("a", "b") and cfg.pools == "1..2"
    assert "break=11" in cfg.canonical()
    over = load_config(tmp_path / "run.cfg", {"seed": 5, "out": "elsewhere"})
    assert over.seed == 5 and over.out == "elsewhere"


@pytest.mark.parametrize(
    "text",
    [
        "data = data.csv\nbreak = 11\n",  # no lag order
        "data = missing.csv\nbreak = 11\nlag = 1\n",
        "data = data.csv\nbreak = 11\nlag = 1\nestimator = lasso\n",
        "data = data.csv\nbreak = 11\nlag = 1\nwhatever = 1\n",
        "data = data.csv\nbreak = 11\nlag = one\n",
        "data = data.csv\nbreak = 11\nlag = 1\nalpha = 1.5\n",
        "data = data.csv\nbreak = 11\nlag = 1\npools = 2-3\n",
        "data = data.csv\nlag 1\n",
    ],
)
def test_config_errors(tmp_path, text):
    _config_files(tmp_path)
    with pytest.raises(ConfigError):
        load_config(_write(tmp_path / "bad.cfg", text))


def test_parse_pools():
    assert parse_pools("2..3") == ((1, 2),)
    assert parse_pools("1..2, 3..4") == ((0, 1), (2, 3))
    assert parse_pools("") == ()
