"""File formats: time-series CSV, restriction specs and flat key=value configs."""

from __future__ import annotations

import csv
import math
import re
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .errors import (
    BreakOutOfRange,
    ConfigError,
    DuplicateRestriction,
    MissingValue,
    ParseError,
    SpecSyntaxError,
    ValidationError,
)
from .reduced_form import Dataset
from .restrictions import TABLE2_OIL_TEXT, RestrictionSpec, SignRestriction, ZeroRestriction

DATE_HEADERS = {"date", "dates", "time", "period", "month", "quarter", "year"}
PRESETS = {"table2-oil": TABLE2_OIL_TEXT}


# CSV


def _parse_float(cell: str, row: int, col: int) -> float:
    s = cell.strip()
    if s == "" or s.lower() in ("na", "nan", "null", "."):
        raise MissingValue("missing value", row, col)
    try:
        v = float(s)
    except ValueError:
        raise ParseError(f"cannot parse {cell!r} as a number", row, col) from None
    if not math.isfinite(v):
        raise MissingValue("non-finite value", row, col)
    return v


def _has_date_column(header: list[str], first: list[str] | None) -> bool:
    if header[0].strip().lower() in DATE_HEADERS:
        return True
    if first is None:
        return False
    try:
        float(first[0])
    except ValueError:
        return True
    return False


def read_csv_table(path) -> tuple[list[str], list[str] | None, np.ndarray]:
    """(variable names, dates or None, values as rows x n); rows and columns in errors are 1-based file positions."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if any(c.strip() for c in r)]
    if not rows:
        raise ParseError("empty file", 1)
    header = [h.strip() for h in rows[0]]
    body = rows[1:]
    if not body:
        raise ParseError("no data rows", 2)
    dated = _has_date_column(header, body[0])
    names = header[1:] if dated else header
    if not names:
        raise ParseError("no variable columns", 1)
    width = len(header)
    dates = [] if dated else None
    values = np.empty((len(body), len(names)))
    for r, line in enumerate(body, start=2):
        if len(line) != width:
            raise ParseError(f"expected {width} fields, found {len(line)}", r)
        if dated:
            dates.append(line[0].strip())
        cells = line[1:] if dated else line
        for c, cell in enumerate(cells):
            values[r - 2, c] = _parse_float(cell, r, c + 1 + int(dated))
    return names, dates, values


def resolve_break(break_spec, lag_order: int, dates: list[str] | None, n_rows: int) -> int:
    """T_B from a 1-based data row (presample included) or a date of the last regime-1 period."""
    spec = str(break_spec).strip()
    if re.fullmatch(r"[+-]?\d+", spec):
        row = int(spec)
    elif dates is not None and spec in dates:
        row = dates.index(spec) + 1
    else:
        raise BreakOutOfRange(f"break {spec!r} is neither a row number nor a date in the file")
    T = n_rows - lag_order
    T_B = row - lag_order
    if not 1 < T_B < T:
        raise BreakOutOfRange(f"break row {row} gives T_B = {T_B}; need 1 < T_B < T = {T}")
    return T_B


def ingest_csv(path, lag_order: int, break_spec) -> Dataset:
    """Dataset from a CSV with a header row and an optional leading date column.

    The first ``lag_order`` rows form the presample.
    """
    names, dates, values = read_csv_table(path)
    if values.shape[0] <= lag_order + 2:
        raise ParseError("too few rows for the lag order", values.shape[0] + 1)
    T_B = resolve_break(break_spec, lag_order, dates, values.shape[0])
    est_dates = None if dates is None else tuple(dates[lag_order:])
    return Dataset.from_array(values, lag_order, T_B, names, est_dates)


def write_csv(path, data: Dataset, all_dates=None) -> None:
    """Write the full (presample + sample) array with shortest round-trip float formatting."""
    full = data.full_array()
    dates = all_dates
    if dates is None and data.dates is not None:
        dates = [""] * data.lag_order + list(data.dates)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow((["date"] if dates is not None else []) + list(data.variable_names))
        for k, row in enumerate(full):
            lead = [dates[k]] if dates is not None else []
            w.writerow(lead + [repr(float(v)) for v in row])


# restriction specs

_RANGE = re.compile(r"^(\d+)\.\.(\d+)$")


def _int(tok: str, line: int, what: str) -> int:
    try:
        return int(tok)
    except ValueError:
        raise SpecSyntaxError(f"{what} must be an integer, got {tok!r}", line) from None


def _index(tok: str, line: int, what: str) -> int:
    v = _int(tok, line, what)
    if v < 1:
        raise SpecSyntaxError(f"{what} is 1-based, got {v}", line)
    return v - 1


def _direction(tok: str, line: int) -> int:
    if tok in ("+", "-"):
        return 1 if tok == "+" else -1
    raise SpecSyntaxError(f"direction must be + or -, got {tok!r}", line)


def parse_restrictions_text(text: str, label: str = "") -> RestrictionSpec:
    """Parse the line-oriented restriction language (1-based indices).

    zero A0inv i j | zero A0 i j | zero A_l lag i j | zero CIRinf i j | zero IR h i j
    sign IR h i j +|-  and  sign IR h1..h2 i j +|-
    interest j | pool i..k | shocks r_1 ... r_n | normalize A0|C [d_1 ... d_n]
    """
    zeros: list[ZeroRestriction] = []
    signs: list[SignRestriction] = []
    seen_zero: set = set()
    seen_sign: set = set()
    interest = shock_order = directions = None
    sign_rule = "diag_A0_nonneg"
    pools: list[tuple[int, int]] = []
    for ln, raw in enumerate(text.splitlines(), start=1):
        tok = raw.split("#", 1)[0].split()
        if not tok:
            continue
        kw, args = tok[0].lower(), tok[1:]
        try:
            state = _parse_line(kw, args, ln, zeros, signs, seen_zero, seen_sign, pools)
        except SpecSyntaxError:
            raise
        except ValidationError as exc:
            raise SpecSyntaxError(str(exc), ln) from None
        if state is not None:
            key, value = state
            if key == "interest":
                if interest is not None:
                    raise DuplicateRestriction("shock of interest declared twice", ln)
                interest = value
            elif key == "shocks":
                if shock_order is not None:
                    raise DuplicateRestriction("shock order declared twice", ln)
                shock_order = value
            else:
                sign_rule, directions = value
    return RestrictionSpec(
        zeros=tuple(zeros),
        signs=tuple(signs),
        interest=interest,
        pools=tuple(pools),
        shock_order=shock_order,
        sign_rule=sign_rule,
        sign_directions=directions,
        label=label,
    )


def _parse_line(kw, args, ln, zeros, signs, seen_zero, seen_sign, pools):
    """Handle one directive; returns (key, value) for scalar directives, else None."""
    if kw == "zero":
        if not args:
            raise SpecSyntaxError("zero needs a target", ln)
        target = args[0]
        if target == "A_l" or target == "IR":
            if len(args) != 4:
                raise SpecSyntaxError(f"zero {target} expects 3 integers", ln)
            lag = _int(args[1], ln, "lag") if target == "A_l" else _int(args[1], ln, "horizon")
            z = ZeroRestriction("A_l" if target == "A_l" else "IRh",
                                _index(args[2], ln, "row"), _index(args[3], ln, "column"), lag)
        elif target in ("A0inv", "A0", "CIRinf"):
            if len(args) != 3:
                raise SpecSyntaxError(f"zero {target} expects 2 integers", ln)
            z = ZeroRestriction(target, _index(args[1], ln, "row"), _index(args[2], ln, "column"))
        else:
            raise SpecSyntaxError(f"unknown zero target {target!r}", ln)
        key = (z.target, z.i, z.j, z.lag)
        if key in seen_zero:
            raise DuplicateRestriction("repeated zero restriction", ln)
        seen_zero.add(key)
        zeros.append(z)
    elif kw == "sign":
        if len(args) != 5 or args[0] != "IR":
            raise SpecSyntaxError("expected: sign IR h i j +|-", ln)
        m = _RANGE.match(args[1])
        if m:
            h0, h1 = int(m.group(1)), int(m.group(2))
            if h1 < h0:
                raise SpecSyntaxError("empty horizon range", ln)
        else:
            h0 = h1 = _int(args[1], ln, "horizon")
            if h0 < 0:
                raise SpecSyntaxError("horizon must be >= 0", ln)
        s = SignRestriction(_index(args[2], ln, "variable"), _index(args[3], ln, "shock"),
                            h0, _direction(args[4], ln), h1 if h1 != h0 else None)
        for h in s.horizons():
            if (s.i, s.j, h) in seen_sign:
                raise DuplicateRestriction("repeated sign restriction", ln)
            seen_sign.add((s.i, s.j, h))
        signs.append(s)
    elif kw == "interest":
        if len(args) != 1:
            raise SpecSyntaxError("expected: interest j", ln)
        return "interest", _index(args[0], ln, "shock")
    elif kw == "pool":
        m = _RANGE.match(args[0]) if len(args) == 1 else None
        if not m:
            raise SpecSyntaxError("expected: pool i..k", ln)
        lo, hi = int(m.group(1)) - 1, int(m.group(2)) - 1
        if lo < 0 or hi <= lo:
            raise SpecSyntaxError("pool range must satisfy 1 <= i < k", ln)
        if (lo, hi) in pools:
            raise DuplicateRestriction("repeated pool", ln)
        pools.append((lo, hi))
    elif kw == "shocks":
        order = [_index(a, ln, "eigenvalue rank") for a in args]
        if not order or sorted(order) != list(range(len(order))):
            raise SpecSyntaxError("shocks must list a permutation of 1..n", ln)
        return "shocks", tuple(order)
    elif kw == "normalize":
        if not args or args[0] not in ("A0", "C"):
            raise SpecSyntaxError("expected: normalize A0|C [+|- ...]", ln)
        rule = "diag_A0_nonneg" if args[0] == "A0" else "diag_C_nonneg"
        return "normalize", (rule, tuple(_direction(a, ln) for a in args[1:]) or None)
    else:
        raise SpecSyntaxError(f"unknown directive {kw!r}", ln)
    return None


def parse_restrictions(path) -> RestrictionSpec:
    """Restriction spec from a file path or a preset name (``table2-oil``)."""
    key = str(path)
    if key in PRESETS:
        return parse_restrictions_text(PRESETS[key], label=key)
    return parse_restrictions_text(Path(path).read_text(encoding="utf-8"), label=Path(path).name)


# run configuration

ESTIMATORS = ("ols", "gls", "ml", "gibbs")


@dataclass(frozen=True)
class RunConfig:
    """Flat run settings; paths are resolved against the config file's directory."""

    data: str = ""
    break_spec: str = ""
    lag_order: int = 0
    estimator: str = "ml"
    restrictions: str = ""
    pools: str = ""
    prior_v_scale: float = 1e4
    prior_dof: float | None = None
    M: int = 1000
    L: int = 3000
    K: int = 10000
    alpha: float = 0.68
    seed: int = 0
    multistarts: int = 5
    horizons: int = 24
    method: str = "optimize"
    burn_in: int = 1000
    thinning: int = 1
    eta_grid: int = 400
    cumulate: tuple[int, ...] = ()
    shock_names: tuple[str, ...] = ()
    test_level: float = 0.05
    out: str = "out"
    extra: dict = field(default_factory=dict, compare=False)

    def validate(self) -> "RunConfig":
        if not self.data:
            raise ConfigError("config needs 'data'")
        if not Path(self.data).is_file():
            raise ConfigError(f"data file {self.data!r} not found")
        if self.lag_order < 1:
            raise ConfigError("'lag_order' must be a positive integer (no default)")
        if not self.break_spec:
            raise ConfigError("config needs 'break'")
        if self.estimator not in ESTIMATORS:
            raise ConfigError(f"estimator must be one of {ESTIMATORS}")
        if self.restrictions and self.restrictions not in PRESETS and not Path(self.restrictions).is_file():
            raise ConfigError(f"restriction file {self.restrictions!r} not found")
        if not 0 < self.alpha < 1 or not 0 < self.test_level < 1:
            raise ConfigError("alpha and test_level must lie in (0, 1)")
        if min(self.M, self.L, self.K, self.multistarts, self.thinning) < 1 or self.burn_in < 0 or self.horizons < 0:
            raise ConfigError("sampler settings out of range")
        if self.method not in ("optimize", "stochastic"):
            raise ConfigError("method must be optimize or stochastic")
        parse_pools(self.pools)
        return self

    def canonical(self) -> str:
        """Stable key=value text (used for the provenance hash)."""
        lines = []
        for f in fields(self):
            if f.name == "extra":
                continue
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                v = ",".join(str(x) for x in v)
            lines.append(f"{'break' if f.name == 'break_spec' else f.name}={'' if v is None else v}")
        return "\n".join(lines) + "\n"


_KEY_ALIASES = {"break": "break_spec", "lag": "lag_order", "lags": "lag_order", "partition": "pools"}


def _convert(name: str, raw: str):
    ints = {"lag_order", "M", "L", "K", "seed", "multistarts", "horizons", "burn_in", "thinning", "eta_grid"}
    floats = {"prior_v_scale", "alpha", "test_level"}
    if name in ints:
        return int(raw)
    if name in floats:
        return float(raw)
    if name == "prior_dof":
        return float(raw) if raw else None
    if name == "cumulate":
        return tuple(int(x) - 1 for x in raw.replace(" ", "").split(",") if x)
    if name == "shock_names":
        return tuple(x.strip() for x in raw.split(",") if x.strip())
    return raw


def load_config(path, overrides: dict | None = None) -> RunConfig:
    """Parse ``key = value`` lines (``#`` comments).  Relative paths resolve against the file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    known = {f.name for f in fields(RunConfig)} - {"extra"}
    values: dict = {}
    extra: dict = {}
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {ln}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        key = _KEY_ALIASES.get(key, key)
        if key not in known:
            raise ConfigError(f"line {ln}: unknown key {key!r}")
        try:
            values[key] = _convert(key, val)
        except ValueError:
            raise ConfigError(f"line {ln}: bad value for {key!r}: {val!r}") from None
    base = path.parent
    for key in ("data", "out"):
        if key in values and values[key] and not Path(values[key]).is_absolute():
            values[key] = str(base / values[key])
    r = values.get("restrictions", "")
    if r and r not in PRESETS and not Path(r).is_absolute():
        values["restrictions"] = str(base / r)
    # command-line overrides are taken relative to the working directory
    for key, val in (overrides or {}).items():
        if val is not None:
            values[key] = val
    return RunConfig(**values, extra=extra).validate()


def parse_pools(text: str) -> tuple[tuple[int, int], ...]:
    """'2..3' or '1..2, 3..4' (1-based) as 0-based inclusive pairs."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        m = _RANGE.match(part)
        if not m:
            raise ConfigError(f"bad pool range {part!r}")
        out.append((int(m.group(1)) - 1, int(m.group(2)) - 1))
    return tuple(out)


__all__ = [
    "PRESETS",
    "RunConfig",
    "ingest_csv",
    "load_config",
    "parse_pools",
    "parse_restrictions",
    "parse_restrictions_text",
    "read_csv_table",
    "resolve_break",
    "write_csv",
]
