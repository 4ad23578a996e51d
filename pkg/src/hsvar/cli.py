"""Command-line front end.

    hsvar simulate --scenario m2 --out DIR     write data.csv, restrictions.txt and config.txt
    hsvar estimate|test-het|identify|bounds|run --config FILE [--seed N] [--out DIR]

Exit codes: 0 success, 2 invalid input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .errors import HsvarError, NumericalError, ValidationError
from .io import load_config, write_csv
from .scenarios import SCENARIOS, get_scenario
from .simulate import simulate

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 2, 3


def _print_matrix(name: str, a: np.ndarray) -> None:
    print(f"{name} =")
    for row in np.atleast_2d(a):
        print("  " + " ".join(f"{v:>11.5g}" for v in row))


def cmd_simulate(args) -> int:
    sc = get_scenario(args.scenario, args.T, args.break_at)
    data = simulate(sc.truth, sc.T, sc.T_B, seed=args.seed, names=sc.names)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "data.csv", data)
    (out / "restrictions.txt").write_text(sc.restrictions, encoding="utf-8")
    config = [
        f"# simulated scenario {sc.name}",
        "data = data.csv",
        f"break = {sc.T_B + sc.lag_order}",
        f"lag_order = {sc.lag_order}",
        "estimator = ml",
        "restrictions = restrictions.txt",
        f"seed = {args.seed}",
        f"M = {args.M}",
        "horizons = 24",
        "shock_names = " + ",".join(f"shock{k + 1}" for k in range(sc.truth.n)),
        "out = results",
    ]
    (out / "config.txt").write_text("\n".join(config) + "\n", encoding="utf-8")
    print(f"wrote {out / 'data.csv'} (T = {data.T}, T_B = {data.break_index}) with config {out / 'config.txt'}")
    return EXIT_OK


def _config(args):
    return load_config(args.config, {"seed": args.seed, "out": args.out})


def cmd_estimate(args) -> int:
    from .pipeline import estimate, load_inputs

    config = _config(args)
    data, _ = load_inputs(config)
    rf = estimate(data, config)
    _print_matrix("B", rf.B)
    _print_matrix("Omega_1", rf.omega1)
    _print_matrix("Omega_2", rf.omega2)
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    payload = {"B": rf.B.tolist(), "omega1": rf.omega1.tolist(), "omega2": rf.omega2.tolist(),
               "estimator": config.estimator, "stable": bool(rf.stable)}
    (out / "estimate.json").write_text(json.dumps(payload, indent=1) + "\n", encoding="utf-8")
    return EXIT_OK


def cmd_test_het(args) -> int:
    from .pipeline import eigen_solution, estimate, het_tests, load_inputs

    config = _config(args)
    data, spec = load_inputs(config)
    rf = estimate(data, config)
    sol = eigen_solution(rf, spec)
    tests = het_tests(sol, data, rf)
    print("eigenvalues: " + " ".join(f"{v:.6g}" for v in sol.lam))
    print(f"kappa_1 = {tests[0].kappa1:.4f}  kappa_2 = {tests[0].kappa2:.4f}")
    print(f"{'hypothesis':<32} {'statistic':>10} {'dof':>4} {'p-value':>8}")
    for t in tests:
        print(f"{t.hypothesis:<32} {t.statistic:>10.4f} {t.dof:>4} {t.p_value:>8.4f}")
    return EXIT_OK


def cmd_identify(args) -> int:
    from .pipeline import eigen_solution, estimate, identify, load_inputs

    config = _config(args)
    data, spec = load_inputs(config)
    rf = estimate(data, config)
    sol = eigen_solution(rf, spec)
    st = identify(spec, rf, sol, config.horizons)
    _print_matrix("C (user shock order)", sol.user_C())
    print("Lambda (user shock order): " + " ".join(f"{v:.6g}" for v in sol.user_lambda()))
    print(f"status: {st.tag}")
    for b in st.blocks:
        print(f"  block {[c + 1 for c in b.columns]}  m = {b.m}  f = {list(b.f)}")
    print(f"convexity: {st.convexity}  sign feasible: {st.sign_feasible}  redundant: {st.redundant}")
    for note in st.notes:
        print(f"note: {note}")
    return EXIT_OK


def cmd_bounds(args) -> int:
    from .pipeline import band_payload, compute_bands, load_inputs, write_band_files

    config = _config(args)
    data, spec = load_inputs(config)
    res = compute_bands(data, spec, config)
    payload, _ = band_payload(res)
    files = write_band_files(Path(config.out), payload, res.has_bounds)
    print(f"accepted {res.accepted} of {res.attempts} draws; wrote {len(files)} band files to {config.out}")
    return EXIT_OK


def cmd_run(args) -> int:
    from .pipeline import render_text, run

    report = run(_config(args))
    print(render_text(report).split("\nResponse of", 1)[0].rstrip())
    print(f"\nwrote report.json, report.txt and {len(report['files'])} band files to {_config(args).out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hsvar", description="Heteroskedastic SVAR identification and robust-Bayes bands")
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("simulate", help="simulate a scenario dataset with a runnable config")
    s.add_argument("--scenario", choices=SCENARIOS, default="m2")
    s.add_argument("--T", type=int, default=480)
    s.add_argument("--break-at", type=int, default=None, help="regime-1 length T_B (default T/2)")
    s.add_argument("--M", type=int, default=1000, help="draw count written to the config")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", default="scenario")
    s.set_defaults(func=cmd_simulate)
    for name, func, help_ in (
        ("estimate", cmd_estimate, "reduced-form estimates"),
        ("test-het", cmd_test_het, "eigenvalues and equality tests"),
        ("identify", cmd_identify, "eigen solution and identification status"),
        ("bounds", cmd_bounds, "posterior bands only"),
        ("run", cmd_run, "full pipeline with report"),
    ):
        c = sub.add_parser(name, help=help_)
        c.add_argument("--config", required=True)
        c.add_argument("--seed", type=int, default=None)
        c.add_argument("--out", default=None)
        c.set_defaults(func=func)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (NumericalError, HsvarError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
