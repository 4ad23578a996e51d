"""End-to-end run: estimate, eigen solve, test cascade, classification and bands."""

from __future__ import annotations

import contextlib
import hashlib
import json
import platform
import re
from dataclasses import replace
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .bounds import AlgoConfig, BoundsResult, point_identified_irfs, run_algorithm1
from .errors import HsvarError, NumericalError
from .gibbs import GibbsConfig, default_diffuse_prior, run_gibbs
from .het_test import HetTestResult, test_suite
from .identification import EigenIdentification, pool_eigenvalues, solve_eigen
from .io import RunConfig, ingest_csv, parse_pools, parse_restrictions
from .reduced_form import Dataset, ReducedForm, gls_estimate, ml_estimate, ols_estimate, vma_coefficients
from .restrictions import IdStatus, RestrictionSpec, classify, compile, order_variables

BAND_COLUMNS = ("horizon", "mean", "hpd_lo", "hpd_hi", "pmb_lo", "pmb_hi", "rcr_lo", "rcr_hi")


@contextlib.contextmanager
def stage(name: str):
    """Prefix errors raised inside with the pipeline stage name."""
    try:
        yield
    except HsvarError as exc:
        if not getattr(exc, "stage", None):
            exc.stage = name
            exc.args = (f"[{name}] {exc.args[0] if exc.args else ''}",) + exc.args[1:]
        raise


def load_inputs(config: RunConfig) -> tuple[Dataset, RestrictionSpec]:
    with stage("ingest"):
        data = ingest_csv(config.data, config.lag_order, config.break_spec)
    with stage("restrictions"):
        spec = parse_restrictions(config.restrictions) if config.restrictions else RestrictionSpec()
        if config.pools:
            spec = replace(spec, pools=spec.pools + parse_pools(config.pools))
        spec.validate(data.n, data.lag_order)
    return data, spec


def make_prior(data: Dataset, config: RunConfig):
    return default_diffuse_prior(data.n, data.m, config.prior_v_scale, config.prior_dof)


def estimate(data: Dataset, config: RunConfig) -> ReducedForm:
    with stage("estimate"):
        if config.estimator == "ols":
            return ols_estimate(data)
        if config.estimator == "gls":
            return gls_estimate(data)
        if config.estimator == "ml":
            return ml_estimate(data)
        draws = run_gibbs(data, make_prior(data, config),
                          GibbsConfig(config.M, config.burn_in, config.thinning, config.seed))
        return replace(draws.mean(), info={"estimator": "gibbs posterior mean", "draws": config.M})


def eigen_solution(rf: ReducedForm, spec: RestrictionSpec) -> EigenIdentification:
    with stage("eigen"):
        return solve_eigen(rf, spec.normalization())


def het_tests(sol: EigenIdentification, data: Dataset, rf: ReducedForm) -> list[HetTestResult]:
    with stage("het-test"):
        return test_suite(sol, data, rf)


def identify(spec: RestrictionSpec, rf: ReducedForm, sol: EigenIdentification, horizons: int = 0) -> IdStatus:
    with stage("identify"):
        norm = spec.normalization()
        vma = vma_coefficients(rf, max(horizons, spec.max_horizon()))
        program = compile(spec, rf, vma, norm)
        partition = spec.partition(rf.n)
        return classify(order_variables(program, partition), sol=pool_eigenvalues(sol, partition))


def algo_config(config: RunConfig) -> AlgoConfig:
    return AlgoConfig(
        M=config.M, L=config.L, multistarts=config.multistarts, K=config.K, eta_grid=config.eta_grid,
        alpha=config.alpha, seed=config.seed, horizons=config.horizons, method=config.method,
        burn_in=config.burn_in, thinning=config.thinning, cumulate=config.cumulate,
    )


def compute_bands(data: Dataset, spec: RestrictionSpec, config: RunConfig) -> BoundsResult:
    """Distinct-eigenvalue branch without pools, Algorithm 1 otherwise."""
    prior = make_prior(data, config)
    names = config.shock_names or None
    with stage("bounds"):
        if not spec.pools:
            return point_identified_irfs(data, prior, spec, algo_config(config), names)
        return run_algorithm1(data, prior, spec, algo_config(config), names)


# serialization


def _slug(s: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]+", "_", s)


def provenance(config: RunConfig) -> dict:
    canonical = config.canonical()
    digest = hashlib.sha256(canonical.encode())
    with contextlib.suppress(OSError):
        digest.update(Path(config.data).read_bytes())
    return {
        "seed": config.seed,
        "config_hash": digest.hexdigest(),
        "config": canonical,
        "versions": {
            "artifact": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": platform.python_version(),
        },
    }


def _floats(a) -> list:
    return np.asarray(a, dtype=float).tolist()


def band_payload(res: BoundsResult) -> tuple[dict, int]:
    """Nested {shock: {variable: columns}} plus the count of soft-ordering violations."""
    bands = res.bands()
    info = res.informativeness() if res.has_bounds else None
    out: dict = {}
    soft = 0
    for j, shock in enumerate(res.shock_names):
        out[shock] = {}
        for g, var in enumerate(res.variable_names):
            cols = {k: v[j, g] for k, v in bands.items()}
            if res.has_bounds:
                if np.any(cols["pmb_lo"] > cols["pmb_hi"]):
                    raise NumericalError("posterior-mean lower bound exceeds upper bound")
                soft += int(np.sum((cols["rcr_lo"] > cols["pmb_lo"] + 1e-12) | (cols["pmb_hi"] > cols["rcr_hi"] + 1e-12)))
            entry = {k: _floats(v) for k, v in cols.items()}
            entry["horizon"] = list(range(res.horizons + 1))
            if info is not None:
                entry["informativeness"] = _floats(info[j, g])
            out[shock][var] = entry
    return out, soft


def write_band_files(out_dir: Path, payload: dict, has_bounds: bool) -> list[str]:
    cols = BAND_COLUMNS if has_bounds else BAND_COLUMNS[:4]
    folder = out_dir / "bands"
    folder.mkdir(parents=True, exist_ok=True)
    written = []
    for shock, per_var in payload.items():
        for var, entry in per_var.items():
            path = folder / f"{_slug(shock)}__{_slug(var)}.csv"
            lines = [",".join(cols)]
            for h in entry["horizon"]:
                lines.append(",".join([str(h)] + [repr(entry[c][h]) for c in cols[1:]]))
            path.write_text("\n".join(lines) + "\n", encoding="utf-8")
            written.append(str(path.relative_to(out_dir)))
    return written


def _status_dict(st: IdStatus) -> dict:
    return {
        "tag": st.tag,
        "blocks": [{"columns": [c + 1 for c in b.columns], "m": b.m, "f": list(b.f)} for b in st.blocks],
        "convexity": st.convexity,
        "sign_feasible": st.sign_feasible,
        "redundant": st.redundant,
        "notes": list(st.notes),
    }


def _test_dict(t: HetTestResult) -> dict:
    return {"hypothesis": t.hypothesis, "statistic": t.statistic, "dof": t.dof, "p_value": t.p_value}


def render_text(report: dict) -> str:
    """Human-readable report: tables first, bands per shock after."""
    out = ["HSVAR report", "============", ""]
    d = report["data"]
    out.append(f"variables: {', '.join(d['variables'])}   T = {d['T']}   T_B = {d['T_B']}   lags = {d['lag_order']}")
    out.append(f"estimator: {report['estimator']}")
    out += ["", "Eigenvalues (descending)", "  rank  lambda        shock"]
    for e in report["eigenvalues"]:
        out.append(f"  {e['rank']:>4}  {e['lambda']:<12.6g}  {e['shock']}")
    k1, k2 = report["kurtosis"]
    out += ["", f"Tests of equal eigenvalues (kappa_1 = {k1:.4f}, kappa_2 = {k2:.4f})",
            "  hypothesis                       statistic    dof  p-value"]
    for t in report["het_tests"]:
        out.append(f"  {t['hypothesis']:<32} {t['statistic']:>10.4f}  {t['dof']:>4}  {t['p_value']:.4f}")
    st = report["identification"]
    out += ["", f"Identification: {st['tag']}  (convexity: {st['convexity']}, sign feasible: {st['sign_feasible']})"]
    for b in st["blocks"]:
        out.append(f"  block {b['columns']}  m = {b['m']}  f = {b['f']}")
    out += [f"  note: {n}" for n in st["notes"]]
    out += ["", f"Branch: {report['branch']}"]
    out += [f"  warning: {w}" for w in report["warnings"]]
    dr = report["draws"]
    out.append(f"  accepted {dr['accepted']} of {dr['attempts']} draws; emptiness rate {dr['emptiness_rate']:.4f}; unstable {dr['unstable']}")
    for shock, per_var in report["irf"].items():
        for var, e in per_var.items():
            out += ["", f"Response of {var} to {shock}"]
            cols = [c for c in BAND_COLUMNS[1:] if c in e] + (["informativeness"] if "informativeness" in e else [])
            out.append("  h   " + "".join(f"{c:>12}" for c in cols))
            for h in e["horizon"]:
                out.append(f"  {h:<3} " + "".join(f"{e[c][h]:>12.5g}" for c in cols))
    out += ["", "Provenance", f"  seed: {report['provenance']['seed']}",
            f"  config hash: {report['provenance']['config_hash']}"]
    out += [f"  {k}: {v}" for k, v in report["provenance"]["versions"].items()]
    return "\n".join(out) + "\n"


def run(config: RunConfig, write: bool = True) -> dict:
    """Full pipeline; writes report.json, report.txt and bands/*.csv under config.out."""
    return run_with_result(config, write)[0]


def run_with_result(config: RunConfig, write: bool = True) -> tuple[dict, BoundsResult]:
    """:func:`run` that also returns the per-draw bounds behind the report."""
    data, spec = load_inputs(config)
    rf = estimate(data, config)
    sol = eigen_solution(rf, spec)
    tests = het_tests(sol, data, rf)
    status = identify(spec, rf, sol, config.horizons)
    warnings = []
    rejected = [t for t in tests if t.r == 2 and t.p_value < config.test_level]
    if not spec.pools:
        branch = "point_identified_irfs"
        not_rejected = [t for t in tests if t.r == 2 and t.p_value >= config.test_level]
        if not_rejected:
            warnings.append(
                "no pooling declared but equality is not rejected for "
                + "; ".join(t.hypothesis for t in not_rejected)
            )
    else:
        branch = "robust_bayes"
        pooled = {(lo, hi) for lo, hi in spec.pools}
        for t in rejected:
            if any(lo <= t.s and t.s + 1 <= hi for lo, hi in pooled):
                warnings.append(f"pooled eigenvalues reject equality: {t.hypothesis}")
    if status.tag == "over_restricted":
        warnings.append("restrictions over-identify the pooled block")
    res = compute_bands(data, spec, config)
    payload, soft = band_payload(res)
    if soft:
        warnings.append(f"{soft} band rows with rcr not enclosing the posterior-mean bounds")
    cols = spec.normalization().shock_of_column(data.n)
    names = res.shock_names
    report = {
        "provenance": provenance(config),
        "data": {"variables": list(data.variable_names), "T": data.T, "T_B": data.break_index,
                 "lag_order": data.lag_order,
                 "break_date": data.dates[data.break_index - 1] if data.dates else None},
        "estimator": rf.info.get("estimator", config.estimator),
        "eigenvalues": [{"rank": r + 1, "lambda": float(sol.lam[r]), "shock": names[int(cols[r])]}
                        for r in range(data.n)],
        "kurtosis": [tests[0].kappa1, tests[0].kappa2],
        "het_tests": [_test_dict(t) for t in tests],
        "identification": _status_dict(status),
        "branch": branch,
        "warnings": warnings,
        "draws": {"accepted": res.accepted, "attempts": res.attempts, "empty": res.empty,
                  "unstable": res.unstable, "emptiness_rate": res.emptiness_rate},
        "alpha": config.alpha,
        "point_shocks": dict(zip(names, res.point_shocks)),
        "cumulated": [data.variable_names[g] for g in res.cumulated],
        "irf": payload,
    }
    if write:
        out = Path(config.out)
        out.mkdir(parents=True, exist_ok=True)
        report["files"] = write_band_files(out, payload, res.has_bounds)
        (out / "report.json").write_text(json.dumps(report, indent=1, sort_keys=True) + "\n", encoding="utf-8")
        (out / "report.txt").write_text(render_text(report), encoding="utf-8")
    return report, res
