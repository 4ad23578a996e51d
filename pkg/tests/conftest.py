"""Shared fixtures and the per-criterion acceptance summary."""

from __future__ import annotations

import numpy as np
import pytest

from hsvar.reduced_form import ReducedForm

_OUTCOMES: dict[int, dict] = {}


def random_spd(rng, n, scale=1.0):
    A = rng.standard_normal((n, n))
    return scale * (A @ A.T + n * np.eye(n)) / n


def random_orthogonal(rng, n):
    Q, R = np.linalg.qr(rng.standard_normal((n, n)))
    return Q * np.sign(np.diag(R))


def random_rf(rng, n, lam, lag_order=1):
    """Reduced form with Omega_1 = C C' and Omega_2 = C diag(lam) C' for a random C."""
    C = rng.standard_normal((n, n)) + 2.0 * np.eye(n)
    B = np.hstack([rng.standard_normal((n, 1)) * 0.1] + [0.3 * np.eye(n) / (k + 1) for k in range(lag_order)])
    return ReducedForm(B, C @ C.T, C @ np.diag(lam) @ C.T), C


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(id, title): gating acceptance criterion")


def pytest_runtest_makereport(item, call):
    mark = item.get_closest_marker("acceptance")
    if mark is None or not mark.args:
        return
    cid = int(mark.args[0])
    title = mark.args[1] if len(mark.args) > 1 else ""
    rec = _OUTCOMES.setdefault(cid, {"title": title, "passed": True, "ran": False, "detail": []})
    if call.when == "call" or (call.when == "setup" and call.excinfo is not None):
        if call.excinfo is not None and call.excinfo.errisinstance(pytest.skip.Exception):
            return
        rec["ran"] = True
        if call.excinfo is not None:
            rec["passed"] = False
            rec["detail"].append(item.name)


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(_OUTCOMES):
        rec = _OUTCOMES[cid]
        if not rec["ran"]:
            status = "SKIP"
        else:
            status = "PASS" if rec["passed"] else "FAIL"
        extra = f"  (failed: {', '.join(rec['detail'])})" if rec["detail"] else ""
        terminalreporter.write_line(f"criterion {cid:>2} {status}  {rec['title']}{extra}")
