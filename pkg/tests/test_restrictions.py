from dataclasses import replace

import numpy as np
import pytest

from hsvar.errors import HorizonExceeded, IndexOutOfBounds, ValidationError
from hsvar.identification import pool_eigenvalues, point_rotation, solve_eigen, structural_params
from hsvar.io import parse_restrictions_text
from hsvar.reduced_form import ReducedForm, long_run_multiplier, vma_coefficients
from hsvar.restrictions import (
    RestrictionSpec,
    SignRestriction,
    ZeroRestriction,
    classify,
    compile,
    order_variables,
)

C = np.array([[1.0, 0.3, 0.1], [0.3, 1.0, -0.2], [-0.5, 0.4, 1.0]])
B = np.hstack([np.array([[0.1], [0.0], [-0.1]]), np.array([[0.5, 0.1, 0.0], [0.0, 0.3, 0.1], [0.05, 0.0, 0.2]])])


@pytest.fixture
def rf():
    return ReducedForm(B, C @ C.T, C @ np.diag([4.0, 1.0, 0.25]) @ C.T)


def _program(spec, rf, H=12):
    norm = spec.normalization()
    return compile(spec, rf, vma_coefficients(rf, H), norm), solve_eigen(rf, norm)


@pytest.mark.parametrize("i, j", [(0, 1), (2, 0), (1, 2)])
def test_zero_rows_evaluate_structural_entries(rf, i, j):
    spec = RestrictionSpec(zeros=(
        ZeroRestriction("A0inv", i, j),
        ZeroRestriction("A0", i, j),
        ZeroRestriction("A_l", i, j, lag=1),
        ZeroRestriction("CIRinf", i, j),
        ZeroRestriction("IRh", i, j, lag=3),
    ))
    prog, sol = _program(spec, rf)
    Q = sol.Q
    sp = structural_params(rf, sol)
    vma = vma_coefficients(rf, 12)
    # rows acting on column j (A0inv, CIRinf, IRh) and on column i (A0, A_l)
    Fj, Fi = prog.F[j], prog.F[i]
    if i == j:
        pytest.skip("diagonal pair")
    assert Fj.shape[0] == 3 and Fi.shape[0] == 2
    np.testing.assert_allclose(Fj[0] @ Q[:, j], sp.C[i, j], atol=1e-12)
    np.testing.assert_allclose(Fi[0] @ Q[:, i], sp.A0[i, j], atol=1e-12)
    np.testing.assert_allclose(Fi[1] @ Q[:, i], (sp.A0 @ rf.lag_matrix(1))[i, j], atol=1e-12)
    np.testing.assert_allclose(Fj[1] @ Q[:, j], (long_run_multiplier(rf) @ sp.C)[i, j], atol=1e-12)
    np.testing.assert_allclose(Fj[2] @ Q[:, j], (vma.C[3] @ sp.C)[i, j], atol=1e-12)


def test_sign_rows_carry_direction(rf):
    spec = RestrictionSpec(signs=(SignRestriction(0, 1, 0, -1, h_end=2),))
    prog, sol = _program(spec, rf)
    assert prog.S[1].shape == (3, 3)
    vma = vma_coefficients(rf, 12)
    for h in range(3):
        np.testing.assert_allclose(prog.S[1][h] @ sol.Q[:, 1], -(vma.C[h] @ sol.C)[0, 1], atol=1e-12)
    # sigma is the normalization vector, not a restriction
    assert np.all(np.einsum("ic,ic->c", prog.sigma, sol.Q) >= 0)


def test_horizon_and_index_checks(rf):
    spec = RestrictionSpec(signs=(SignRestriction(0, 1, 20, 1),))
    with pytest.raises(HorizonExceeded):
        compile(spec, rf, vma_coefficients(rf, 12))
    with pytest.raises(IndexOutOfBounds):
        RestrictionSpec(zeros=(ZeroRestriction("A0inv", 3, 0),)).validate(3)
    with pytest.raises(IndexOutOfBounds):
        RestrictionSpec(zeros=(ZeroRestriction("A_l", 0, 0, lag=2),)).validate(3, lag_order=1)
    with pytest.raises(ValidationError):
        ZeroRestriction("A_l", 0, 0, lag=0)
    with pytest.raises(ValidationError):
        SignRestriction(0, 0, 0, 2)


@pytest.mark.parametrize(
    "text, tag",
    [
        ("pool 2..3\n", "set_identified"),
        ("pool 2..3\nzero A0inv 1 2\n", "point_identified"),
        ("pool 2..3\nzero A0inv 1 2\nzero A0inv 3 2\n", "over_restricted"),
        ("pool 1..3\nzero A0inv 1 1\nzero A0inv 2 1\nzero A0inv 1 2\n", "point_identified"),
        ("pool 1..3\nzero A0inv 1 1\nzero A0inv 1 2\n", "set_identified"),
        ("", "point_identified"),
    ],
)
def test_classification(rf, text, tag):
    spec = parse_restrictions_text(text)
    prog, sol = _program(spec, rf)
    sol = pool_eigenvalues(sol, spec.partition(3))
    assert classify(prog, spec.partition(3), sol).tag == tag


def test_point_rotation_satisfies_zero(rf):
    spec = parse_restrictions_text("pool 2..3\nzero A0inv 1 2\n")
    prog, sol = _program(spec, rf)
    sol = pool_eigenvalues(sol, spec.partition(3))
    prog = order_variables(prog, spec.partition(3))
    Q = point_rotation(sol, prog)
    Cq = sol.L @ Q
    assert abs(Cq[0, 1]) < 1e-10
    np.testing.assert_allclose(Q.T @ Q, np.eye(3), atol=1e-12)
    # the rotation stays in the pooled eigenspace and keeps the distinct column
    np.testing.assert_allclose(Q[:, 0], sol.Q[:, 0])
    np.testing.assert_allclose(Cq @ Cq.T, rf.omega1, atol=1e-10)


def test_redundant_zero_pattern_is_flagged():
    # variable 1 does not respond on impact to either pooled shock, so the
    # single zero holds on the whole block and pins nothing down
    Ct = np.array([[1.0, 0.0, 0.0], [0.3, 1.0, -0.2], [-0.5, 0.4, 1.0]])
    rf = ReducedForm(np.zeros((3, 4)), Ct @ Ct.T, Ct @ np.diag([4.0, 1.0, 1.0]) @ Ct.T)
    spec = parse_restrictions_text("pool 2..3\nzero A0inv 1 2\n")
    prog, sol = _program(spec, rf)
    st = classify(prog, spec.partition(3), pool_eigenvalues(sol, spec.partition(3)))
    assert st.tag == "set_identified" and st.redundant


def test_order_variables_ties_favour_interest(rf):
    spec = parse_restrictions_text("pool 1..3\nzero A0inv 1 3\ninterest 2\n")
    prog, _ = _program(spec, rf)
    ordered = order_variables(prog, spec.partition(3))
    assert ordered.order == ((2, 1, 0),)


@pytest.mark.parametrize(
    "text, tag",
    [
        ("pool 2..3\ninterest 2\nsign IR 0 1 2 +\n", "cond1"),
        ("pool 1..3\ninterest 3\nzero A0inv 1 1\nsign IR 0 1 3 +\n", "cond2"),
        ("pool 1..3\ninterest 2\nzero A0inv 1 1\nzero A0inv 2 1\nsign IR 0 1 2 +\n", "cond3"),
        ("pool 2..3\ninterest 2\nsign IR 0 1 2 +\nsign IR 0 1 3 +\n", "none"),
    ],
)
def test_convexity_tags_and_feasibility(rf, text, tag):
    spec = parse_restrictions_text(text)
    prog, sol = _program(spec, rf)
    partition = spec.partition(3)
    st = classify(order_variables(prog, partition), partition, pool_eigenvalues(sol, partition))
    assert st.convexity == tag
    if tag != "none":
        assert st.sign_feasible is True


def test_infeasible_signs_detected(rf):
    spec = parse_restrictions_text("pool 2..3\ninterest 2\nsign IR 0 1 2 +\n")
    prog, sol = _program(spec, rf)
    # append the opposite row: the response must be both >= 0 and <= 0 with strict slack
    S = list(prog.S)
    S[1] = np.vstack([S[1], -S[1]])
    prog = replace(prog, S=tuple(S))
    partition = spec.partition(3)
    st = classify(order_variables(prog, partition), partition, pool_eigenvalues(sol, partition))
    assert st.sign_feasible is False
