import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import crandn, random_psd
from oracles import alp_pg_oracle, multiblock_pg_oracle, qcqp_grid_oracle
from leobeam.qcqp import (QcqpError, alp_objective, column_objective, solve_multiblock_qcqp,
                          solve_separable_alp, solve_single_constraint_qcqp)


def _power(w, gram):
    return np.einsum("li,ij,lj->", w.conj(), gram, w).real


def test_identity_zero_linear_term_gives_zero():
    w, lam = solve_single_constraint_qcqp(np.eye(3), np.zeros((2, 3)), np.eye(3), 1.0)
    assert lam == 0.0
    assert np.all(w == 0)


def test_scalar_hand_solution():
    w, lam = solve_single_constraint_qcqp(np.zeros((1, 1)), np.ones((1, 1)), np.eye(1), 4.0)
    assert w[0, 0] == pytest.approx(2.0, rel=1e-9)
    assert lam == pytest.approx(0.5, rel=1e-9)


def test_inactive_constraint_returns_unconstrained_solution(rng):
    a = random_psd(rng, 4) + np.eye(4)
    b = crandn(rng, 3, 4) * 0.01
    w, lam = solve_single_constraint_qcqp(a, b, np.eye(4), 100.0)
    assert lam == 0.0
    np.testing.assert_allclose(w, np.linalg.solve(a, b.T).T, rtol=1e-10)


@pytest.mark.parametrize("seed", range(50))
def test_matches_grid_oracle(seed):
    rng = np.random.default_rng(seed)
    n, cols = 4, 3
    a = np.stack([random_psd(rng, n, rank=2) for _ in range(cols)])
    b = crandn(rng, cols, n)
    gram = random_psd(rng, n) + 0.1 * np.eye(n)
    budget = rng.uniform(0.1, 2.0)
    w, lam = solve_single_constraint_qcqp(a, b, gram, budget)
    ours = column_objective(a, b, w)
    primal, dual = qcqp_grid_oracle(a, b, gram, budget)
    assert _power(w, gram) <= budget * (1 + 1e-9)
    assert dual <= ours + 1e-9 * abs(ours)
    assert abs(ours - primal) <= 1e-6 * abs(ours)
    # complementary slackness
    assert lam * (budget - _power(w, gram)) <= 1e-9 * budget * max(lam, 1.0)


def test_singular_gram_with_zero_padding(rng):
    # third column of the analog beamformer is padding: G and A vanish there
    g_full = random_psd(rng, 2) + np.eye(2)
    gram = np.zeros((3, 3), dtype=complex)
    gram[:2, :2] = g_full
    a = np.zeros((3, 3), dtype=complex)
    a[:2, :2] = random_psd(rng, 2)
    b = np.zeros((2, 3), dtype=complex)
    b[:, :2] = crandn(rng, 2, 2)
    w, _ = solve_single_constraint_qcqp(a, b, gram, 0.5)
    assert np.all(w[:, 2] == 0)
    ref, _ = solve_single_constraint_qcqp(a[:2, :2], b[:, :2], g_full, 0.5)
    np.testing.assert_allclose(w[:, :2], ref, rtol=1e-9, atol=1e-12)


def test_unbounded_direction_rejected():
    gram = np.diag([1.0, 0.0]).astype(complex)
    with pytest.raises(QcqpError, match="does not limit"):
        solve_single_constraint_qcqp(np.zeros((2, 2)), np.array([[0.0, 1.0]]), gram, 1.0)


def test_non_psd_input_rejected():
    with pytest.raises(QcqpError, match="semidefinite"):
        solve_single_constraint_qcqp(-np.eye(2), np.ones((1, 2)), np.eye(2), 1.0)
    with pytest.raises(QcqpError, match="Hermitian"):
        solve_single_constraint_qcqp(np.array([[1.0, 1.0], [0.0, 1.0]]), np.ones((1, 2)), np.eye(2), 1.0)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10_000), budget=st.floats(1e-3, 1e3), scale=st.floats(1e-6, 1e6))
def test_kkt_properties(seed, budget, scale):
    rng = np.random.default_rng(seed)
    n = 3
    a = random_psd(rng, n, rank=1) * scale
    b = crandn(rng, 2, n) * scale
    gram = random_psd(rng, n) + 0.05 * np.eye(n)
    w, lam = solve_single_constraint_qcqp(a, b, gram, budget)
    power = _power(w, gram)
    assert power <= budget * (1 + 1e-9)
    if lam > 0:
        assert power >= budget * (1 - 1e-9)
    # stationarity (A + lam G) w = b
    resid = np.einsum("ij,lj->li", a + lam * gram, w) - b
    assert np.abs(resid).max() <= 1e-6 * np.abs(b).max()


# --- multiblock ----------------------------------------------------------------

def _multiblock_instance(rng, num_sats=2, width=3, cols=3, couple=True):
    n = num_sats * width
    a = random_psd(rng, n, rank=3)
    if not couple:
        mask = np.kron(np.eye(num_sats), np.ones((width, width)))
        a = a * mask
    a = a + 0.01 * np.eye(n)
    b = crandn(rng, cols, n)
    grams = np.stack([random_psd(rng, width) + 0.2 * np.eye(width) for _ in range(num_sats)])
    budgets = rng.uniform(0.2, 1.0, size=num_sats)
    return a, b, grams, budgets


def test_multiblock_single_satellite_matches_single_solver(rng):
    a, b, grams, budgets = _multiblock_instance(rng, num_sats=1)
    w, trace = solve_multiblock_qcqp(a, b, grams, budgets, np.ones((1, 3), bool))
    ref, _ = solve_single_constraint_qcqp(a, b, grams[0], budgets[0])
    np.testing.assert_allclose(w[0].T, ref, rtol=1e-12, atol=1e-14)


def test_multiblock_uncoupled_converges_in_one_round(rng):
    a, b, grams, budgets = _multiblock_instance(rng, couple=False)
    w, trace = solve_multiblock_qcqp(a, b, grams, budgets, np.ones((2, 3), bool), max_rounds=10)
    assert len(trace) <= 3      # start, one productive round, one confirming round
    for s in range(2):
        blk = slice(3 * s, 3 * s + 3)
        ref, _ = solve_single_constraint_qcqp(a[blk, blk], b[:, blk], grams[s], budgets[s])
        np.testing.assert_allclose(w[s].T, ref, rtol=1e-9, atol=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_multiblock_matches_projected_gradient(seed):
    rng = np.random.default_rng(100 + seed)
    a, b, grams, budgets = _multiblock_instance(rng)
    active = np.ones((2, 3), bool)
    w, trace = solve_multiblock_qcqp(a, b, grams, budgets, active, tol=1e-13, max_rounds=2000)
    _, ref = multiblock_pg_oracle(a, b, grams, budgets)
    assert abs(trace[-1] - ref) <= 1e-4 * abs(ref)
    assert all(y <= x + 1e-9 * max(1.0, abs(x)) for x, y in zip(trace, trace[1:]))


def test_multiblock_respects_inactive_columns(rng):
    a, b, grams, budgets = _multiblock_instance(rng)
    active = np.array([[True, False, True], [False, True, True]])
    w, _ = solve_multiblock_qcqp(a, b, grams, budgets, active)
    assert np.all(w[0][:, 1] == 0) and np.all(w[1][:, 0] == 0)
    for s in range(2):
        assert np.einsum("il,ij,jl->", w[s].conj(), grams[s], w[s]).real <= budgets[s] * (1 + 1e-9)


# --- separable ALP -------------------------------------------------------------

def _alp_instance(rng, num_sats=3, num_uts=4):
    locals_ = np.empty((num_sats, num_uts + 2, num_uts), dtype=complex)
    locals_[:, 0] = crandn(rng, num_sats, num_uts)
    locals_[:, 1:] = rng.uniform(-0.2, 1.0, size=(num_sats, num_uts + 1, num_uts))
    duals = crandn(rng, num_sats, num_uts + 2, num_uts) * 0.3
    nu = rng.uniform(0.5, 3.0, num_uts)
    mu = crandn(rng, num_uts)
    return nu, mu, locals_, duals


def test_alp_pure_penalty_is_clamped_mean(rng):
    _, mu, locals_, _ = _alp_instance(rng)
    out = solve_separable_alp(np.zeros(4), mu, 1.0, locals_, np.zeros_like(locals_), 1.0)
    mean = locals_.mean(axis=0)
    np.testing.assert_allclose(out[0], mean[0], rtol=1e-12)
    np.testing.assert_allclose(out[1:].real, np.maximum(mean[1:].real, 0), rtol=1e-12, atol=1e-15)


def test_alp_huge_penalty_returns_single_copy(rng):
    nu, mu, locals_, _ = _alp_instance(rng, num_sats=1)
    out = solve_separable_alp(nu, mu, 1.0, locals_, np.zeros_like(locals_), 1e12)
    np.testing.assert_allclose(out[0], locals_[0, 0], atol=1e-9)
    np.testing.assert_allclose(out[1:].real, np.maximum(locals_[0, 1:].real, 0), atol=1e-9)


@pytest.mark.parametrize("seed", range(10))
def test_alp_matches_projected_gradient(seed):
    rng = np.random.default_rng(seed)
    nu, mu, locals_, duals = _alp_instance(rng)
    rho = rng.uniform(0.5, 5.0)
    ours = solve_separable_alp(nu, mu, 1.0, locals_, duals, rho)
    ref = alp_pg_oracle(nu, mu, locals_, duals, rho)
    f_ours = alp_objective(ours, nu, mu, 1.0, locals_, duals, rho)
    f_ref = alp_objective(ref, nu, mu, 1.0, locals_, duals, rho)
    assert abs(f_ours - f_ref) <= 1e-8 * abs(f_ref)
    assert f_ours <= f_ref + 1e-12 * abs(f_ref)
    np.testing.assert_allclose(ours, ref, atol=1e-8)


def test_alp_rejects_nonpositive_rho(rng):
    nu, mu, locals_, duals = _alp_instance(rng)
    with pytest.raises(ValueError, match="rho"):
        solve_separable_alp(nu, mu, 1.0, locals_, duals, 0.0)
