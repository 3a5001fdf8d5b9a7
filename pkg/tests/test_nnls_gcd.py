import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from symnmf.core import NnlsSubproblem, RankDeficientError, build_subproblem
from symnmf.nnls_bpp import bpp_solve_matrix
from symnmf.nnls_gcd import (
    CorrectionLog,
    GcdColumnState,
    GcdConfig,
    apply_correction,
    best_correction,
    compute_mu,
    gcd_solve_matrix,
)


def phi(Q, p, x):
    return 0.5 * x @ Q @ x - p @ x


def spd(r, k):
    M = r.standard_normal((k, k))
    return M @ M.T + 0.5 * np.eye(k)


def test_best_correction_examples():
    c = best_correction(GcdColumnState(np.zeros(2), np.array([-3.0, -1.0])), np.eye(2))
    assert (c.index, c.step, c.decrease) == (0, 3.0, 4.5)
    c = best_correction(GcdColumnState(np.array([1.0, 0.0]), np.array([2.0, 0.0])), np.eye(2))
    assert (c.index, c.step, c.decrease) == (0, -1.0, 1.5)


def test_best_correction_ties_pick_smallest_index():
    c = best_correction(GcdColumnState(np.zeros(3), np.array([-1.0, -2.0, -2.0])), np.eye(3))
    assert c.index == 1


def test_best_correction_rank_deficient():
    with pytest.raises(RankDeficientError):
        best_correction(GcdColumnState(np.zeros(2), np.array([-1.0, 0.0])), np.diag([1.0, 0.0]))


@pytest.mark.parametrize("seed", range(10))
def test_best_correction_is_argmax_of_direct_decrease(seed):
    r = np.random.default_rng(seed)
    Q = spd(r, 4)
    p = r.standard_normal(4)
    x = np.maximum(r.standard_normal(4), 0)
    state = GcdColumnState(x.copy(), Q @ x - p)
    # oracle: minimize phi along each axis on a fine grid of feasible steps, then refine exactly
    decreases = []
    for i in range(4):
        lo = -x[i]
        cand = np.concatenate([[lo], np.linspace(lo, lo + 50, 200001)])
        vals = [phi(Q, p, x + t * np.eye(4)[i]) for t in cand[::1000]]
        t0 = cand[::1000][int(np.argmin(vals))]
        fine = np.linspace(max(lo, t0 - 0.3), t0 + 0.3, 20001)
        best_val = min(phi(Q, p, x + t * np.eye(4)[i]) for t in fine)
        decreases.append(phi(Q, p, x) - best_val)
    c = best_correction(state, Q)
    assert c.index == int(np.argmax(decreases))
    assert c.decrease == pytest.approx(max(decreases), rel=1e-5, abs=1e-9)
    assert phi(Q, p, x) - phi(Q, p, x + c.step * np.eye(4)[c.index]) == pytest.approx(c.decrease, abs=1e-10)


def test_compute_mu_examples():
    assert compute_mu(NnlsSubproblem(np.eye(1), np.array([[3.0]])), np.zeros((1, 1))) == 4.5
    C = np.eye(2)
    B = np.array([[1.0, 0.0], [0.0, 2.0]])
    assert compute_mu(build_subproblem(C, B), B.copy()) <= 1e-12


def test_compute_mu_matches_exhaustive_scan(rng):
    Q = spd(rng, 3)
    P = rng.standard_normal((3, 5))
    X0 = np.maximum(rng.standard_normal((3, 5)), 0)
    best = 0.0
    for h in range(5):
        for i in range(3):
            x = X0[:, h]
            g = Q @ x - P[:, h]
            lam = -g[i] / Q[i, i] if g[i] / Q[i, i] <= x[i] else -x[i]
            y = x.copy()
            y[i] += lam
            best = max(best, phi(Q, P[:, h], x) - phi(Q, P[:, h], y))
    assert compute_mu(NnlsSubproblem(Q, P), X0) == pytest.approx(best, abs=1e-12)


def test_start_is_not_modified():
    sub = build_subproblem(np.eye(1) * 2, [[1.0]])
    X0 = np.array([[3.0]])
    gcd_solve_matrix(sub, X0)
    assert X0[0, 0] == 3.0


def test_solve_matrix_examples():
    sub = build_subproblem(np.eye(2), np.eye(2))
    res = gcd_solve_matrix(sub, np.zeros((2, 2)), GcdConfig(1e-3))
    np.testing.assert_array_equal(res.X, np.eye(2))
    assert res.corrections == 2
    res = gcd_solve_matrix(sub, np.eye(2), GcdConfig(1e-3))
    assert res.corrections == 0
    np.testing.assert_array_equal(res.X, np.eye(2))


def test_solve_matrix_cap_is_flagged_not_fatal():
    r = np.random.default_rng(0)
    C, B = r.random((8, 4)), r.random((8, 3))
    res = gcd_solve_matrix(build_subproblem(C, B), np.zeros((4, 3)), GcdConfig(1e-14, max_corrections_per_column=2))
    assert res.capped.any() and res.per_column.max() == 2
    np.testing.assert_array_equal(res.capped, res.per_column == 2)
    assert res.corrections == res.per_column.sum()


@pytest.mark.parametrize("seed", range(5))
def test_tight_eta_reaches_bpp_objective(seed):
    r = np.random.default_rng(seed)
    C, B = r.standard_normal((6, 4)), r.standard_normal((6, 5))
    sub = build_subproblem(C, B)
    Xg = gcd_solve_matrix(sub, np.zeros((4, 5)), GcdConfig(1e-12)).X
    Xb = bpp_solve_matrix(sub, np.zeros((4, 5)))
    fg = 0.5 * np.sum((B - C @ Xg) ** 2, axis=0)
    fb = 0.5 * np.sum((B - C @ Xb) ** 2, axis=0)
    np.testing.assert_array_less(fg - fb, 1e-6 * np.maximum(fb, 1e-300) + 1e-15)


def replay(sub, X0, log):
    """Apply logged corrections one by one; yield (x_before, x_after, correction, column)."""
    X = X0.copy()
    for h, c in log.entries():
        before = X[:, h].copy()
        X[c.index, h] = 0.0 if c.step == -X[c.index, h] else X[c.index, h] + c.step
        yield h, before, X[:, h].copy(), c


@given(st.integers(0, 2**32 - 1), st.integers(1, 6), st.integers(1, 5), st.sampled_from([1e-1, 1e-3, 1e-6]))
@settings(max_examples=40)
def test_kernel_corrections_monotone_and_feasible(seed, k, s, eta):
    r = np.random.default_rng(seed)
    C, B = r.random((k + 3, k)) + 0.1 * np.eye(k + 3, k), r.random((k + 3, s))
    sub = build_subproblem(C, B)
    X0 = np.maximum(r.standard_normal((k, s)), 0)
    log = CorrectionLog(10_000)
    res = gcd_solve_matrix(sub, X0, GcdConfig(eta), log)
    assert log.count == res.corrections
    X = X0.copy()
    for h, before, after, c in replay(sub, X0, log):
        assert c.decrease >= 0
        assert np.all(after >= 0)
        drop = phi(sub.gram, sub.cross[:, h], before) - phi(sub.gram, sub.cross[:, h], after)
        assert drop == pytest.approx(c.decrease, abs=1e-10)
        X[:, h] = after
    np.testing.assert_array_equal(X, res.X)


def test_python_state_matches_kernel(rng):
    Q = spd(rng, 5)
    P = rng.standard_normal((5, 1))
    sub = NnlsSubproblem(Q, P)
    mu = compute_mu(sub, np.zeros((5, 1)))
    state = GcdColumnState.start(sub, 0)
    while True:
        c = best_correction(state, Q)
        if c.decrease <= 0 or c.decrease < 1e-4 * mu:
            break
        apply_correction(state, Q, c)
        np.testing.assert_allclose(state.g, Q @ state.x - P[:, 0], atol=1e-8)
        assert np.all(state.x >= 0)
    res = gcd_solve_matrix(sub, np.zeros((5, 1)), GcdConfig(1e-4))
    assert res.corrections == state.corrections
    np.testing.assert_allclose(res.X[:, 0], state.x, atol=1e-12)


def test_objective_nonincreasing_as_eta_shrinks(rng):
    C, B = rng.random((10, 5)), rng.random((10, 4))
    sub = build_subproblem(C, B)
    prev = None
    for eta in [1e-1, 1e-2, 1e-3, 1e-4, 1e-5]:
        f = sub.objective(gcd_solve_matrix(sub, np.zeros((5, 4)), GcdConfig(eta)).X)
        if prev is not None:
            assert np.all(f <= prev + 1e-14)
        prev = f
