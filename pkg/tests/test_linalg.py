import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_symmetric
from sugm.errors import CapacityError, ConvergenceError, DomainError
from sugm.linalg import (jacobi_eigendecomposition, solve_shifted, spectral_norm,
                         stacked_eigvalsh, top_two_eigenpairs, trace_exp_normalized)

K3 = np.ones((3, 3)) - np.eye(3)


def test_spectral_norm_examples():
    assert spectral_norm(np.zeros((4, 4))) == 0.0
    assert spectral_norm(np.array([[0.0, 1.0], [1.0, 0.0]])) == pytest.approx(1.0, abs=1e-12)
    # tie between +3 and -3
    assert spectral_norm(np.diag([3.0, -3.0, 1.0])) == pytest.approx(3.0, rel=1e-10)


def test_spectral_norm_vs_jacobi(rng):
    for _ in range(100):
        s = random_symmetric(rng, 12)
        w, _ = jacobi_eigendecomposition(s)
        assert abs(spectral_norm(s) - np.abs(w).max()) <= 1e-8 * np.abs(w).max()


def test_spectral_norm_rejects_nonsymmetric():
    with pytest.raises(DomainError):
        spectral_norm(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_spectral_norm_nonconvergence_carries_estimate(rng):
    with pytest.raises(ConvergenceError) as info:
        spectral_norm(random_symmetric(rng, 30), tol=1e-16, max_iter=3)
    assert info.value.last > 0


def test_top_two_examples():
    t = top_two_eigenpairs(np.diag([2.0, 1.0]))
    assert (t.lambda1, t.lambda2) == pytest.approx((2.0, 1.0), abs=1e-12)
    assert np.allclose(t.v1, [1, 0], atol=1e-9)
    t = top_two_eigenpairs(K3)
    assert (t.lambda1, t.lambda2) == pytest.approx((2.0, -1.0), abs=1e-10)
    assert np.allclose(t.v1, np.ones(3) / math.sqrt(3), atol=1e-10)
    assert not t.degenerate


def test_top_two_vs_jacobi(rng):
    for _ in range(100):
        s = random_symmetric(rng, 10)
        w, v = jacobi_eigendecomposition(s)
        t = top_two_eigenpairs(s)
        assert abs(t.lambda1 - w[0]) <= 1e-8 and abs(t.lambda2 - w[1]) <= 1e-8
        ref = v[:, 0] * (1 if v[:, 0].sum() >= 0 else -1)
        assert np.abs(t.v1 - ref).max() <= 1e-6
        assert t.v1.sum() >= 0 and abs(np.linalg.norm(t.v1) - 1) < 1e-12


def test_degenerate_gap_flag():
    two_triangles = np.zeros((6, 6))
    two_triangles[:3, :3] = K3
    two_triangles[3:, 3:] = K3
    assert top_two_eigenpairs(two_triangles).degenerate
    assert top_two_eigenpairs(np.zeros((3, 3))).degenerate


def test_solve_shifted_examples(rng):
    rhs = rng.standard_normal(5)
    assert (solve_shifted(random_symmetric(rng, 5), 0.0, rhs) == rhs).all()
    assert np.allclose(solve_shifted(K3, 0.25, np.ones(3)), [2, 2, 2], atol=1e-12)


@pytest.mark.parametrize("n", [30, 300])
def test_solve_shifted_vs_dense(rng, n):
    a = random_symmetric(rng, n)
    alpha = 0.9 / spectral_norm(a)
    rhs = rng.standard_normal(n)
    x = solve_shifted(a, alpha, rhs, tol=1e-12)
    ref = np.linalg.solve(np.eye(n) - alpha * a, rhs)
    assert np.abs(x - ref).max() <= 1e-8 * np.abs(ref).max()
    assert np.linalg.norm(x - alpha * a @ x - rhs) <= 1e-10 * np.linalg.norm(rhs)


def test_solve_shifted_matches_neumann_series(rng):
    a = random_symmetric(rng, 250)
    norm = spectral_norm(a)
    alpha = 0.5 / norm
    rhs = np.ones(250)
    x = solve_shifted(a, alpha, rhs, tol=1e-13)
    # tail (alpha |a|)^(K+1) / (1 - alpha |a|) < 1e-12 for K = 45
    term = rhs.copy()
    series = rhs.copy()
    for _ in range(45):
        term = alpha * (a @ term)
        series += term
    assert np.abs(x - series).max() <= 1e-8


def test_cg_breakdown_is_reported(rng):
    a = random_symmetric(rng, 250)
    with pytest.raises(ConvergenceError):
        solve_shifted(a, 5.0 / spectral_norm(a), np.ones(250))


def test_jacobi_examples():
    w, v = jacobi_eigendecomposition(np.diag([1.0, 3.0, 2.0]))
    assert w.tolist() == [3.0, 2.0, 1.0]
    assert np.allclose(np.abs(v), np.eye(3)[:, [1, 2, 0]])
    w, v = jacobi_eigendecomposition(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert np.allclose(w, [1, -1], atol=1e-15)
    assert np.allclose(np.abs(v), 1 / math.sqrt(2))


def test_jacobi_reconstruction(rng):
    stack = np.array([random_symmetric(rng, 8) for _ in range(100)])
    w, v = jacobi_eigendecomposition(stack)
    for s, wi, vi in zip(stack, w, v):
        norm = np.abs(np.linalg.eigvalsh(s)).max()
        assert np.linalg.norm(s - vi @ np.diag(wi) @ vi.T, 2) <= 1e-10 * norm
        assert np.abs(vi.T @ vi - np.eye(8)).max() <= 1e-10
    assert np.allclose(w, stacked_eigvalsh(stack), atol=1e-12)


def test_jacobi_cap():
    with pytest.raises(CapacityError):
        jacobi_eigendecomposition(np.zeros((65, 65)))


def _expm_series(s):
    # scaling and squaring with a Taylor series
    k = max(0, int(math.ceil(math.log2(max(np.abs(s).sum(axis=1).max(), 1e-300)))) + 4)
    b = s / 2**k
    term = np.eye(len(s))
    total = term.copy()
    for i in range(1, 30):
        term = term @ b / i
        total += term
    for _ in range(k):
        total = total @ total
    return total


def test_trace_exp_examples(rng):
    assert trace_exp_normalized(np.zeros((4, 4)), 3.0) == 1.0
    assert trace_exp_normalized(np.diag([1.0, -2.0]), 0.5) == pytest.approx((math.exp(0.5) + math.exp(-1)) / 2)
    for _ in range(10):
        s = random_symmetric(rng, 6)
        ref = np.trace(_expm_series(0.7 * s)) / 6
        assert abs(trace_exp_normalized(s, 0.7) - ref) <= 1e-9 * ref


def test_weyl_inequality(rng):
    for _ in range(30):
        a, b = random_symmetric(rng, 15), random_symmetric(rng, 15)
        diff = abs(top_two_eigenpairs(a).lambda1 - top_two_eigenpairs(b).lambda1)
        assert diff <= spectral_norm(a - b) + 1e-9


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 12), st.integers(0, 2**32 - 1))
def test_spectral_norm_property(n, seed):
    s = random_symmetric(np.random.default_rng(seed), n)
    ref = np.abs(np.linalg.eigvalsh(s)).max()
    assert spectral_norm(s) == pytest.approx(ref, rel=1e-8)
    # scaling and reproducibility
    assert spectral_norm(3 * s) == pytest.approx(3 * ref, rel=1e-8)
    assert spectral_norm(s) == spectral_norm(s.copy())
