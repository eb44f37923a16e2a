"""Dense symmetric matrix kernels.

Symmetric matrices are plain ``(n, n)`` float arrays. The iterative
routines are power iterations from a fixed-seed start vector, so repeated
calls return identical results; :func:`jacobi_eigendecomposition` is the
small-matrix reference they are tested against.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, ConvergenceError, DomainError

JACOBI_MAX_N = 64
DENSE_SOLVE_BELOW = 200
_START_SEED = 20240917


def as_symmetric(a, tol=1e-12):
    """Return ``a`` as a float array after checking it is square and symmetric."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {a.shape}")
    scale = max(1.0, float(np.abs(a).max(initial=0.0)))
    if not np.allclose(a, a.T, rtol=0.0, atol=tol * scale):
        raise DomainError("matrix is not symmetric")
    return a


def _start_vector(n):
    x = np.random.default_rng(_START_SEED).standard_normal(n)
    return x / np.linalg.norm(x)


class _Stopper:
    """Relative-change test with a geometric tail estimate.

    With successive relative changes d_k and observed ratio r = d_k/d_{k-1},
    the remaining error of a linearly converging sequence is about
    d_k r/(1-r); stopping on that estimate rather than on d_k alone keeps
    slow (r close to 1) iterations from stopping early.
    """

    def __init__(self, tol):
        self.tol = tol
        self.prev = None
        self.prev_change = None

    def done(self, value):
        if self.prev is None:
            self.prev = value
            return False
        change = abs(value - self.prev) / max(abs(value), 1e-300)
        self.prev = value
        last, self.prev_change = self.prev_change, change
        if change == 0.0:
            return True
        if last is None or change > self.tol:
            return False
        r = min(change / last, 0.999999) if last > 0 else 0.0
        return change * r / (1.0 - r) <= self.tol


def spectral_norm(b, tol=1e-10, max_iter=100_000):
    """Largest eigenvalue magnitude of symmetric ``b`` by power iteration.

    Iterates ``x <- b x / |b x|`` and tracks ``|b x|``, which converges to
    ``max |lambda|`` even when the extreme eigenvalues have opposite signs.
    """
    b = as_symmetric(b)
    if not np.any(b):
        return 0.0
    x = _start_vector(b.shape[0])
    stop = _Stopper(tol)
    est = 0.0
    for _ in range(max_iter):
        y = b @ x
        est = float(np.linalg.norm(y))
        if est == 0.0:
            return 0.0
        # |b x| for unit x is sqrt of the Rayleigh quotient of b^2
        if stop.done(est * est):
            return est
        x = y / est
    raise ConvergenceError(f"spectral_norm did not converge in {max_iter} iterations", est)


@dataclass(frozen=True)
class TopEigenpairs:
    lambda1: float
    v1: np.ndarray
    lambda2: float
    degenerate: bool

    @property
    def gap(self):
        return self.lambda1 - self.lambda2


def _fix_sign(v):
    total = v.sum()
    if total < 0:
        return -v
    if total == 0 and np.any(v) and v[np.flatnonzero(v)[0]] < 0:
        return -v
    return v


def _largest(s, shift, x, tol, max_iter, deflate=None, need_vector=True):
    """Algebraically largest eigenpair of ``s`` by iterating on ``s + shift I``."""
    stop = _Stopper(tol)
    lam = 0.0
    scale = max(shift, 1e-300)
    for _ in range(max_iter):
        if deflate is not None:
            x = x - (deflate @ x) * deflate
            x /= np.linalg.norm(x)
        sx = s @ x
        lam = float(x @ sx)
        if need_vector:
            resid = np.linalg.norm(sx - lam * x)
            if resid <= tol * scale:
                return lam, x
        elif stop.done(lam + shift):
            return lam, x
        y = sx + shift * x
        x = y / np.linalg.norm(y)
    raise ConvergenceError(f"power iteration did not converge in {max_iter} iterations", (lam, x))


def top_two_eigenpairs(s, tol=1e-10, max_iter=100_000):
    """Two algebraically largest eigenvalues and the dominant unit eigenvector.

    ``v1`` is sign-fixed to a nonnegative entry sum. ``degenerate`` is set
    when the gap is below ``1000 * tol`` relative to the matrix scale.
    """
    s = as_symmetric(s)
    n = s.shape[0]
    shift = float(np.abs(s).sum(axis=1).max()) if n else 0.0
    if shift == 0.0 or n == 1:
        lam = float(s[0, 0]) if n == 1 else 0.0
        v = np.ones(n) / math.sqrt(n)
        return TopEigenpairs(lam, v, lam if n > 1 else -math.inf, n > 1)
    x0 = _start_vector(n)
    lam1, v1 = _largest(s, shift, x0, tol, max_iter)
    v1 = _fix_sign(v1 / np.linalg.norm(v1))
    # second pair: same iteration restricted to the complement of v1
    start = np.roll(x0, 1)
    lam2, _ = _largest(s, shift, start, tol, max_iter, deflate=v1, need_vector=False)
    lam2 = min(lam2, lam1)
    degenerate = (lam1 - lam2) <= 1000 * tol * shift
    return TopEigenpairs(lam1, v1, lam2, bool(degenerate))


def solve_shifted(a, alpha, rhs, tol=1e-10, max_iter=None):
    """Solve ``(I - alpha a) x = rhs``.

    Symmetric systems of size ``DENSE_SOLVE_BELOW`` and up use conjugate
    gradients (the system is SPD when ``alpha * lambda`` lies in (-1, 1) for
    every eigenvalue); smaller or nonsymmetric systems use a dense LU solve.
    """
    a = np.asarray(a, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    n = a.shape[0]
    bnorm = float(np.linalg.norm(rhs))
    if bnorm == 0.0:
        return np.zeros(n)
    if alpha == 0.0:
        return rhs.copy()
    symmetric = np.allclose(a, a.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(a).max()))
    if n < DENSE_SOLVE_BELOW or not symmetric:
        x = np.linalg.solve(np.eye(n) - alpha * a, rhs)
        if np.linalg.norm(x - alpha * (a @ x) - rhs) > max(tol, 1e-12) * bnorm * 1e3:
            raise ConvergenceError("dense solve is ill-conditioned", x)
        return x
    return _cg(lambda v: v - alpha * (a @ v), rhs, tol, max_iter or 10 * n)


def _cg(apply, b, tol, max_iter):
    x = np.zeros_like(b)
    r = b.copy()
    p = r.copy()
    rs = float(r @ r)
    target = (tol * float(np.linalg.norm(b))) ** 2
    for _ in range(max_iter):
        if rs <= target:
            return x
        ap = apply(p)
        curv = float(p @ ap)
        if curv <= 0.0:
            raise ConvergenceError("conjugate gradient breakdown: system is not positive definite", x)
        step = rs / curv
        x += step * p
        r -= step * ap
        rs_new = float(r @ r)
        p = r + (rs_new / rs) * p
        rs = rs_new
    if rs <= target:
        return x
    raise ConvergenceError(f"conjugate gradient did not converge in {max_iter} iterations", x)


def jacobi_eigendecomposition(s, max_sweeps=60):
    """Cyclic Jacobi eigendecomposition of one matrix or a stack of them.

    Accepts ``(n, n)`` or ``(..., n, n)`` input. Returns eigenvalues sorted in
    descending order and the matching orthonormal eigenvectors as columns.
    """
    a = np.array(s, dtype=float)
    single = a.ndim == 2
    if single:
        a = a[None]
    n = a.shape[-1]
    if n > JACOBI_MAX_N:
        raise CapacityError(f"Jacobi eigendecomposition is capped at n={JACOBI_MAX_N}")
    batch_shape = a.shape[:-2]
    a = a.reshape(-1, n, n)
    a = 0.5 * (a + a.transpose(0, 2, 1))
    v = np.broadcast_to(np.eye(n), a.shape).copy()
    scale = np.sqrt((a * a).sum(axis=(1, 2)))
    eps = np.finfo(float).eps
    for _ in range(max_sweeps):
        off = (a * a).sum(axis=(1, 2)) - (np.diagonal(a, axis1=1, axis2=2) ** 2).sum(axis=1)
        if np.all(off <= (eps * scale) ** 2):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[:, p, q]
                active = np.abs(apq) > eps * eps * scale
                if not active.any():
                    continue
                safe = np.where(active, apq, 1.0)
                theta = (a[:, q, q] - a[:, p, p]) / (2.0 * safe)
                t = np.sign(theta) / (np.abs(theta) + np.sqrt(theta * theta + 1.0))
                t = np.where(theta == 0.0, 1.0, t)
                t = np.where(active, t, 0.0)
                c = 1.0 / np.sqrt(t * t + 1.0)
                sn = t * c
                c3, s3 = c[:, None], sn[:, None]
                colp, colq = a[:, :, p].copy(), a[:, :, q].copy()
                a[:, :, p] = c3 * colp - s3 * colq
                a[:, :, q] = s3 * colp + c3 * colq
                rowp, rowq = a[:, p, :].copy(), a[:, q, :].copy()
                a[:, p, :] = c3 * rowp - s3 * rowq
                a[:, q, :] = s3 * rowp + c3 * rowq
                a[:, p, q] = np.where(active, 0.0, a[:, p, q])
                a[:, q, p] = a[:, p, q]
                vp, vq = v[:, :, p].copy(), v[:, :, q].copy()
                v[:, :, p] = c3 * vp - s3 * vq
                v[:, :, q] = s3 * vp + c3 * vq
    w = np.diagonal(a, axis1=1, axis2=2).copy()
    order = np.argsort(-w, axis=1, kind="stable")
    w = np.take_along_axis(w, order, axis=1)
    v = np.take_along_axis(v, order[:, None, :], axis=2)
    w = w.reshape(*batch_shape, n)
    v = v.reshape(*batch_shape, n, n)
    if single:
        return w[0], v[0]
    return w, v


def stacked_eigvalsh(s):
    """Descending eigenvalues of a stack of small symmetric matrices (LAPACK).

    The enumeration oracle needs spectra of up to 2**20 matrices, far beyond
    what the pure-numpy Jacobi sweep handles in reasonable time.
    """
    a = np.asarray(s, dtype=float)
    return np.linalg.eigvalsh(0.5 * (a + np.swapaxes(a, -1, -2)))[..., ::-1]


def trace_exp_normalized(s, psi):
    """``(1/n) tr exp(psi s)`` from the Jacobi spectrum; batches like the Jacobi routine."""
    w, _ = jacobi_eigendecomposition(s)
    out = np.exp(psi * w).mean(axis=-1)
    return float(out) if np.ndim(out) == 0 else out
