"""Degree, eigenvector and Katz centrality, plus the DeGroot and LQ-game models."""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConvergenceError, DomainError
from .linalg import as_symmetric, solve_shifted, top_two_eigenpairs


class Kind(str, enum.Enum):
    DEGREE = "degree"
    EIGENVECTOR = "eigenvector"
    KATZ = "katz"


class DegenerateGapWarning(UserWarning):
    """The dominant eigenvalue is not simple; the eigenvector is not unique."""


@dataclass(frozen=True)
class CentralityVector:
    kind: Kind
    values: np.ndarray
    alpha: Optional[float] = None
    degenerate: bool = False


def degree_centrality(a):
    a = np.asarray(a, dtype=float)
    return CentralityVector(Kind.DEGREE, a.sum(axis=1))


def eigenvector_centrality(a, tol=1e-10):
    """``sqrt(n)`` times the sign-fixed unit dominant eigenvector.

    A near-degenerate top gap (for instance a disconnected graph with two
    equal components) is reported through ``degenerate`` and a
    :class:`DegenerateGapWarning`; the returned vector is then one of many.
    """
    top = top_two_eigenpairs(a, tol=tol)
    if top.degenerate:
        warnings.warn(f"dominant eigenvalue {top.lambda1:.6g} is not separated from "
                      f"{top.lambda2:.6g}", DegenerateGapWarning, stacklevel=2)
    n = len(top.v1)
    return CentralityVector(Kind.EIGENVECTOR, math.sqrt(n) * top.v1, degenerate=top.degenerate)


def _perron_root(a, tol=1e-12, max_iter=100_000):
    # spectral radius of an entrywise nonnegative (possibly nonsymmetric) matrix
    n = a.shape[0]
    x = np.ones(n) / n
    lam = 0.0
    for _ in range(max_iter):
        y = a @ x + x  # the +I shift removes periodicity
        s = y.sum()
        if s == 0:
            return 0.0
        lam_new = s / x.sum() - 1.0
        x = y / s
        if abs(lam_new - lam) <= tol * max(1.0, abs(lam_new)):
            return lam_new
        lam = lam_new
    raise ConvergenceError("Perron root did not converge", lam)


def leading_eigenvalue(a):
    a = np.asarray(a, dtype=float)
    if np.allclose(a, a.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(a).max(initial=0.0))):
        return top_two_eigenpairs(a).lambda1
    if np.any(a < 0):
        raise DomainError("nonsymmetric Katz input must be entrywise nonnegative")
    return _perron_root(a)


def katz_centrality(a, alpha, lambda1=None, tol=1e-12):
    """``(I - alpha a)^{-1} 1`` for ``0 < alpha < 1/lambda1(a)``.

    ``lambda1`` may be passed when the caller already knows it.
    """
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    if lambda1 is None:
        lambda1 = leading_eigenvalue(a)
    if not alpha > 0 or (lambda1 > 0 and alpha * lambda1 >= 1.0):
        raise DomainError(f"alpha={alpha} outside (0, 1/lambda1) with lambda1={lambda1:.6g}")
    x = solve_shifted(a, alpha, np.ones(n), tol=tol)
    return CentralityVector(Kind.KATZ, x, alpha=alpha)


def avg_l1_error(c1, c2):
    if c1.kind != c2.kind:
        raise DomainError(f"cannot compare {c1.kind.value} with {c2.kind.value} centrality")
    if c1.values.shape != c2.values.shape:
        raise DomainError("centrality vectors have different lengths")
    return float(np.abs(c1.values - c2.values).sum() / len(c1.values))


def _row_stochastic(a):
    a = np.asarray(a, dtype=float)
    d = a.sum(axis=1)
    if np.any(d <= 0):
        raise DomainError(f"node {int(np.argmin(d))} has zero row sum")
    return a / d[:, None], d


@dataclass(frozen=True)
class Consensus:
    value: float
    weights: np.ndarray
    simulated: np.ndarray
    steps: int
    periodic_suspected: bool


def degroot_consensus(a, p0, horizon=1_000_000, tol=1e-12):
    """Limit of ``p(t+1) = D^{-1} A p(t)`` and the left Perron vector ``w``.

    ``w`` is computed by power iteration on the lazy chain ``(I + P^T)/2``
    and the dynamics are simulated independently until the opinion spread
    drops below ``tol``.
    """
    p_mat, d = _row_stochastic(a)
    p0 = np.asarray(p0, dtype=float)
    n = len(d)
    if p0.shape != (n,) or np.any((p0 < 0) | (p0 > 1)):
        raise DomainError(f"initial opinions must be a length-{n} vector in [0, 1]")

    # bipartite components give eigenvalue -1 of P and oscillating dynamics
    sym = as_symmetric(np.asarray(a, dtype=float)) / np.sqrt(np.outer(d, d))
    lam_min = -top_two_eigenpairs(-sym).lambda1
    periodic = lam_min <= -1.0 + 1e-9

    w = np.ones(n) / n
    for _ in range(horizon):
        w_new = 0.5 * (w + p_mat.T @ w)
        w_new /= w_new.sum()
        if np.abs(w_new - w).sum() <= tol * 1e-2:
            w = w_new
            break
        w = w_new
    else:
        raise ConvergenceError("left eigenvector iteration did not converge", w)

    x = p0.copy()
    for step in range(1, horizon + 1):
        x = p_mat @ x
        if x.max() - x.min() <= tol:
            break
    else:
        raise ConvergenceError(f"DeGroot dynamics did not reach consensus in {horizon} steps"
                               + (" (periodic structure suspected)" if periodic else ""), x)
    return Consensus(float(w @ p0), w, x, step, bool(periodic))


def lq_equilibrium(a, beta, b, tol=1e-12):
    """Nash equilibrium ``(I - beta D^{-1} A)^{-1} b`` of the LQ network game.

    Solved through the symmetric similar system
    ``(I - beta D^{-1/2} A D^{-1/2}) y = D^{1/2} b`` with ``a = D^{-1/2} y``.
    """
    if not 0 <= beta < 1:
        raise DomainError(f"beta={beta} must lie in [0, 1) for a row-stochastic network")
    a = as_symmetric(a)
    _, d = _row_stochastic(a)
    b = np.asarray(b, dtype=float)
    if np.any(b < 0):
        raise DomainError("standalone returns b must be nonnegative")
    root = np.sqrt(d)
    sym = a / np.outer(root, root)
    y = solve_shifted(sym, beta, root * b, tol=tol)
    return y / root
