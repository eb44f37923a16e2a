"""Exact small-model enumeration of the Efron-Stein variance proxies.

A model with K placements has 2**K joint outcomes ``x``. For each one we
build ``W(x) = sum_c x_c A_c`` and ``U(x) = min(W(x), 1)`` and evaluate
expectations as exact probability-weighted sums. Everything here is
independent of :mod:`sugm.expectation` and :mod:`sugm.sampler`, which it is
used to check.

Conventions: for coordinate c with probability p, the resampled copy x'_c
is an independent Bernoulli(p), so ``E[(x_c - x'_c)^2 | x] = x_c(1-2p)+p``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional

import numpy as np

from .errors import CapacityError, DomainError
from .linalg import stacked_eigvalsh
from .model import enumerate_placements, placement_probabilities

MAX_K = 20
MAX_N = 8
EXACT_TOL = 1e-12
PSD_TOL = 1e-10
SLACK = 1e-10
_CHUNK = 1 << 14


@dataclass(frozen=True)
class EnumeratedModel:
    n: int
    matrices: np.ndarray      # (K, n, n) 0/1 template adjacency matrices
    probs: np.ndarray         # (K,)
    sizes: tuple = ()         # template size of each placement

    def __post_init__(self):
        mats = np.asarray(self.matrices, dtype=float).reshape(-1, self.n, self.n)
        probs = np.asarray(self.probs, dtype=float).reshape(-1)
        object.__setattr__(self, "matrices", mats)
        object.__setattr__(self, "probs", probs)
        if self.n > MAX_N or len(probs) > MAX_K:
            raise CapacityError(f"enumeration capped at n <= {MAX_N}, K <= {MAX_K}")
        if len(mats) != len(probs):
            raise DomainError("one probability per placement matrix is required")
        if np.any((probs < 0) | (probs > 1)):
            raise DomainError("placement probabilities must lie in [0, 1]")
        if not np.all((mats == 0) | (mats == 1)):
            raise DomainError("placement matrices must be 0/1")
        if np.any(mats != mats.transpose(0, 2, 1)) or np.any(np.diagonal(mats, axis1=1, axis2=2)):
            raise DomainError("placement matrices must be symmetric with zero diagonal")
        if not self.sizes:
            touched = tuple(int(np.count_nonzero(m.sum(axis=0))) for m in mats)
            object.__setattr__(self, "sizes", touched)

    @property
    def K(self):
        return len(self.probs)

    @property
    def M(self):
        return max(self.sizes) if self.sizes else 0


def from_spec(spec):
    """Every placement of a (small) spec as an explicit enumerated model."""
    mats, probs, sizes = [], [], []
    for t, (template, _) in enumerate(spec.types):
        nodes = enumerate_placements(spec, t)
        if len(probs) + len(nodes) > MAX_K:
            raise CapacityError(f"spec has more than {MAX_K} placements")
        for row, p in zip(nodes, placement_probabilities(spec, t, nodes)):
            a = np.zeros((spec.n, spec.n))
            for u, v in template.edges:
                a[row[u], row[v]] = a[row[v], row[u]] = 1.0
            mats.append(a)
            probs.append(p)
            sizes.append(template.size)
    return EnumeratedModel(spec.n, np.array(mats), np.array(probs), tuple(sizes))


def random_model(rng, n_max=5, k_max=10, p_low=0.0, p_high=1.0):
    """Random links, triangles and 4-cliques on at most ``n_max`` nodes."""
    n = int(rng.integers(3, n_max + 1))
    k = int(rng.integers(1, k_max + 1))
    mats, sizes = [], []
    for _ in range(k):
        m = int(rng.integers(2, min(4, n) + 1))
        nodes = rng.choice(n, size=m, replace=False)
        a = np.zeros((n, n))
        for u, v in combinations(nodes, 2):
            a[u, v] = a[v, u] = 1.0
        mats.append(a)
        sizes.append(m)
    probs = rng.uniform(p_low, p_high, size=k)
    return EnumeratedModel(n, np.array(mats), probs, tuple(sizes))


@dataclass(frozen=True)
class RealizationVector:
    bits: tuple
    probability: float


def _bits(start, stop, k):
    idx = np.arange(start, stop, dtype=np.int64)
    return ((idx[:, None] >> np.arange(k)) & 1).astype(float)


def _probability(bits, probs):
    return np.prod(np.where(bits == 1, probs, 1.0 - probs), axis=1)


def realizations(model):
    """All 2**K outcome vectors with their probabilities."""
    bits = _bits(0, 1 << model.K, model.K)
    for b, p in zip(bits, _probability(bits, model.probs)):
        yield RealizationVector(tuple(int(x) for x in b), float(p))


def _chunks(model):
    total = 1 << model.K
    for lo in range(0, total, _CHUNK):
        bits = _bits(lo, min(lo + _CHUNK, total), model.K)
        yield bits, _probability(bits, model.probs)


def _weighted(model, bits):
    return np.einsum("xk,kij->xij", bits, model.matrices)


def exact_expectation(model):
    """``(E[W], E[U])`` summed over every outcome."""
    n = model.n
    ew = np.zeros((n, n))
    eu = np.zeros((n, n))
    for bits, prob in _chunks(model):
        w = _weighted(model, bits)
        ew += np.einsum("x,xij->ij", prob, w)
        eu += np.einsum("x,xij->ij", prob, np.minimum(w, 1.0))
    return ew, eu


def exact_variance_weighted(model):
    """Entrywise ``Var[W]`` over every outcome."""
    n = model.n
    ew = np.zeros((n, n))
    ew2 = np.zeros((n, n))
    for bits, prob in _chunks(model):
        w = _weighted(model, bits)
        ew += np.einsum("x,xij->ij", prob, w)
        ew2 += np.einsum("x,xij->ij", prob, w * w)
    return np.maximum(ew2 - ew * ew, 0.0)


def _resample_factor(model, bits):
    # E[(x_c - x'_c)^2 | x_c]
    return bits * (1.0 - 2.0 * model.probs) + model.probs


def _proxies(model, bits):
    """``V_W``, ``V_U`` and ``U`` for a batch of outcomes."""
    a = model.matrices
    f = _resample_factor(model, bits)                       # (X, K)
    a_sq = a @ a                                             # (K, n, n)
    v_w = 0.5 * np.einsum("xk,kij->xij", f, a_sq)
    w = _weighted(model, bits)
    rest = w[:, None] - bits[:, :, None, None] * a[None]    # W without coordinate c
    c_u = np.minimum(rest + a[None], 1.0) - np.minimum(rest, 1.0)
    c_sq = c_u @ c_u
    v_u = 0.5 * np.einsum("xk,xkij->xij", f, c_sq)
    return v_w, v_u, np.minimum(w, 1.0), c_u


def _as_bits(model, x):
    x = np.asarray(x, dtype=float).reshape(1, -1)
    if x.shape[1] != model.K or not np.all((x == 0) | (x == 1)):
        raise DomainError(f"outcome must be a 0/1 vector of length {model.K}")
    return x


def variance_proxy_weighted(model, x):
    """``V_W(x) = 1/2 sum_c (x_c(1-2p_c)+p_c) A_c^2``."""
    bits = _as_bits(model, x)
    return _proxies(model, bits)[0][0]


def variance_proxy_unweighted(model, x):
    """``V_U(x) = 1/2 sum_c (x_c(1-2p_c)+p_c) C_c(x)^2`` with ``C_c = U(x|c=1) - U(x|c=0)``."""
    bits = _as_bits(model, x)
    return _proxies(model, bits)[1][0]


def variance_proxy_bruteforce(model, x, variant="weighted"):
    """Variance proxy straight from its definition, enumerating ``x'_c`` in {0, 1}."""
    bits = _as_bits(model, x)[0]
    fn = (lambda b: b @ model.matrices.reshape(model.K, -1)) if variant == "weighted" \
        else (lambda b: np.minimum(b @ model.matrices.reshape(model.K, -1), 1.0))
    base = fn(bits).reshape(model.n, model.n)
    out = np.zeros((model.n, model.n))
    for c in range(model.K):
        for xp, weight in ((1.0, model.probs[c]), (0.0, 1.0 - model.probs[c])):
            alt = bits.copy()
            alt[c] = xp
            diff = base - fn(alt).reshape(model.n, model.n)
            out += 0.5 * weight * diff @ diff
    return out


def _min_eig(mats):
    return stacked_eigvalsh(mats)[..., -1]


def _max_abs_eig(mats):
    w = stacked_eigvalsh(mats)
    return np.maximum(np.abs(w[..., 0]), np.abs(w[..., -1]))


@dataclass
class CheckResult:
    name: str
    passed: bool
    margin: float                # smallest (allowed + tolerance - observed); negative on failure
    witness: Optional[dict] = field(default=None)

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name:<28} worst margin {self.margin:.3e}"


def check_lemma_dominance(model, tol=EXACT_TOL):
    """``0 <= V_U(x) <= V_W(x)`` entrywise for every outcome ``x``."""
    worst = math.inf
    witness = None
    for bits, _ in _chunks(model):
        v_w, v_u, _, _ = _proxies(model, bits)
        lower = v_u.reshape(len(bits), -1).min(axis=1)
        upper = (v_w - v_u).reshape(len(bits), -1).min(axis=1)
        margin = np.minimum(lower, upper)
        i = int(np.argmin(margin))
        if margin[i] < worst:
            worst = float(margin[i])
            flat = int(np.argmin(np.minimum(v_u[i], v_w[i] - v_u[i])))
            witness = {"x": tuple(int(b) for b in bits[i]),
                       "entry": divmod(flat, model.n),
                       "V_U": float(v_u[i].flat[flat]), "V_W": float(v_w[i].flat[flat])}
    passed = worst >= -tol
    return CheckResult("dominance V_U <= V_W", passed, worst + tol, None if passed else witness)


def check_cu_monotone(model):
    """``A_c >= C_c(x) >= 0`` entrywise for every coordinate and outcome."""
    worst = math.inf
    for bits, _ in _chunks(model):
        c_u = _proxies(model, bits)[3]
        worst = min(worst, float(c_u.min()), float((model.matrices[None] - c_u).min()))
    return CheckResult("monotone A_c >= C_U >= 0", worst >= 0, worst)


def _log_trace_mgf(model, which, psis):
    """``log E[trbar exp(psi V)]`` for V in {"V_W", "V_U"} and each psi."""
    acc = np.zeros(len(psis))
    for bits, prob in _chunks(model):
        v_w, v_u, _, _ = _proxies(model, bits)
        w = stacked_eigvalsh(v_w if which == "V_W" else v_u)
        for i, psi in enumerate(psis):
            acc[i] += prob @ np.exp(psi * w).mean(axis=1)
    return np.log(acc)


def delta_weighted(model):
    ew = np.einsum("k,kij->ij", model.probs, model.matrices)
    return float(ew.sum(axis=1).max())


def check_mgf_bound(model, psi_grid):
    """``log E[trbar e^{psi V_W}] <= (e-1) Delta_w M psi`` for each psi in (0, 1/M^2)."""
    psis = [float(p) for p in psi_grid]
    m = model.M
    for psi in psis:
        if not 0 < psi < 1.0 / m**2:
            raise DomainError(f"psi={psi} outside (0, 1/M^2) with M={m}")
    lhs = _log_trace_mgf(model, "V_W", psis)
    dw = delta_weighted(model)
    out = []
    for psi, left in zip(psis, lhs):
        right = (math.e - 1.0) * dw * m * psi
        margin = right + SLACK - left
        out.append(CheckResult(f"mgf psi={psi:.4g}", margin >= 0, margin,
                               {"lhs": float(left), "rhs": right}))
    return out


def check_efron_stein(model, theta, psi):
    """Exact two-sided check of the matrix Efron-Stein trace m.g.f. inequality."""
    if not psi > 0:
        raise DomainError(f"psi={psi} must be positive")
    if abs(theta) > math.sqrt(psi / 2.0):
        raise DomainError(f"|theta|={abs(theta)} exceeds sqrt(psi/2)={math.sqrt(psi / 2):.6g}")
    _, eu = exact_expectation(model)
    lhs_acc = 0.0
    rhs_acc = 0.0
    for bits, prob in _chunks(model):
        _, v_u, u, _ = _proxies(model, bits)
        w_hat = stacked_eigvalsh(u - eu)
        w_v = stacked_eigvalsh(v_u)
        lhs_acc += prob @ np.exp(theta * w_hat).mean(axis=1)
        rhs_acc += prob @ np.exp(psi * w_v).mean(axis=1)
    lhs = math.log(lhs_acc)
    ratio = theta * theta / psi
    denom = 1.0 - 2.0 * ratio
    rhs = math.inf if denom <= 0 else ratio / denom * math.log(rhs_acc)
    margin = rhs + SLACK - lhs
    return CheckResult(f"efron_stein theta={theta:+.3g} psi={psi:.3g}", margin >= 0, margin,
                       {"lhs": lhs, "rhs": rhs})


def check_spectrum_bound(model):
    """Every ``D_W^c(x)`` is PSD with spectral norm below ``2 M^2``.

    ``D_W^c(x)`` is built by brute force over ``x'_c`` for every outcome and
    compared with ``(x_c(1-2p)+p) A_c^2``; since it then takes only two
    values per coordinate, the eigenvalue checks run on those values whose
    ``x_c`` has positive probability.
    """
    a = model.matrices
    a_sq = a @ a
    flat = a.reshape(model.K, -1)
    worst_form = 0.0
    for bits, _ in _chunks(model):
        d = np.zeros((len(bits), model.K, model.n, model.n))
        for xp in (0.0, 1.0):
            weight = model.probs if xp == 1.0 else 1.0 - model.probs
            delta = (bits - xp)[:, :, None] * flat[None]          # W(x) - W(x with c <- x')
            delta = delta.reshape(len(bits), model.K, model.n, model.n)
            d += weight[None, :, None, None] * delta @ delta
        closed = _resample_factor(model, bits)[:, :, None, None] * a_sq[None]
        worst_form = max(worst_form, float(np.abs(d - closed).max()))
    # only values of x_c with positive probability matter ("almost surely")
    on = (1.0 - model.probs)[:, None, None] * a_sq          # x_c = 1
    off = model.probs[:, None, None] * a_sq                 # x_c = 0
    distinct = np.concatenate([on[model.probs > 0], off[model.probs < 1]])
    if not len(distinct):
        distinct = np.zeros((1, model.n, model.n))
    min_eig = float(_min_eig(distinct).min())
    norm = float(_max_abs_eig(distinct).max())
    limit = 2.0 * model.M**2
    margin = min(min_eig + PSD_TOL, limit - norm)
    passed = worst_form <= EXACT_TOL and min_eig >= -PSD_TOL and norm < limit
    return CheckResult("spectrum D_W psd, norm < 2M^2", passed, margin,
                       {"min_eig": min_eig, "max_norm": norm, "closed_form_err": worst_form})
