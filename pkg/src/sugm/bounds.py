"""Concentration bounds, their assumption predicates, and size-scaling estimates."""
from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass, fields

import numpy as np

from .errors import DomainError
from .expectation import expected_adjacency


@dataclass(frozen=True)
class BoundReport:
    n: int
    epsilon: float
    M: int
    delta_weighted: float
    delta_unweighted: float
    mu: float
    prop1_bound: float
    prop2_bound: float
    cor1_bound: float
    a1_pass: bool
    a3_pass: bool
    a4_pass: bool


def bound_values(n, M, epsilon, delta_w, delta_u, mu):
    """The three spectral-norm bounds as a ``(weighted, unweighted, weighted-ES)`` triple."""
    log_term = math.log(2 * n / epsilon)
    prop1 = math.sqrt(4 * M * M * delta_w * log_term)
    prop2 = 4 * M * M * math.sqrt(mu * delta_u * log_term)
    cor1 = 4 * M * M * math.sqrt(delta_w * log_term)
    return prop1, prop2, cor1


def evaluate_bounds(expected, M, epsilon, mu, n=None):
    if not 0 < epsilon < 1:
        raise DomainError(f"epsilon={epsilon} must lie in (0, 1)")
    if M < 2:
        raise DomainError(f"M={M} must be at least 2")
    if mu < 1:
        raise DomainError(f"mu={mu} must be at least 1")
    n = n if n is not None else expected.expected_weighted.shape[0]
    dw, du = expected.delta_weighted, expected.delta_unweighted
    prop1, prop2, cor1 = bound_values(n, M, epsilon, dw, du, mu)
    log_term = math.log(2 * n / epsilon)
    return BoundReport(
        n=n, epsilon=epsilon, M=M, delta_weighted=dw, delta_unweighted=du, mu=mu,
        prop1_bound=prop1, prop2_bound=prop2, cor1_bound=cor1,
        a1_pass=dw > 4.0 / 9.0 * log_term,
        a3_pass=du > 16.0 / mu * log_term,
        a4_pass=dw > 16.0 * log_term,
    )


def estimate_mu(family, sizes):
    """Largest ``Delta_w / Delta_u`` over ``sizes``, with the per-size ratios.

    Sizes whose expected graph is empty are skipped (the ratio is undefined).
    """
    if len(sizes) < 2:
        raise DomainError("estimate_mu needs at least two sizes")
    ratios = []
    for n in sizes:
        e = expected_adjacency(family.at(n))
        ratios.append(e.delta_weighted / e.delta_unweighted if e.delta_unweighted > 0 else math.nan)
    finite = [r for r in ratios if not math.isnan(r)]
    mu = max(finite) if finite else 1.0
    return mu, ratios


def fit_growth_exponent(family, sizes):
    """Least-squares slope of ``ln Delta_w`` against ``ln n``."""
    if len(sizes) < 2:
        raise DomainError("fit_growth_exponent needs at least two sizes")
    deltas = [expected_adjacency(family.at(n)).delta_weighted for n in sizes]
    if min(deltas) <= 0:
        raise DomainError("Delta_w vanishes at some size; the exponent is undefined")
    slope, _ = np.polyfit(np.log(sizes), np.log(deltas), 1)
    return float(slope), deltas


def write_bound_reports(reports, path):
    names = [f.name for f in fields(BoundReport)]
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=names)
        w.writeheader()
        for r in reports:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in asdict(r).items()})
