"""Exact expected adjacency matrices of the weighted and unweighted models.

For every node pair the placements covering it are independent, so

    E[A_w]_ij = sum of p over covering placements
    E[A_u]_ij = 1 - prod (1 - p) over covering placements.

The product is accumulated as a sum of ``log1p(-p)``. Uniform and block
rules on cliques have closed-form cover counts; every other type is
enumerated placement by placement in rank chunks.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .combinatorics import placement_universe, unrank_placements_array
from .errors import CapacityError, DomainError
from .model import BlockRule, TableRule, UniformRule, community_bounds, placement_probabilities

DEFAULT_BUDGET = 1e10
_CHUNK = 1 << 20


@dataclass(frozen=True)
class ExpectedMatrices:
    expected_weighted: np.ndarray
    expected_unweighted: np.ndarray
    delta_weighted: float
    delta_unweighted: float

    def for_variant(self, variant):
        if variant == "weighted":
            return self.expected_weighted, self.delta_weighted
        return self.expected_unweighted, self.delta_unweighted


class _Accumulator:
    def __init__(self, n):
        self.n = n
        self.weight = np.zeros(n * n)
        self.log_miss = np.zeros(n * n)
        self.covers = np.zeros(n * n)  # positive-probability covers per pair

    def add_pairs(self, flat, p):
        size = self.n * self.n
        with np.errstate(divide="ignore"):
            lq = np.log1p(-p)
        self.weight += np.bincount(flat, weights=p, minlength=size)
        self.log_miss += np.bincount(flat, weights=lq, minlength=size)
        self.covers += np.bincount(flat, weights=(p > 0).astype(float), minlength=size)

    def add_block(self, mask, count, p):
        """``count`` covering placements of probability ``p`` for every pair in ``mask``."""
        if count == 0 or p == 0:
            return
        lq = -math.inf if p >= 1 else count * math.log1p(-p)
        m = mask.ravel()
        self.weight[m] += count * p
        self.log_miss[m] += lq
        self.covers[m] += count

    def result(self):
        n = self.n
        upper = np.triu(np.ones((n, n), dtype=bool), 1).ravel()
        w = np.where(upper, self.weight, 0.0).reshape(n, n)
        u = np.where(upper, -np.expm1(self.log_miss), 0.0).reshape(n, n)
        # a single cover is a plain Bernoulli: keep E[A_u] == E[A_w] exactly
        single = (self.covers <= 1).reshape(n, n) & upper.reshape(n, n)
        u = np.where(single, w, u)
        w = w + w.T
        u = u + u.T
        return ExpectedMatrices(w, u, float(w.sum(axis=1).max()), float(u.sum(axis=1).max()))


def _closed_form(acc, spec, template, rule):
    n, m = spec.n, template.size
    upper = np.triu(np.ones((n, n), dtype=bool), 1)
    if isinstance(rule, UniformRule):
        p = float(np.clip(rule.value(n), 0.0, 1.0))
        if template.ordered:
            count = len(template.edges) * 2 * math.perm(n - 2, m - 2)
        else:
            count = math.comb(n - 2, m - 2)
        acc.add_block(upper, count, p)
        return True
    if isinstance(rule, BlockRule) and not template.ordered:
        member = rule.membership(n)
        bounds = community_bounds(rule.split, n)
        sizes = np.diff(bounds)
        p_in = float(np.clip(rule.within / n**rule.exponent, 0.0, 1.0))
        p_out = float(np.clip(rule.across / n**rule.exponent, 0.0, 1.0))
        total = math.comb(n - 2, m - 2)
        for a in range(len(sizes)):
            for b in range(a, len(sizes)):
                mask = upper & (((member[:, None] == a) & (member[None, :] == b))
                                | ((member[:, None] == b) & (member[None, :] == a)))
                if not mask.any():
                    continue
                within = math.comb(int(sizes[a]) - 2, m - 2) if a == b else 0
                acc.add_block(mask, within, p_in)
                acc.add_block(mask, total - within, p_out)
        return True
    return False


def _enumerate(acc, spec, type_index):
    template, rule = spec.types[type_index]
    n, m = spec.n, template.size
    edges = np.array(template.edges, dtype=np.int64)
    if isinstance(rule, TableRule):
        chunks = [np.array(list(rule.entries), dtype=np.int64).reshape(-1, m)]
    else:
        universe = placement_universe(n, m, template.ordered)
        chunks = (unrank_placements_array(np.arange(lo, min(lo + _CHUNK, universe)), n, m,
                                          template.ordered)
                  for lo in range(0, universe, _CHUNK))
    for nodes in chunks:
        p = placement_probabilities(spec, type_index, nodes)
        keep = p > 0
        nodes, p = nodes[keep], p[keep]
        i = nodes[:, edges[:, 0]]
        j = nodes[:, edges[:, 1]]
        flat = (np.minimum(i, j) * n + np.maximum(i, j)).ravel()
        acc.add_pairs(flat, np.repeat(p, len(edges)))


def evaluation_cost(spec):
    """Probability evaluations needed by :func:`expected_adjacency`."""
    cost = 0
    for t, r in spec.types:
        if isinstance(r, UniformRule) or (isinstance(r, BlockRule) and not t.ordered):
            cost += spec.n * spec.n
        elif isinstance(r, TableRule):
            cost += len(r.entries) * len(t.edges)
        else:
            cost += placement_universe(spec.n, t.size, t.ordered) * len(t.edges)
    return cost


def expected_adjacency(spec, budget=DEFAULT_BUDGET):
    """Exact ``E[A_w]``, ``E[A_u]`` and their max row sums for ``spec``."""
    cost = evaluation_cost(spec)
    if cost > budget:
        raise CapacityError(
            f"exact expectation needs about {cost:.3g} probability evaluations "
            f"(budget {budget:.3g}); use a smaller n")
    acc = _Accumulator(spec.n)
    for t, (template, rule) in enumerate(spec.types):
        if not _closed_form(acc, spec, template, rule):
            _enumerate(acc, spec, t)
    return acc.result()


def normalize(a, delta):
    """Entrywise ``a / delta``."""
    if not delta > 0:
        raise DomainError(f"normalization constant must be positive, got {delta}")
    return np.asarray(a, dtype=float) / delta


def write_matrix(a, path):
    """Dense CSV: a line holding n, then n comma-separated rows."""
    a = np.asarray(a, dtype=float)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([a.shape[0]])
        for row in a:
            w.writerow([repr(float(x)) for x in row])


def read_matrix(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise DomainError(f"{path}: empty matrix file")
    n = int(rows[0][0])
    a = np.array([[float(x) for x in row] for row in rows[1:n + 1]], dtype=float)
    if a.shape != (n, n):
        raise DomainError(f"{path}: expected {n}x{n} entries, got {a.shape}")
    return a
