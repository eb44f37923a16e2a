"""Seeded sampling of SUGM realizations.

Every placement of every type is an independent Bernoulli trial. Placements
are addressed by an integer rank (lexicographic subset order, see
:mod:`sugm.combinatorics`), and each type is split into probability
*classes*:

* homogeneous classes (uniform rules, block-rule community compositions)
  share one probability and are sampled with geometric skips over ranks;
* heterogeneous classes (distance rules) are skip-sampled at the class
  maximum and thinned with a second uniform draw;
* table rules draw one Bernoulli per listed entry.

Classes with fewer than ``SCAN_THRESHOLD`` candidates are scanned
exhaustively instead.

RNG contract: the rank space of each class is cut into fixed-width chunks
and chunk ``c`` of class ``k`` of type ``t`` draws from a Philox generator
keyed by ``(seed, t)`` whose counter starts at the block addressed by
``(k, c)``. Results therefore do not depend on the order in which chunks are
processed, and the merge into the adjacency accumulator always runs in
``(t, k, c)`` order.
"""
from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass

import numpy as np

from .combinatorics import (MAX_RANK_SPACE, placement_universe,
                            unrank_combinations_array, unrank_placements_array)
from .errors import CapacityError, DomainError
from .model import (BlockRule, DistanceRule, TableRule, UniformRule,
                    community_bounds, placement_probabilities)

SCAN_THRESHOLD = 100_000
SCAN_CHUNK = 1 << 16
SKIP_CHUNK = 1 << 22
# refuse specs whose expected number of candidate draws exceeds this
MAX_EXPECTED_DRAWS = 5e8

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class Realization:
    n: int
    weighted: np.ndarray
    unweighted: np.ndarray
    realized_placements: tuple
    seed: int


def stream(seed, type_index, class_index, chunk_index):
    """Independent generator for one chunk of one class of one type.

    Philox is keyed by ``(seed, type_index)``; the class and chunk indices
    occupy the upper counter words, so every chunk owns a disjoint
    2**128-long block of the counter space.
    """
    bg = np.random.Philox(key=(int(seed) & _MASK64, int(type_index)),
                          counter=(0, 0, int(chunk_index), int(class_index)))
    return np.random.Generator(bg)


@dataclass(frozen=True)
class _Class:
    size: int             # number of candidate ranks
    p_max: float          # skip-sampling probability
    homogeneous: bool
    unrank: object        # callable: rank array -> (N, m) node array


def _classes(spec, type_index):
    template, rule = spec.types[type_index]
    n, m = spec.n, template.size
    universe = placement_universe(n, m, template.ordered)
    if universe >= MAX_RANK_SPACE:
        raise CapacityError(
            f"type {template.name!r}: {universe} placements exceed the int64 rank space")

    def full(ranks):
        return unrank_placements_array(ranks, n, m, template.ordered)

    if isinstance(rule, UniformRule):
        p = float(np.clip(rule.value(n), 0.0, 1.0))
        return [_Class(universe, p, True, full)]

    if isinstance(rule, BlockRule) and not template.ordered:
        bounds = community_bounds(rule.split, n)
        sizes = [bounds[c + 1] - bounds[c] for c in range(len(bounds) - 1)]
        out = []
        for comp in _compositions(m, len(sizes)):
            counts = [math.comb(s, k) for s, k in zip(sizes, comp)]
            total = math.prod(counts)
            if total == 0:
                continue
            coef = rule.within if max(comp) == m else rule.across
            p = float(np.clip(coef / n**rule.exponent, 0.0, 1.0))
            out.append(_Class(total, p, True, _block_unranker(bounds, sizes, comp, counts)))
        return out

    if isinstance(rule, TableRule):
        keys = np.array(list(rule.entries), dtype=np.int64).reshape(-1, m)
        return [_Class(len(keys), 1.0, False, lambda ranks: keys[ranks])]

    # heterogeneous rank space: distance rules, block rules on ordered lists
    if isinstance(rule, DistanceRule):
        compact = np.arange(m, dtype=np.int64)[None, :]
        p_max = float(placement_probabilities(spec, type_index, compact)[0])
    else:
        p_max = float(np.clip(max(rule.within, rule.across) / n**rule.exponent, 0.0, 1.0))
    return [_Class(universe, p_max, False, full)]


def _compositions(total, parts):
    for cut in itertools.combinations(range(total + parts - 1), parts - 1):
        edges = (-1, *cut, total + parts - 1)
        yield tuple(edges[i + 1] - edges[i] - 1 for i in range(parts))


def _block_unranker(bounds, sizes, comp, counts):
    def unrank(ranks):
        ranks = np.asarray(ranks, dtype=np.int64)
        cols = []
        # mixed radix, last community varies fastest
        for c in reversed(range(len(sizes))):
            sub = ranks % counts[c]
            ranks = ranks // counts[c]
            if comp[c]:
                cols.append(unrank_combinations_array(sub, sizes[c], comp[c]) + bounds[c])
        return np.concatenate(cols[::-1], axis=1)
    return unrank


def _skip_positions(rng, width, p):
    """Success offsets in ``[0, width)`` for i.i.d. Bernoulli(p) trials."""
    if p >= 1.0:
        return np.arange(width, dtype=np.int64)
    if p <= 0.0:
        return np.empty(0, dtype=np.int64)
    log_q = math.log1p(-p)
    mean = width * p
    batch = int(mean + 6.0 * math.sqrt(mean) + 16)
    out = []
    cur = -1
    while True:
        u = 1.0 - rng.random(batch)  # uniform on (0, 1]
        skips = np.minimum(np.floor(np.log(u) / log_q), width).astype(np.int64)
        pos = cur + np.cumsum(skips + 1)
        keep = pos[pos < width]
        out.append(keep)
        if keep.size < pos.size:
            break
        cur = int(pos[-1])
    return np.concatenate(out)


def _sample_class(spec, type_index, cls, rng, lo, hi, scan):
    """Realized node lists among ranks ``[lo, hi)`` of one class."""
    if scan:
        u = rng.random(hi - lo)
        ranks = np.arange(lo, hi, dtype=np.int64)
        if cls.homogeneous:
            return cls.unrank(ranks[u < cls.p_max])
        nodes = cls.unrank(ranks)
        return nodes[u < placement_probabilities(spec, type_index, nodes)]
    nodes = cls.unrank(lo + _skip_positions(rng, hi - lo, cls.p_max))
    if cls.homogeneous:
        return nodes
    # thinning: accept with p / p_max
    p = placement_probabilities(spec, type_index, nodes)
    return nodes[rng.random(len(nodes)) * cls.p_max < p]


class _Plan:
    """Seed-independent sampling work for one spec: classes, chunks and,
    for small scanned chunks, the pre-unranked candidate edges."""

    def __init__(self, spec, method):
        if method not in ("auto", "scan", "skip"):
            raise DomainError(f"unknown sampling method {method!r}")
        self.n = spec.n
        self.spec = spec
        plans = [_classes(spec, t) for t in range(len(spec.types))]
        expected = sum(c.size * c.p_max for cs in plans for c in cs)
        if expected > MAX_EXPECTED_DRAWS:
            raise CapacityError(f"about {expected:.3g} candidate draws exceed the sampling budget")
        self.work = []
        for t, classes in enumerate(plans):
            template, rule = spec.types[t]
            edges = np.array(template.edges, dtype=np.int64)
            for k, cls in enumerate(classes):
                if isinstance(rule, TableRule):
                    scan = True
                elif method == "auto":
                    scan = cls.size < SCAN_THRESHOLD
                else:
                    scan = method == "scan"
                chunk = SCAN_CHUNK if scan else SKIP_CHUNK
                for c, lo in enumerate(range(0, cls.size, chunk)):
                    hi = min(lo + chunk, cls.size)
                    cached = None
                    if scan and cls.size < SCAN_THRESHOLD and cls.p_max > 0:
                        nodes = cls.unrank(np.arange(lo, hi, dtype=np.int64))
                        probs = (np.full(len(nodes), cls.p_max) if cls.homogeneous
                                 else placement_probabilities(spec, t, nodes))
                        cached = (self._pairs(nodes, edges), probs)
                    self.work.append((t, k, c, cls, lo, hi, scan, edges, cached))
        self.types = len(plans)

    def _pairs(self, nodes, edges):
        i = nodes[:, edges[:, 0]]
        j = nodes[:, edges[:, 1]]
        return np.minimum(i, j) * self.n + np.maximum(i, j)

    def draw(self, seed):
        n = self.n
        flat = []
        counts = [0] * self.types
        for t, k, c, cls, lo, hi, scan, edges, cached in self.work:
            if cls.p_max <= 0:
                continue
            rng = stream(seed, t, k, c)
            if cached is not None:
                pairs, probs = cached
                hit = rng.random(hi - lo) < probs
                realized = pairs[hit]
            else:
                nodes = _sample_class(self.spec, t, cls, rng, lo, hi, scan)
                realized = self._pairs(nodes, edges)
            if realized.size:
                counts[t] += len(realized)
                flat.append(realized.ravel())
        if flat:
            upper = np.bincount(np.concatenate(flat), minlength=n * n).reshape(n, n)
        else:
            upper = np.zeros((n, n), dtype=np.int64)
        weighted = upper + upper.T
        unweighted = np.minimum(weighted, 1)
        weighted.setflags(write=False)
        unweighted.setflags(write=False)
        return Realization(n, weighted, unweighted, tuple(counts), int(seed) & _MASK64)


def sample(spec, seed, method="auto"):
    """Draw one realization of ``spec``.

    ``method`` selects the per-class path: ``"auto"`` scans classes below
    ``SCAN_THRESHOLD`` candidates and skip-samples the rest, ``"scan"`` and
    ``"skip"`` force one path everywhere (used to cross-check them).
    """
    return _Plan(spec, method).draw(seed)


def sample_many(spec, seeds, method="auto"):
    """``sample(spec, s)`` for each seed in turn, planning the spec once."""
    plan = _Plan(spec, method)
    for s in seeds:
        yield plan.draw(s)


def write_edge_list(realization, path, variant="weighted"):
    """Write ``i,j,weight`` rows for every nonzero entry with ``i < j``."""
    a = realization.weighted if variant == "weighted" else realization.unweighted
    i, j = np.nonzero(np.triu(a, 1))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["i", "j", "weight"])
        for a_, b_, x in zip(i.tolist(), j.tolist(), a[i, j].tolist()):
            w.writerow([a_, b_, x])


def read_edge_list(path, n):
    """Read an edge-list CSV back into a dense symmetric matrix."""
    a = np.zeros((n, n))
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            i, j, x = int(row["i"]), int(row["j"]), float(row["weight"])
            a[i, j] = a[j, i] = x
    return a
