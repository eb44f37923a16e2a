"""Ranking and unranking of k-subsets in lexicographic order.

The scalar functions work with exact Python integers. The ``*_array``
variants are vectorized over int64 ranks and are what the sampler uses to
turn skip-sampled ranks back into node lists.
"""
from itertools import permutations
from math import comb, factorial

import numpy as np

from .errors import CapacityError, DomainError

# Largest placement universe addressable with int64 ranks.
MAX_RANK_SPACE = 2**62


def unrank_combination(rank, n, k):
    """Return the ``rank``-th k-subset of ``{0..n-1}`` in lexicographic order."""
    total = comb(n, k)
    if not 0 <= rank < total:
        raise DomainError(f"rank {rank} out of range [0, {total}) for C({n},{k})")
    out = []
    x = 0
    for i in range(k, 0, -1):
        # skip over all subsets whose next element is x
        while True:
            block = comb(n - x - 1, i - 1)
            if rank < block:
                break
            rank -= block
            x += 1
        out.append(x)
        x += 1
    return tuple(out)


def rank_combination(subset, n):
    """Inverse of :func:`unrank_combination` for a sorted subset."""
    k = len(subset)
    rank = 0
    prev = -1
    for i, a in enumerate(subset):
        if a <= prev or a >= n:
            raise DomainError(f"{subset!r} is not a sorted subset of range({n})")
        remaining = k - i
        # subsets that share the prefix but choose a smaller element here
        rank += comb(n - prev - 1, remaining) - comb(n - a, remaining)
        prev = a
    return rank


def _tail_counts(n, k):
    # c[a] = C(n - a, k) for a = 0..n, non-increasing in a
    counts = [comb(n - a, k) for a in range(n + 1)]
    return np.array(counts, dtype=np.int64)


def unrank_combinations_array(ranks, n, k):
    """Vectorized :func:`unrank_combination`; returns an ``(len(ranks), k)`` array."""
    if comb(n, k) >= MAX_RANK_SPACE:
        raise CapacityError(f"C({n},{k}) exceeds the int64 rank space")
    ranks = np.asarray(ranks, dtype=np.int64).copy()
    out = np.empty((ranks.size, k), dtype=np.int64)
    start = np.zeros(ranks.size, dtype=np.int64)
    for i in range(k):
        rem = k - i
        c = _tail_counts(n, rem)
        neg = -c
        target = c[start] - ranks
        a = np.searchsorted(neg, -target, side="right") - 1
        ranks -= c[start] - c[a]
        out[:, i] = a
        start = a + 1
    return out


def placement_universe(n, k, ordered):
    """Number of placements of a size-k template on n nodes."""
    if ordered:
        return comb(n, k) * factorial(k)
    return comb(n, k)


def unrank_placements_array(ranks, n, k, ordered):
    """Map placement ranks to node lists.

    Unordered placements use lexicographic subset order. Ordered placements
    use ``rank = subset_rank * k! + perm_index`` where ``perm_index`` walks
    :func:`itertools.permutations` of the sorted subset.
    """
    if not ordered:
        return unrank_combinations_array(ranks, n, k)
    ranks = np.asarray(ranks, dtype=np.int64)
    f = factorial(k)
    subsets = unrank_combinations_array(ranks // f, n, k)
    perms = np.array(list(permutations(range(k))), dtype=np.int64)
    return np.take_along_axis(subsets, perms[ranks % f], axis=1)
