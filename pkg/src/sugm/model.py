"""Declarative SUGM specifications.

A model is a list of subgraph *types*, each pairing a
:class:`SubgraphTemplate` (the shape) with a probability rule that assigns a
formation probability to every placement of that shape on a node list.
:class:`ModelFamily` is the size-free description loaded from JSON;
``family.at(n)`` pins the node count and yields a :class:`SugmSpec`.
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from itertools import combinations, permutations
from pathlib import Path
from typing import Mapping, Sequence, Union

import numpy as np

from .combinatorics import placement_universe
from .errors import SpecError


class Semantics(str, enum.Enum):
    SET = "set"
    ORDERED = "ordered"


@dataclass(frozen=True)
class SubgraphTemplate:
    name: str
    size: int
    edges: tuple
    placement: Semantics = Semantics.SET

    def __post_init__(self):
        object.__setattr__(self, "placement", Semantics(self.placement))
        edges = tuple(tuple(int(x) for x in e) for e in self.edges)
        object.__setattr__(self, "edges", edges)
        if self.size < 2:
            raise SpecError(f"type {self.name!r}: size must be >= 2")
        if not edges:
            raise SpecError(f"type {self.name!r}: template has no edges")
        for e in edges:
            if len(e) != 2 or not 0 <= e[0] < e[1] < self.size:
                raise SpecError(
                    f"type {self.name!r}: edge {e} must satisfy 0 <= u < v < {self.size}")
        if len(set(edges)) != len(edges):
            raise SpecError(f"type {self.name!r}: duplicate edges")
        if self.placement is Semantics.SET and not self.is_symmetric():
            raise SpecError(
                f"type {self.name!r}: set semantics needs a relabeling-invariant template")

    def is_symmetric(self):
        es = set(self.edges)
        for perm in permutations(range(self.size)):
            mapped = {tuple(sorted((perm[u], perm[v]))) for u, v in es}
            if mapped != es:
                return False
        return True

    @property
    def ordered(self):
        return self.placement is Semantics.ORDERED

    def adjacency(self):
        """Local ``size x size`` 0/1 adjacency matrix of the template."""
        a = np.zeros((self.size, self.size))
        for u, v in self.edges:
            a[u, v] = a[v, u] = 1.0
        return a


def link(name="link"):
    return SubgraphTemplate(name, 2, ((0, 1),))


def clique(size, name=None):
    name = name or ("triangle" if size == 3 else f"clique{size}")
    return SubgraphTemplate(name, size, tuple(combinations(range(size), 2)))


# ---------------------------------------------------------------------------
# probability rules
#
# ``raw`` returns unclamped values for an (N, m) array of node lists;
# clamping to [0, 1] happens in one place, :func:`placement_probabilities`.


@dataclass(frozen=True)
class UniformRule:
    coefficient: float
    exponent: float

    def __post_init__(self):
        if self.coefficient < 0 or self.exponent < 0:
            raise SpecError("uniform rule needs coefficient >= 0 and exponent >= 0")

    def value(self, n):
        return self.coefficient / n**self.exponent

    def raw(self, nodes, n, template):
        return np.full(len(nodes), self.value(n))


def community_bounds(split, n):
    """Cut points of the contiguous community blocks.

    Community c holds node ids ``bounds[c] .. bounds[c+1]-1``; the first
    ``ceil(split[0] * n)`` ids form community 0, and so on cumulatively.
    """
    cuts = [0]
    acc = 0.0
    for frac in split[:-1]:
        acc += frac
        # guard against 0.7 * 100 == 70.00000000000001
        cuts.append(min(n, math.ceil(acc * n - 1e-9)))
    cuts.append(n)
    return tuple(cuts)


@dataclass(frozen=True)
class BlockRule:
    split: tuple
    within: float
    across: float
    exponent: float

    def __post_init__(self):
        object.__setattr__(self, "split", tuple(float(s) for s in self.split))
        if len(self.split) < 1 or any(s < 0 for s in self.split):
            raise SpecError("block rule needs nonnegative community fractions")
        if abs(sum(self.split) - 1.0) > 1e-9:
            raise SpecError("block rule split must sum to 1")
        if self.within < 0 or self.across < 0 or self.exponent < 0:
            raise SpecError("block rule coefficients and exponent must be >= 0")

    def membership(self, n):
        bounds = community_bounds(self.split, n)
        member = np.empty(n, dtype=np.int64)
        for c in range(len(bounds) - 1):
            member[bounds[c]:bounds[c + 1]] = c
        return member

    def raw(self, nodes, n, template):
        member = self.membership(n)[nodes]
        same = np.all(member == member[:, :1], axis=1)
        return np.where(same, self.within, self.across) / n**self.exponent


@dataclass(frozen=True)
class DistanceRule:
    coefficient: float
    epsilon: float

    def __post_init__(self):
        if self.epsilon <= 0:
            raise SpecError("distance rule needs epsilon > 0")

    def raw(self, nodes, n, template):
        pos = np.asarray(nodes, dtype=float) / (n - 1)
        total = np.zeros(len(nodes))
        for u, v in template.edges:
            total += np.log(np.abs(pos[:, u] - pos[:, v]) + self.epsilon)
        return -self.coefficient * total


@dataclass(frozen=True)
class TableRule:
    entries: Mapping = field(default_factory=dict)

    def __post_init__(self):
        table = {}
        for nodes, p in dict(self.entries).items():
            p = float(p)
            if not 0.0 <= p <= 1.0:
                raise SpecError(f"table probability {p} for {nodes} outside [0, 1]")
            table[tuple(int(x) for x in nodes)] = p
        object.__setattr__(self, "entries", table)

    def raw(self, nodes, n, template):
        key = (lambda row: tuple(sorted(row))) if not template.ordered else tuple
        return np.array([self.entries.get(key(row.tolist()), 0.0) for row in nodes])


Rule = Union[UniformRule, BlockRule, DistanceRule, TableRule]


@dataclass(frozen=True)
class ModelFamily:
    """Subgraph types whose probability rules are evaluated at a chosen n."""

    types: tuple

    def __post_init__(self):
        types = []
        for t, r in self.types:
            if isinstance(r, TableRule):
                for key in r.entries:
                    if len(key) != t.size:
                        raise SpecError(f"type {t.name!r}: table entry {key} has wrong length")
                if not t.ordered:
                    canon = {tuple(sorted(k)): p for k, p in r.entries.items()}
                    if len(canon) != len(r.entries):
                        raise SpecError(f"type {t.name!r}: table lists a node set twice")
                    r = TableRule(canon)
            types.append((t, r))
        object.__setattr__(self, "types", tuple(types))
        names = [t.name for t, _ in types]
        if len(set(names)) != len(names):
            raise SpecError(f"duplicate type names in {names}")

    @property
    def max_size(self):
        return max((t.size for t, _ in self.types), default=0)

    def at(self, n):
        return SugmSpec(n, self.types)


@dataclass(frozen=True)
class SugmSpec:
    n: int
    types: tuple

    def __post_init__(self):
        family = ModelFamily(self.types)
        object.__setattr__(self, "types", family.types)
        if self.n < family.max_size or self.n < 2:
            raise SpecError(f"n={self.n} is below the largest template size {family.max_size}")
        for t, r in self.types:
            if isinstance(r, TableRule):
                for key in r.entries:
                    if len(set(key)) != len(key) or max(key) >= self.n or min(key) < 0:
                        raise SpecError(f"type {t.name!r}: table entry {key} invalid for n={self.n}")

    @property
    def max_size(self):
        return max(t.size for t, _ in self.types) if self.types else 0

    @property
    def family(self):
        return ModelFamily(self.types)


@dataclass(frozen=True)
class Placement:
    type_index: int
    nodes: tuple


def make_placement(spec, type_index, nodes):
    """Validate ``nodes`` for ``spec`` and return the canonical placement."""
    template, _ = spec.types[type_index]
    nodes = tuple(int(x) for x in nodes)
    if len(nodes) != template.size or len(set(nodes)) != len(nodes):
        raise SpecError(f"placement {nodes} invalid for type {template.name!r}")
    if min(nodes) < 0 or max(nodes) >= spec.n:
        raise SpecError(f"placement {nodes} has node ids outside range({spec.n})")
    if not template.ordered:
        nodes = tuple(sorted(nodes))
    return Placement(type_index, nodes)


def placement_probabilities(spec, type_index, nodes):
    """Clamped probabilities for an ``(N, m)`` array of canonical node lists."""
    template, rule = spec.types[type_index]
    nodes = np.asarray(nodes, dtype=np.int64).reshape(-1, template.size)
    return np.clip(rule.raw(nodes, spec.n, template), 0.0, 1.0)


def placement_probability(spec, placement):
    p = make_placement(spec, placement.type_index, placement.nodes)
    return float(placement_probabilities(spec, p.type_index, [p.nodes])[0])


def placement_count(spec, type_index):
    template, _ = spec.types[type_index]
    return placement_universe(spec.n, template.size, template.ordered)


def enumerate_placements(spec, type_index):
    """All canonical node lists of a type as an array (small n only)."""
    template, _ = spec.types[type_index]
    it = permutations if template.ordered else combinations
    rows = list(it(range(spec.n), template.size))
    return np.array(rows, dtype=np.int64).reshape(-1, template.size)


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class Finding:
    type_name: str
    clause: str
    passed: object  # True, False, or None when the clause does not apply
    detail: str
    value: object = None


@dataclass(frozen=True)
class ValidationReport:
    findings: tuple

    @property
    def ok(self):
        return all(f.passed is not False for f in self.findings)

    def for_type(self, name):
        return [f for f in self.findings if f.type_name == name]

    def get(self, name, clause):
        for f in self.findings:
            if f.type_name == name and f.clause == clause:
                return f
        raise KeyError((name, clause))

    def lines(self):
        mark = {True: "PASS", False: "FAIL", None: "n/a "}
        return [f"{mark[f.passed]} {f.type_name:<12} {f.clause:<10} {f.detail}"
                for f in self.findings]


def _pairs_containing(n, template):
    # placements of the type that contain a fixed pair of nodes
    m = template.size
    if template.ordered:
        return m * (m - 1) * math.perm(n - 2, m - 2)
    return math.comb(n - 2, m - 2)


def _table_support(spec, template, rule):
    total = placement_universe(spec.n, template.size, template.ordered)
    positive = [k for k, p in rule.entries.items() if p > 0]
    overall = len(positive) / total
    per_pair = {}
    for key in positive:
        for i, j in combinations(sorted(key), 2):
            per_pair[(i, j)] = per_pair.get((i, j), 0) + 1
    denom = _pairs_containing(spec.n, template)
    n_pairs = spec.n * (spec.n - 1) // 2
    if len(per_pair) < n_pairs:
        pair_min = 0.0
    else:
        pair_min = min(per_pair.values()) / denom
    return overall, pair_min


def _block_support(spec, template, rule):
    # exact positive fractions from community composition counts
    sizes = [int(s) for s in np.diff(community_bounds(rule.split, spec.n))]
    m = template.size
    if rule.within > 0 and rule.across > 0:
        return 1.0, 1.0
    if rule.within == 0 and rule.across == 0:
        return 0.0, 0.0

    def positive(total, same):
        return same if rule.across == 0 else total - same

    overall = positive(math.comb(spec.n, m), sum(math.comb(s, m) for s in sizes))
    overall /= math.comb(spec.n, m)
    pair_min = 1.0
    for a in range(len(sizes)):
        for b in range(a, len(sizes)):
            rest = list(sizes)
            rest[a] -= 1
            rest[b] -= 1
            if min(rest) < 0:
                continue
            denom = math.comb(spec.n - 2, m - 2)
            same = math.comb(rest[a], m - 2) if a == b else 0
            pair_min = min(pair_min, positive(denom, same) / denom)
    return overall, pair_min


def validate_spec(spec):
    """Check each type against the A5 exponent window and A6 support fractions."""
    findings = []
    for t, r in spec.types:
        m = t.size
        lo, hi = m - 2, m - 1
        if isinstance(r, (UniformRule, BlockRule)):
            h = r.exponent
            passed = lo < h < hi
            findings.append(Finding(t.name, "A5", passed,
                                    f"h={h:g} {'in' if passed else 'not in'} ({lo}, {hi})", h))
            coefs = [r.coefficient] if isinstance(r, UniformRule) else [r.within, r.across]
            pos = [c for c in coefs if c > 0]
            rng = (min(pos), max(pos)) if pos else (0.0, 0.0)
            findings.append(Finding(t.name, "A5-range", bool(pos) or None,
                                    f"b in [{rng[0]:g}, {rng[1]:g}]", rng))
            top = max(coefs) / spec.n**h
            findings.append(Finding(t.name, "clamp", top <= 1.0,
                                    "no clamping" if top <= 1.0
                                    else f"max probability {top:.4g} clamped to 1", top))
            if isinstance(r, UniformRule):
                xi = (1.0, 1.0) if r.coefficient > 0 else (0.0, 0.0)
            else:
                xi = _block_support(spec, t, r)
        elif isinstance(r, DistanceRule):
            findings.append(Finding(t.name, "A5", None, "distance rule is not of the b/n^h form"))
            compact = np.arange(m, dtype=np.int64)[None, :]
            spread = np.linspace(0, spec.n - 1, m).round().astype(np.int64)[None, :]
            top = float(r.raw(compact, spec.n, t)[0])
            bottom = float(r.raw(spread, spec.n, t)[0])
            detail = "no clamping" if top <= 1.0 else f"max probability {top:.4g} clamped to 1"
            if bottom < 0:
                detail += "; negative values clamped to 0"
            findings.append(Finding(t.name, "clamp", top <= 1.0, detail, top))
            findings.append(Finding(t.name, "A6", None, "support fractions checked for table rules only"))
            continue
        else:
            findings.append(Finding(t.name, "A5", None, "table rule is not of the b/n^h form"))
            xi = _table_support(spec, t, r)
        findings.append(Finding(t.name, "A6(1)", xi[0] > 0, f"xi={xi[0]:.6g}", xi[0]))
        findings.append(Finding(t.name, "A6(2)", xi[1] > 0, f"xi_pair={xi[1]:.6g}", xi[1]))
    return ValidationReport(tuple(findings))


# ---------------------------------------------------------------------------
# JSON model files


def rule_from_dict(d):
    kind = d.get("kind")
    try:
        if kind == "uniform":
            return UniformRule(float(d["coefficient"]), float(d["exponent"]))
        if kind == "block":
            return BlockRule(tuple(d["split"]), float(d["within"]), float(d["across"]),
                             float(d["exponent"]))
        if kind == "distance":
            return DistanceRule(float(d["coefficient"]), float(d["epsilon"]))
        if kind == "table":
            return TableRule({tuple(e["nodes"]): e["p"] for e in d.get("entries", [])})
    except KeyError as exc:
        raise SpecError(f"rule of kind {kind!r} is missing field {exc}") from None
    raise SpecError(f"unknown rule kind {kind!r}")


def rule_to_dict(rule):
    if isinstance(rule, UniformRule):
        return {"kind": "uniform", "coefficient": rule.coefficient, "exponent": rule.exponent}
    if isinstance(rule, BlockRule):
        return {"kind": "block", "split": list(rule.split), "within": rule.within,
                "across": rule.across, "exponent": rule.exponent}
    if isinstance(rule, DistanceRule):
        return {"kind": "distance", "coefficient": rule.coefficient, "epsilon": rule.epsilon}
    return {"kind": "table",
            "entries": [{"nodes": list(k), "p": p} for k, p in rule.entries.items()]}


def family_from_dict(data):
    types = []
    for i, item in enumerate(data.get("types", [])):
        name = item.get("name", f"type{i}")
        try:
            template = SubgraphTemplate(name, int(item["size"]),
                                        tuple(tuple(e) for e in item["edges"]),
                                        item.get("placement", "set"))
        except KeyError as exc:
            raise SpecError(f"type {name!r} is missing field {exc}") from None
        except ValueError as exc:
            if isinstance(exc, SpecError):
                raise
            raise SpecError(f"type {name!r}: {exc}") from None
        if "rule" not in item:
            raise SpecError(f"type {name!r} has no rule")
        try:
            rule = rule_from_dict(item["rule"])
        except SpecError as exc:
            raise SpecError(f"type {name!r}: {exc}") from None
        types.append((template, rule))
    return ModelFamily(tuple(types))


def family_to_dict(family):
    return {"types": [
        {"name": t.name, "size": t.size, "edges": [list(e) for e in t.edges],
         "placement": t.placement.value, "rule": rule_to_dict(r)}
        for t, r in family.types]}


def load_family(path):
    """Load a model family from a JSON file or one of the bundled model names."""
    if str(path) in BUILTIN_MODELS:
        return BUILTIN_MODELS[str(path)]()
    with open(Path(path)) as fh:
        return family_from_dict(json.load(fh))


# ---------------------------------------------------------------------------
# the three link+triangle models used in the experiments


def uniform_model():
    return ModelFamily(((link(), UniformRule(5.0, 0.65)),
                        (clique(3), UniformRule(1.0, 1.4))))


def sbm_model(split: Sequence[float] = (0.7, 0.3)):
    return ModelFamily(((link(), BlockRule(tuple(split), 7.0, 2.0, 0.65)),
                        (clique(3), BlockRule(tuple(split), 1.0, 0.1, 1.4))))


def distance_model():
    return ModelFamily(((link(), DistanceRule(3e-2, 1e-4)),
                        (clique(3), DistanceRule(5e-5, 1e-4))))


BUILTIN_MODELS = {"uniform": uniform_model, "sbm": sbm_model, "distance": distance_model}
