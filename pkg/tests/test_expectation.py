import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import link_triangle_spec, tiny_specs
from sugm import oracle
from sugm.errors import CapacityError, DomainError
from sugm.expectation import (evaluation_cost, expected_adjacency, normalize, read_matrix,
                              write_matrix)
from sugm.model import (BlockRule, DistanceRule, SubgraphTemplate, SugmSpec, TableRule,
                        UniformRule, clique, distance_model, link, sbm_model, uniform_model)


def test_link_triangle_instance():
    e = expected_adjacency(link_triangle_spec())
    assert e.expected_weighted[0, 1] == 1.0
    assert e.expected_unweighted[0, 1] == 0.75
    assert e.delta_weighted == 2.0
    assert e.delta_unweighted == 1.5


def test_all_zero_rules():
    e = expected_adjacency(SugmSpec(7, ((link(), UniformRule(0, 0.5)), (clique(3), UniformRule(0, 1.5)))))
    assert not e.expected_weighted.any() and not e.expected_unweighted.any()
    assert e.delta_weighted == 0.0 == e.delta_unweighted


@pytest.mark.parametrize("rule", [UniformRule(5, 0.65), DistanceRule(0.03, 1e-4),
                                  BlockRule((0.7, 0.3), 7, 2, 0.65)])
def test_links_only_single_cover_identity(rule):
    e = expected_adjacency(SugmSpec(40, ((link(), rule),)))
    assert (e.expected_unweighted == e.expected_weighted).all()


def test_matches_oracle_on_tiny_specs():
    for spec in tiny_specs():
        e = expected_adjacency(spec)
        ew, eu = oracle.exact_expectation(oracle.from_spec(spec))
        assert np.abs(e.expected_weighted - ew).max() <= 1e-12
        assert np.abs(e.expected_unweighted - eu).max() <= 1e-12


def test_closed_form_matches_enumeration_for_block_rules():
    spec = sbm_model().at(23)
    e = expected_adjacency(spec)
    table = {}
    from sugm.model import enumerate_placements, placement_probabilities
    for t in range(2):
        nodes = enumerate_placements(spec, t)
        for row, p in zip(nodes, placement_probabilities(spec, t, nodes)):
            table.setdefault(t, {})[tuple(row)] = p
    as_table = SugmSpec(23, ((link(), TableRule(table[0])), (clique(3), TableRule(table[1]))))
    f = expected_adjacency(as_table)
    assert np.abs(e.expected_weighted - f.expected_weighted).max() < 1e-13
    assert np.abs(e.expected_unweighted - f.expected_unweighted).max() < 1e-13


def test_ordered_uniform_closed_form():
    path = SubgraphTemplate("path", 3, ((0, 1), (1, 2)), "ordered")
    e = expected_adjacency(SugmSpec(5, ((path, UniformRule(0.1, 0.0)),)))
    # pair covered by 2 edges * 2 orientations * 3 free third nodes = 12 placements
    assert e.expected_weighted[0, 1] == pytest.approx(1.2)
    assert e.expected_unweighted[0, 1] == pytest.approx(1 - 0.9**12)


def test_uniform_delta_values():
    e = expected_adjacency(uniform_model().at(400))
    assert e.delta_weighted == pytest.approx(399 * 5 / 400**0.65 + 399 * 398 / 400**1.4,
                                             rel=1e-12)


def test_near_one_probabilities_are_accurate():
    # 1 - (1 - p)^k with p close to 1: log-space accumulation keeps full precision
    spec = SugmSpec(4, ((clique(3), UniformRule(0.999999, 0.0)),))
    e = expected_adjacency(spec)
    assert e.expected_unweighted[0, 1] == 1 - (1e-6) ** 2


def test_invariants_on_builtin_models():
    for fam in (uniform_model(), sbm_model(), distance_model()):
        e = expected_adjacency(fam.at(60))
        w, u = e.expected_weighted, e.expected_unweighted
        assert (w == w.T).all() and (u == u.T).all()
        assert not np.diag(w).any() and not np.diag(u).any()
        assert (u >= 0).all() and (u <= np.minimum(w, 1) + 1e-15).all()
        assert e.delta_unweighted <= e.delta_weighted
        assert e.delta_weighted == w.sum(axis=1).max()
        assert normalize(w, e.delta_weighted).sum(axis=1).max() == pytest.approx(1.0, abs=1e-15)


def test_capacity_budget():
    spec = distance_model().at(4000)
    assert evaluation_cost(spec) > 1e10
    with pytest.raises(CapacityError, match="smaller n"):
        expected_adjacency(spec)
    with pytest.raises(CapacityError):
        expected_adjacency(distance_model().at(50), budget=10)


def test_normalize():
    a = 2 * (np.ones((3, 3)) - np.eye(3))
    assert (normalize(a, 2) == a / 2).all()
    assert (normalize(a, 1) == a).all()
    for bad in (0, -1):
        with pytest.raises(DomainError):
            normalize(a, bad)


def test_matrix_csv_roundtrip(tmp_path):
    e = expected_adjacency(distance_model().at(30))
    path = tmp_path / "m.csv"
    write_matrix(e.expected_weighted, path)
    assert path.read_text().splitlines()[0] == "30"
    assert (read_matrix(path) == e.expected_weighted).all()


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_random_enumerated_models_match_oracle(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 6))
    entries2 = {}
    entries3 = {}
    for _ in range(int(rng.integers(1, 6))):
        entries2[tuple(sorted(rng.choice(n, 2, replace=False).tolist()))] = float(rng.uniform())
    for _ in range(int(rng.integers(0, 5))):
        entries3[tuple(sorted(rng.choice(n, 3, replace=False).tolist()))] = float(rng.uniform())
    spec = SugmSpec(n, ((link(), TableRule(entries2)), (clique(3), TableRule(entries3))))
    e = expected_adjacency(spec)
    ew, eu = oracle.exact_expectation(oracle.from_spec(spec))
    assert np.abs(e.expected_weighted - ew).max() <= 1e-12
    assert np.abs(e.expected_unweighted - eu).max() <= 1e-12
    # union bound, equality exactly where at most one positive cover exists
    assert (eu <= ew + 1e-15).all()
