import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sugm.errors import SpecError
from sugm.model import (BlockRule, DistanceRule, ModelFamily, Placement, Semantics,
                        SubgraphTemplate, SugmSpec, TableRule, UniformRule, clique,
                        community_bounds, distance_model, enumerate_placements, family_from_dict,
                        family_to_dict, link, load_family, placement_count, placement_probability,
                        sbm_model, uniform_model, validate_spec)


def test_uniform_link_probability_n100():
    spec = uniform_model().at(100)
    # 5 / 100**0.65 = 0.25059361681363...
    assert placement_probability(spec, Placement(0, (3, 17))) == pytest.approx(0.2505936168136361, abs=1e-15)


def test_distance_link_probability_n11():
    spec = distance_model().at(11)
    p = placement_probability(spec, Placement(0, (0, 1)))
    assert p == pytest.approx(-0.03 * math.log(0.1001), rel=1e-14)
    assert p == pytest.approx(0.06904756777982886, abs=1e-15)


@pytest.mark.parametrize("rule", [UniformRule(0.0, 0.5), BlockRule((0.5, 0.5), 0.0, 0.0, 0.5),
                                  DistanceRule(0.0, 1e-4), TableRule({})])
def test_zero_coefficient_gives_zero(rule):
    spec = SugmSpec(6, ((link(), rule),))
    assert placement_probability(spec, Placement(0, (1, 4))) == 0.0


def test_placement_counts():
    set_tri = SugmSpec(4, ((clique(3), UniformRule(1, 1.5)),))
    ord_tri = SugmSpec(4, ((SubgraphTemplate("t", 3, ((0, 1), (0, 2), (1, 2)), "ordered"),
                            UniformRule(1, 1.5)),))
    assert placement_count(set_tri, 0) == 4
    assert placement_count(ord_tri, 0) == 24
    assert placement_count(SugmSpec(2, ((link(), UniformRule(1, 0.5)),)), 0) == 1
    assert len(enumerate_placements(ord_tri, 0)) == 24


def test_validate_a5_pass_and_fail():
    ok = validate_spec(SugmSpec(50, ((link(), UniformRule(5, 0.65)),)))
    assert ok.get("link", "A5").passed is True
    bad = validate_spec(SugmSpec(50, ((clique(3), UniformRule(1, 2.5)),)))
    assert bad.get("triangle", "A5").passed is False
    assert not bad.ok


def test_validate_table_full_support():
    entries = {k: 0.3 for k in [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)]}
    report = validate_spec(SugmSpec(4, ((clique(3), TableRule(entries)),)))
    assert report.get("triangle", "A6(1)").value == 1.0
    assert report.get("triangle", "A6(2)").value == 1.0


def test_validate_table_partial_support():
    # one of four triangles: pair (0,1) is in 2 triangles, 1 positive
    report = validate_spec(SugmSpec(4, ((clique(3), TableRule({(0, 1, 2): 0.5})),)))
    assert report.get("triangle", "A6(1)").value == 0.25
    assert report.get("triangle", "A6(2)").value == 0.0
    assert report.get("triangle", "A6(2)").passed is False


def test_validate_block_with_zero_across():
    # two communities of 5: pairs across communities have no positive link
    spec = SugmSpec(10, ((link(), BlockRule((0.5, 0.5), 3.0, 0.0, 0.5)),))
    report = validate_spec(spec)
    assert report.get("link", "A6(1)").value == pytest.approx(20 / 45)
    assert report.get("link", "A6(2)").value == 0.0


def test_clamping_is_flagged():
    report = validate_spec(uniform_model().at(5))
    assert report.get("link", "clamp").passed is False
    spec = uniform_model().at(5)
    assert placement_probability(spec, Placement(0, (0, 1))) == 1.0


def test_builtins_validate_at_moderate_n():
    for fam in (uniform_model(), sbm_model()):
        assert validate_spec(fam.at(200)).ok
    assert validate_spec(distance_model().at(200)).ok


def test_validation_is_pure():
    spec = sbm_model().at(120)
    assert validate_spec(spec) == validate_spec(spec)


def test_sbm_membership_70_30():
    rule = sbm_model().types[0][1]
    member = rule.membership(100)
    assert (member[:70] == 0).all() and (member[70:] == 1).all()
    assert community_bounds((0.7, 0.3), 11) == (0, 8, 11)  # ceil(7.7) = 8


def test_sbm_probabilities_within_and_across():
    spec = sbm_model().at(100)
    assert placement_probability(spec, Placement(0, (0, 69))) == pytest.approx(7 / 100**0.65)
    assert placement_probability(spec, Placement(0, (69, 70))) == pytest.approx(2 / 100**0.65)
    assert placement_probability(spec, Placement(1, (70, 80, 99))) == pytest.approx(1 / 100**1.4)
    assert placement_probability(spec, Placement(1, (0, 1, 99))) == pytest.approx(0.1 / 100**1.4)


def test_distance_negative_values_clamp_to_zero():
    spec = SugmSpec(11, ((link(), DistanceRule(0.03, 1e-4)),))
    # positions 0 and 1: -0.03 * ln(1.0001) < 0
    assert placement_probability(spec, Placement(0, (0, 10))) == 0.0


def test_structural_errors():
    with pytest.raises(SpecError):
        SubgraphTemplate("bad", 3, ((0, 3),))
    with pytest.raises(SpecError):
        SubgraphTemplate("dup", 3, ((0, 1), (0, 1)))
    with pytest.raises(SpecError):
        SubgraphTemplate("path", 3, ((0, 1), (1, 2)), Semantics.SET)
    with pytest.raises(SpecError):
        SugmSpec(2, ((clique(3), UniformRule(1, 1.5)),))
    with pytest.raises(SpecError):
        ModelFamily(((link(), UniformRule(1, 0.5)), (link(), UniformRule(2, 0.5))))
    with pytest.raises(SpecError):
        TableRule({(0, 1): 1.5})
    with pytest.raises(SpecError):
        SugmSpec(4, ((link(), TableRule({(0, 9): 0.5})),))


def test_set_table_keys_are_canonicalized():
    spec = SugmSpec(4, ((clique(3), TableRule({(2, 0, 1): 0.4})),))
    assert placement_probability(spec, Placement(0, (1, 2, 0))) == 0.4


def test_ordered_path_template_is_allowed():
    path = SubgraphTemplate("path", 3, ((0, 1), (1, 2)), "ordered")
    spec = SugmSpec(5, ((path, TableRule({(0, 1, 2): 0.5})),))
    assert placement_probability(spec, Placement(0, (0, 1, 2))) == 0.5
    assert placement_probability(spec, Placement(0, (2, 1, 0))) == 0.0


def test_json_roundtrip(tmp_path):
    for fam in (uniform_model(), sbm_model(), distance_model()):
        path = tmp_path / "m.json"
        path.write_text(json.dumps(family_to_dict(fam)))
        assert load_family(str(path)) == fam
    table = ModelFamily(((clique(3), TableRule({(0, 1, 2): 0.25})),))
    assert family_from_dict(json.loads(json.dumps(family_to_dict(table)))) == table


def test_builtin_names_load():
    assert load_family("uniform") == uniform_model()


def test_bad_json_rule_kind():
    with pytest.raises(SpecError):
        family_from_dict({"types": [{"name": "l", "size": 2, "edges": [[0, 1]],
                                     "placement": "set", "rule": {"kind": "nope"}}]})


@settings(max_examples=100, deadline=None)
@given(st.integers(3, 40), st.floats(0, 20), st.floats(0, 3), st.data())
def test_probabilities_in_unit_interval_and_permutation_invariant(n, coef, h, data):
    fam = ModelFamily(((clique(3), UniformRule(coef, h)),
                       (link(), BlockRule((0.4, 0.6), coef, coef / 2, h)),
                       (SubgraphTemplate("d", 3, ((0, 1), (0, 2), (1, 2))), DistanceRule(coef / 10, 1e-3))))
    spec = fam.at(n)
    nodes = data.draw(st.lists(st.integers(0, n - 1), min_size=3, max_size=3, unique=True))
    perm = data.draw(st.permutations(nodes))
    for t in (0, 2):
        p = placement_probability(spec, Placement(t, tuple(nodes)))
        assert 0.0 <= p <= 1.0
        assert p == placement_probability(spec, Placement(t, tuple(perm)))
    assert 0.0 <= placement_probability(spec, Placement(1, tuple(nodes[:2]))) <= 1.0


@settings(max_examples=50, deadline=None)
@given(st.integers(4, 30), st.floats(0.01, 10), st.floats(0, 2))
def test_block_with_equal_coefficients_equals_uniform(n, coef, h):
    block = SugmSpec(n, ((clique(3), BlockRule((0.7, 0.3), coef, coef, h)),))
    uni = SugmSpec(n, ((clique(3), UniformRule(coef, h)),))
    for nodes in enumerate_placements(block, 0)[:50]:
        assert placement_probability(block, Placement(0, tuple(nodes))) == \
            placement_probability(uni, Placement(0, tuple(nodes)))
