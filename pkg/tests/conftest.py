import numpy as np
import pytest

from sugm.model import SugmSpec, TableRule, UniformRule, clique, link


def link_triangle_spec(p_link=0.5, p_tri=0.5):
    """n=3: every link and the single triangle, each with its own probability."""
    return SugmSpec(3, ((link(), UniformRule(p_link, 0.0)), (clique(3), UniformRule(p_tri, 0.0))))


def tiny_specs():
    """Five small specs with at most 12 placements each."""
    return [
        link_triangle_spec(0.5, 0.5),
        link_triangle_spec(0.9, 0.3),
        SugmSpec(4, ((link(), UniformRule(0.2, 0.0)), (clique(3), UniformRule(0.35, 0.0)))),
        SugmSpec(5, ((link(), TableRule({(0, 1): 0.7, (1, 2): 0.4, (3, 4): 0.95, (0, 4): 0.1})),
                     (clique(3), TableRule({(0, 1, 2): 0.6, (1, 2, 3): 0.25, (2, 3, 4): 0.5})))),
        SugmSpec(4, ((clique(3), UniformRule(0.6, 0.0)), (clique(4), UniformRule(0.45, 0.0)),
                     (link(), TableRule({(0, 3): 0.8})))),
    ]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_symmetric(rng, n, scale=1.0):
    a = rng.standard_normal((n, n)) * scale
    return (a + a.T) / 2


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "VERDICTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda l: int(l.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
