from pathlib import Path

import pytest

from plumb.graph import GeneratorParams, generate_candidates, read_graph

FIXTURES = Path(__file__).parent / "fixtures"
GOLDEN = Path(__file__).parent / "golden"

FIXTURE_NAMES = ["single_m1", "single_m2", "single_m3", "single_m4", "a3_chain", "e8", "sigma237_star"]


@pytest.fixture
def fixture_graph():
    def load(name):
        return read_graph(FIXTURES / f"{name}.plumb")

    return load


def rational_corpus(count, max_vertices=6, weight_min=-6, seed=0):
    return list(generate_candidates(GeneratorParams(max_vertices, weight_min, seed, count, True)))
