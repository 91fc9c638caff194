import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from netspread.graph import Graph
from netspread.population import Field, FeatureSchema


def make_graph(n, edges) -> Graph:
    g = Graph(n)
    for u, v in edges:
        g.add_edge(u, v)
    return g


@pytest.fixture
def triangle():
    return make_graph(3, [(0, 1), (1, 2), (0, 2)])


@pytest.fixture
def path3():
    return make_graph(3, [(0, 1), (1, 2)])


@pytest.fixture
def star5():
    return make_graph(5, [(0, i) for i in range(1, 5)])


@pytest.fixture
def two_k4s():
    edges = [(u, v) for u in range(4) for v in range(u + 1, 4)]
    edges += [(u + 4, v + 4) for u, v in edges]
    return make_graph(8, edges)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_graph(n: int, edge_prob: float, seed: int) -> Graph:
    gen = np.random.default_rng(seed)
    g = Graph(n)
    for u in range(n):
        for v in range(u + 1, n):
            if gen.random() < edge_prob:
                g.add_edge(u, v)
    return g


TINY_SCHEMA = FeatureSchema(
    (
        Field("gender", "binary", label="Gender"),
        Field("age_band", "ordinal", label="Age band", value_range=(1, 5)),
        Field("education", "ordinal", label="Education", value_range=(1, 4)),
        Field("profession", "categorical", categories=("a", "b", "c")),
        Field("contact_friends", "ordinal", value_range=(0, 6)),
        Field("contact_family", "ordinal", value_range=(0, 6)),
    )
)


@pytest.fixture
def tiny_schema():
    return TINY_SCHEMA


def random_record(schema: FeatureSchema, gen: np.random.Generator) -> dict:
    record = {}
    for f in schema.fields:
        if f.kind == "categorical":
            record[f.id] = int(gen.integers(len(f.categories)))
        elif f.kind == "binary":
            record[f.id] = int(gen.integers(2))
        else:
            lo, hi = f.value_range
            record[f.id] = int(gen.integers(lo, hi + 1))
    return record
