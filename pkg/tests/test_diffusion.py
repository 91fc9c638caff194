import json

import numpy as np
import pytest

from netspread.classifier import ConstantModel
from netspread.diffusion import (
    DiffusionConfig,
    DiffusionError,
    compute_metrics,
    diffusion_step,
    read_log_csv,
    run_diffusion,
    seed_information,
    validate_log,
    write_log_csv,
    write_summary_json,
)
from netspread.graph import Graph
from netspread.population import VertexTable

from conftest import TINY_SCHEMA, make_graph, random_graph, random_record
from oracles import bfs_layers

# hand-encoded transmission-tree fixtures: the first has one original
# sender (0), two senders in total and three transmissions; the second a
# single sender with three transmissions
TREE_LOG = [(1, 0, 1), (2, 1, 2), (2, 1, 3)]
STAR_LOG = [(1, 0, 1), (1, 0, 2), (1, 0, 3)]


def table_for(graph: Graph, seed: int = 0) -> VertexTable:
    gen = np.random.default_rng(seed)
    return VertexTable.from_records(
        TINY_SCHEMA, [random_record(TINY_SCHEMA, gen) for _ in range(graph.n)]
    )


class RuleModel:
    """Transmits only toward receivers whose gender field is 1."""

    def predict_pairs(self, table, senders, receivers):
        gender = table.columns["gender"][np.asarray(receivers)]
        return np.where(gender == 1, 1, -1)


class TestConfig:
    def test_validation(self):
        with pytest.raises(DiffusionError):
            DiffusionConfig(0.0, 3)
        with pytest.raises(DiffusionError):
            DiffusionConfig(1.5, 3)
        with pytest.raises(DiffusionError):
            DiffusionConfig(0.1, 0)


class TestSeeding:
    def test_counts(self):
        g = Graph(10000)
        rng = np.random.default_rng(0)
        assert len(seed_information(g, 0.1, rng)) == 1000

    def test_full_seeding(self):
        g = Graph(25)
        assert seed_information(g, 1.0, np.random.default_rng(0)) == list(range(25))

    def test_minimum_one_seed(self):
        g = Graph(10)
        assert len(seed_information(g, 0.05, np.random.default_rng(0))) == 1

    def test_round_half_up(self):
        g = Graph(10)
        # 0.25 * 10 = 2.5 rounds up to 3
        assert len(seed_information(g, 0.25, np.random.default_rng(0))) == 3

    def test_deterministic_and_distinct(self):
        g = Graph(100)
        a = seed_information(g, 0.3, np.random.default_rng(9))
        b = seed_information(g, 0.3, np.random.default_rng(9))
        assert a == b
        assert len(set(a)) == 30


class TestDiffusionStep:
    def test_always_negative_no_spread(self, path3):
        table = table_for(path3)
        new, entries = diffusion_step(path3, table, {0}, ConstantModel(-1), 1)
        assert new == set() and entries == []

    def test_always_positive_is_one_bfs_layer(self):
        for seed in range(6):
            g = random_graph(30, 0.1, seed)
            table = table_for(g, seed)
            informed = {0, 5, 11}
            new, entries = diffusion_step(g, table, informed, ConstantModel(1), 1)
            expected = {v for u in informed for v in g.neighbors(u)} - informed
            assert new == expected
            assert {r for _, _, r in entries} == expected

    def test_both_endpoints_informed_edge_skipped(self, triangle):
        table = table_for(triangle)
        new, entries = diffusion_step(triangle, table, {0, 1, 2}, ConstantModel(1), 1)
        assert new == set() and entries == []

    def test_attribution_smallest_positive_sender(self):
        g = make_graph(4, [(0, 3), (2, 3), (1, 3)])
        table = table_for(g)
        _, entries = diffusion_step(g, table, {0, 1, 2}, ConstantModel(1), 1)
        assert entries == [(1, 0, 3)]

    def test_prediction_direction_is_sender_to_receiver(self):
        g = make_graph(2, [(0, 1)])
        records = [
            {"gender": 0, "age_band": 1, "education": 1, "profession": 0,
             "contact_friends": 0, "contact_family": 0},
            {"gender": 1, "age_band": 1, "education": 1, "profession": 0,
             "contact_friends": 0, "contact_family": 0},
        ]
        table = VertexTable.from_records(TINY_SCHEMA, records)
        model = RuleModel()
        # informed 0 -> receiver 1 has gender 1: transmitted
        new, _ = diffusion_step(g, table, {0}, model, 1)
        assert new == {1}
        # informed 1 -> receiver 0 has gender 0: not transmitted
        new, _ = diffusion_step(g, table, {1}, model, 1)
        assert new == set()


class TestComputeMetrics:
    def test_transmission_tree_fixture(self):
        avg_hops, fanout = compute_metrics(TREE_LOG, [0])
        assert avg_hops == 3.0
        assert fanout == 1.5

    def test_single_sender_fixture(self):
        avg_hops, fanout = compute_metrics(STAR_LOG, [0])
        assert avg_hops == 3.0
        assert fanout == 3.0

    def test_empty_log(self):
        assert compute_metrics([], [0, 1]) == (0.0, 0.0)

    def test_silent_seeds_not_original_senders(self):
        # seeds 0 and 7; only 0 transmitted
        avg_hops, fanout = compute_metrics(TREE_LOG, [0, 7])
        assert avg_hops == 3.0


class TestRunDiffusion:
    def test_wave_equals_bfs_layers_with_positive_stub(self):
        config = DiffusionConfig(0.1, 3)
        for seed in range(10):
            g = random_graph(40, 0.08, seed)
            table = table_for(g, seed)
            rng = np.random.default_rng(seed)
            result = run_diffusion(g, table, ConstantModel(1), config, rng)
            layers = bfs_layers(g, result.seeds)
            expected = {v: d for v, d in layers.items() if d <= 3}
            assert result.wave == expected

    def test_always_negative_constant_coverage(self, star5):
        table = table_for(star5)
        result = run_diffusion(
            star5, table, ConstantModel(-1), DiffusionConfig(0.4, 3),
            np.random.default_rng(2),
        )
        assert result.coverage == (0.4, 0.4, 0.4, 0.4)
        assert result.avg_hops == 0.0 and result.fanout == 0.0
        assert result.log == ()

    def test_coverage_bookkeeping_identity(self):
        for seed in range(5):
            g = random_graph(35, 0.1, seed)
            table = table_for(g, seed)
            result = run_diffusion(
                g, table, RuleModel(), DiffusionConfig(0.2, 3), np.random.default_rng(seed)
            )
            for it in range(len(result.coverage)):
                informed = len(result.seeds) + sum(
                    1 for rec in result.log if rec[0] <= it
                )
                assert result.coverage[it] * g.n == pytest.approx(informed)

    def test_monotone_coverage_and_log_integrity(self):
        for seed in range(5):
            g = random_graph(35, 0.1, seed)
            table = table_for(g, seed)
            result = run_diffusion(
                g, table, RuleModel(), DiffusionConfig(0.2, 4), np.random.default_rng(seed)
            )
            assert all(
                a <= b for a, b in zip(result.coverage, result.coverage[1:])
            )
            validate_log(result.log, result.seeds, result.wave)

    def test_determinism(self):
        g = random_graph(40, 0.1, 3)
        table = table_for(g, 3)
        runs = [
            run_diffusion(
                g, table, RuleModel(), DiffusionConfig(0.2, 3), np.random.default_rng(77)
            )
            for _ in range(2)
        ]
        assert runs[0] == runs[1]

    def test_table_size_mismatch(self, star5):
        table = table_for(Graph(3))
        with pytest.raises(DiffusionError):
            run_diffusion(
                star5, table, ConstantModel(1), DiffusionConfig(0.5, 1),
                np.random.default_rng(0),
            )


class TestSerialization:
    def test_log_csv_round_trip(self, tmp_path):
        path = tmp_path / "log.csv"
        write_log_csv(TREE_LOG, path)
        assert read_log_csv(path) == TREE_LOG
        assert path.read_text().splitlines()[0] == "iteration,sender,receiver"

    def test_summary_json(self, tmp_path):
        g = random_graph(30, 0.15, 1)
        table = table_for(g, 1)
        result = run_diffusion(
            g, table, ConstantModel(1), DiffusionConfig(0.1, 2), np.random.default_rng(5)
        )
        path = tmp_path / "summary.json"
        write_summary_json(result, g.n, path)
        doc = json.loads(path.read_text())
        assert set(doc) == {"a", "m", "nu", "mu_h", "xi", "seeds"}
        assert doc["m"] == 2
        assert doc["nu"] == list(result.coverage)
        assert doc["seeds"] == list(result.seeds)
