"""Synchronous information diffusion over a graph of synthetic people.

A random seed set starts informed.  Each iteration scans every edge with
exactly one informed endpoint (as of the start of the iteration), asks the
transmission model for a prediction from the informed side to the
uninformed side, and marks receivers with at least one positive incident
prediction.  Exactly one transmission is logged per new receiver,
attributed to its smallest-id positive-predicting informed neighbor, so
the log forms a forest of transmission trees.

Metrics over the log:
  * avg_hops: transmissions divided by the number of seed vertices that
    sent at least one logged transmission ("original senders");
  * fanout: distinct receivers divided by distinct senders.
Both are zero when their denominator is zero.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np

from .graph import Graph
from .population import VertexTable

LogEntry = tuple[int, int, int]  # (iteration, sender, receiver)


class DiffusionError(ValueError):
    pass


@dataclass(frozen=True)
class DiffusionConfig:
    """initial_fraction of vertices seeded, iterations of synchronous spread."""

    initial_fraction: float
    iterations: int

    def __post_init__(self):
        if not 0.0 < self.initial_fraction <= 1.0:
            raise DiffusionError("initial_fraction must lie in (0, 1]")
        if self.iterations < 1:
            raise DiffusionError("iterations must be >= 1")


@dataclass(frozen=True)
class DiffusionResult:
    seeds: tuple[int, ...]
    coverage: tuple[float, ...]  # informed proportion after iteration 0..m
    avg_hops: float
    fanout: float
    log: tuple[LogEntry, ...]
    wave: dict[int, int]  # informed vertex -> iteration it was informed (seeds: 0)

    @property
    def iterations(self) -> int:
        return len(self.coverage) - 1

    def new_by_iteration(self) -> list[int]:
        """Count of newly informed vertices per iteration 1..m."""
        counts = [0] * self.iterations
        for it, _, _ in self.log:
            counts[it - 1] += 1
        return counts

    def to_summary(self, n: int) -> dict:
        return {
            "a": len(self.seeds) / n,
            "m": self.iterations,
            "nu": list(self.coverage),
            "mu_h": self.avg_hops,
            "xi": self.fanout,
            "seeds": list(self.seeds),
        }


def seed_information(graph: Graph, fraction: float, rng: np.random.Generator) -> list[int]:
    """Uniformly draw max(1, round(fraction * n)) seed vertices, sorted."""
    if not 0.0 < fraction <= 1.0:
        raise DiffusionError("fraction must lie in (0, 1]")
    if graph.n == 0:
        raise DiffusionError("graph has no vertices")
    count = max(1, int(math.floor(fraction * graph.n + 0.5)))
    count = min(count, graph.n)
    chosen = rng.choice(graph.n, size=count, replace=False)
    return sorted(int(v) for v in chosen)


def diffusion_step(
    graph: Graph,
    table: VertexTable,
    informed: set[int],
    model,
    iteration: int,
) -> tuple[set[int], list[LogEntry]]:
    """One synchronous step: predictions use `informed` frozen at entry.

    Returns the set of vertices informed during this step and their log
    entries (sorted by receiver id).  Edges with both endpoints informed
    are skipped; vertices informed within the step do not transmit.
    """
    senders: list[int] = []
    receivers: list[int] = []
    for u in sorted(informed):
        for v in graph.neighbors(u):
            if v not in informed:
                senders.append(u)
                receivers.append(v)
    if not senders:
        return set(), []
    preds = model.predict_pairs(table, senders, receivers)
    attributed: dict[int, int] = {}
    for s, r, p in zip(senders, receivers, preds):
        if p > 0 and (r not in attributed or s < attributed[r]):
            attributed[r] = s
    entries = [(iteration, attributed[r], r) for r in sorted(attributed)]
    return set(attributed), entries


def compute_metrics(log, seeds) -> tuple[float, float]:
    """(avg_hops, fanout) from a transmission log; zero on empty denominators."""
    log = list(log)
    if not log:
        return 0.0, 0.0
    senders = {s for _, s, _ in log}
    receivers = {r for _, _, r in log}
    originals = senders & set(seeds)
    avg_hops = len(log) / len(originals) if originals else 0.0
    fanout = len(receivers) / len(senders) if senders else 0.0
    return avg_hops, fanout


def run_diffusion(
    graph: Graph,
    table: VertexTable,
    model,
    config: DiffusionConfig,
    rng: np.random.Generator,
) -> DiffusionResult:
    if len(table) != graph.n:
        raise DiffusionError(
            f"vertex table has {len(table)} rows for a graph of {graph.n} vertices"
        )
    seeds = seed_information(graph, config.initial_fraction, rng)
    informed = set(seeds)
    wave = {v: 0 for v in seeds}
    coverage = [len(informed) / graph.n]
    log: list[LogEntry] = []
    for iteration in range(1, config.iterations + 1):
        new_informed, entries = diffusion_step(graph, table, informed, model, iteration)
        informed |= new_informed
        for v in new_informed:
            wave[v] = iteration
        log.extend(entries)
        coverage.append(len(informed) / graph.n)
    avg_hops, fanout = compute_metrics(log, seeds)
    return DiffusionResult(
        seeds=tuple(seeds),
        coverage=tuple(coverage),
        avg_hops=avg_hops,
        fanout=fanout,
        log=tuple(log),
        wave=wave,
    )


def write_log_csv(log, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "sender", "receiver"])
        for iteration, sender, receiver in log:
            writer.writerow([iteration, sender, receiver])


def read_log_csv(path) -> list[LogEntry]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["iteration", "sender", "receiver"]:
            raise DiffusionError(f"unexpected log header in {path}")
        return [(int(i), int(s), int(r)) for i, s, r in reader]


def write_summary_json(result: DiffusionResult, n: int, path, extra: dict | None = None) -> None:
    doc = result.to_summary(n)
    if extra:
        doc.update(extra)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")


def validate_log(log, seeds, wave: dict[int, int]) -> None:
    """Check log integrity: unique receivers, senders informed strictly earlier."""
    seeds = set(seeds)
    seen: set[int] = set()
    for iteration, sender, receiver in log:
        if receiver in seen:
            raise DiffusionError(f"receiver {receiver} logged twice")
        seen.add(receiver)
        if receiver in seeds:
            raise DiffusionError(f"seed {receiver} logged as receiver")
        if sender not in wave or wave[sender] >= iteration:
            raise DiffusionError(f"sender {sender} not informed before iteration {iteration}")
        if wave.get(receiver) != iteration:
            raise DiffusionError(f"receiver {receiver} wave mismatch")
