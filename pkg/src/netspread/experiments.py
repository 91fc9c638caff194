"""Seeded experiment runner: parameter sweeps, training pipeline, reports.

A single JSON config drives everything.  Replicate randomness is derived
from the master seed through numpy SeedSequence spawn keys, one stream per
(grid point, replicate) plus a dedicated training stream, so reruns with
the same config are byte-identical and no two replicates share a stream.

Config layout (defaults in parentheses)::

    {
      "graph": {"model": "small_world", "n": 10000,
                "neighbors": [10, 15], "rewire_prob": [0.01, 0.05, 0.1, 0.2]},
      # or      {"model": "erdos_renyi", "n": 10000,
      #          "edge_prob": [0.001, 0.002, 0.003, 0.004]},
      "initial_fraction": [0.1, 0.2, 0.5],
      "iterations": 3,               # (3)
      "replicates": 5,               # (5)
      "seed": 7,
      "stats_file": "builtin",       # path to a population-stats JSON
      "output_dir": "out",
      "report_fields": ["gender"],   # for the `report` command
      "training": {
        "mode": "synthetic",         # or "pairs" / "survey"
        "sample_size": 20000,        # (20000)
        "rule": {"conditions": [
            {"role": "receiver", "field": "food_risk_knowledge", "op": ">=", "value": 6},
            {"role": "sender", "field": "risk_perception", "op": ">=", "value": 4}]},
        "params": {"kernel": "rbf", "sigma": 1.0, "C": 2048.0, "weight": 32.0},
        "grid": [ ...same shape as params... ],   # optional CV grid
        "cv_folds": 3,               # (3)
        "per_replicate": false,      # retrain per replicate instead of once
        "pairs_file": "pairs.csv",   # mode "pairs"
        "egos_file": "...", "alters_file": "...", "alter_pool_file": "...",
        "criteria": [...], "contact_fields": [...], "homophily": 0.7  # mode "survey"
      }
    }
"""

from __future__ import annotations

import csv
import json
import logging
import os
from dataclasses import dataclass
from importlib import resources

import numpy as np

from . import analysis, completion
from .classifier import (
    ConstantModel,
    KernelSpec,
    SvmModel,
    SvmParams,
    cross_validate,
    fit_pair_classifier,
)
from .diffusion import (
    DiffusionConfig,
    DiffusionResult,
    run_diffusion,
    write_log_csv,
    write_summary_json,
)
from .graph import ERDOS_RENYI, SMALL_WORLD, GraphParams, generate_graph
from .population import (
    FeatureSchema,
    PopulationStats,
    VertexTable,
    sample_population,
)

logger = logging.getLogger(__name__)

BUILTIN_STATS = "builtin"

_RULE_OPS = {
    ">=": lambda a, b: a >= b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    "<": lambda a, b: a < b,
    "==": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
}


class ConfigError(ValueError):
    """Invalid configuration; carries the offending field path."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


def _require(doc: dict, key: str, where: str):
    if key not in doc:
        raise ConfigError(f"{where}.{key}" if where else key, "missing")
    return doc[key]


def _as_list(value, path: str) -> list:
    if not isinstance(value, list) or not value:
        raise ConfigError(path, "must be a non-empty list")
    return value


@dataclass(frozen=True)
class PlantedRule:
    """Conjunction of threshold conditions on sender/receiver record fields.

    Labels a pair +1 when every condition holds, else -1.  Used to plant a
    learnable transmission pattern in synthetic training data.
    """

    conditions: tuple[tuple[str, str, str, float], ...]  # (role, field, op, value)

    @classmethod
    def from_config(cls, doc: dict, path: str) -> "PlantedRule":
        conds = _as_list(_require(doc, "conditions", path), f"{path}.conditions")
        out = []
        for i, c in enumerate(conds):
            where = f"{path}.conditions[{i}]"
            role = _require(c, "role", where)
            if role not in ("sender", "receiver"):
                raise ConfigError(f"{where}.role", "must be 'sender' or 'receiver'")
            op = _require(c, "op", where)
            if op not in _RULE_OPS:
                raise ConfigError(f"{where}.op", f"must be one of {sorted(_RULE_OPS)}")
            out.append((role, str(_require(c, "field", where)), op, float(_require(c, "value", where))))
        return cls(conditions=tuple(out))

    def label_arrays(self, senders: VertexTable, receivers: VertexTable) -> np.ndarray:
        ok = np.ones(len(senders), dtype=bool)
        for role, fid, op, value in self.conditions:
            table = senders if role == "sender" else receivers
            ok &= _RULE_OPS[op](table.columns[fid], value)
        return np.where(ok, 1, -1)

    def label_pair(self, sender: dict, receiver: dict) -> int:
        for role, fid, op, value in self.conditions:
            rec = sender if role == "sender" else receiver
            if not _RULE_OPS[op](rec[fid], value):
                return -1
        return 1


def _parse_svm_params(doc: dict, path: str) -> SvmParams:
    kind = _require(doc, "kernel", path)
    sigma = doc.get("sigma")
    try:
        kernel = KernelSpec(kind, float(sigma) if sigma is not None else None)
        return SvmParams(
            C=float(_require(doc, "C", path)),
            weight=float(_require(doc, "weight", path)),
            kernel=kernel,
        )
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from None


@dataclass(frozen=True)
class TrainingConfig:
    mode: str
    sample_size: int
    params: SvmParams | None
    grid: tuple[SvmParams, ...]
    cv_folds: int
    per_replicate: bool
    rule: PlantedRule | None
    pairs_file: str | None
    egos_file: str | None
    alters_file: str | None
    alter_pool_file: str | None
    criteria: tuple[str, ...]
    contact_fields: tuple[str, ...]
    homophily: float
    max_kernel_evals: int | None = None

    @classmethod
    def from_config(cls, doc: dict, path: str = "training") -> "TrainingConfig":
        mode = doc.get("mode", "synthetic")
        if mode not in ("synthetic", "pairs", "survey"):
            raise ConfigError(f"{path}.mode", "must be synthetic, pairs or survey")
        sample_size = int(doc.get("sample_size", 20000))
        if sample_size < 2:
            raise ConfigError(f"{path}.sample_size", "must be >= 2")
        params = _parse_svm_params(doc["params"], f"{path}.params") if "params" in doc else None
        grid = tuple(
            _parse_svm_params(g, f"{path}.grid[{i}]")
            for i, g in enumerate(doc.get("grid", []))
        )
        if params is None and not grid:
            raise ConfigError(f"{path}.params", "need params or a grid")
        rule = None
        if mode == "synthetic":
            rule = PlantedRule.from_config(_require(doc, "rule", path), f"{path}.rule")
        if mode == "pairs" and "pairs_file" not in doc:
            raise ConfigError(f"{path}.pairs_file", "missing")
        if mode == "survey":
            for key in ("egos_file", "alter_pool_file", "criteria", "contact_fields"):
                if key not in doc:
                    raise ConfigError(f"{path}.{key}", "missing")
        cv_folds = int(doc.get("cv_folds", 3))
        if cv_folds < 2:
            raise ConfigError(f"{path}.cv_folds", "must be >= 2")
        return cls(
            mode=mode,
            sample_size=sample_size,
            params=params,
            grid=grid,
            cv_folds=cv_folds,
            per_replicate=bool(doc.get("per_replicate", False)),
            rule=rule,
            pairs_file=doc.get("pairs_file"),
            egos_file=doc.get("egos_file"),
            alters_file=doc.get("alters_file"),
            alter_pool_file=doc.get("alter_pool_file"),
            criteria=tuple(doc.get("criteria", ())),
            contact_fields=tuple(doc.get("contact_fields", ())),
            homophily=float(doc.get("homophily", 0.7)),
            max_kernel_evals=(
                int(doc["max_kernel_evals"]) if "max_kernel_evals" in doc else None
            ),
        )


@dataclass(frozen=True)
class ExperimentConfig:
    graph_model: str
    n: int
    edge_probs: tuple[float, ...]
    neighbor_counts: tuple[int, ...]
    rewire_probs: tuple[float, ...]
    initial_fractions: tuple[float, ...]
    iterations: int
    replicates: int
    seed: int
    stats_file: str
    output_dir: str
    training: TrainingConfig | None
    report_fields: tuple[str, ...] = ()

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        graph = _require(doc, "graph", "")
        model = _require(graph, "model", "graph")
        if model not in (ERDOS_RENYI, SMALL_WORLD):
            raise ConfigError("graph.model", f"unknown model {model!r}")
        n = int(graph.get("n", 10000))
        if n < 1:
            raise ConfigError("graph.n", "must be >= 1")
        edge_probs: tuple[float, ...] = ()
        neighbor_counts: tuple[int, ...] = ()
        rewire_probs: tuple[float, ...] = ()
        if model == ERDOS_RENYI:
            edge_probs = tuple(
                float(p) for p in _as_list(_require(graph, "edge_prob", "graph"), "graph.edge_prob")
            )
        else:
            neighbor_counts = tuple(
                int(k) for k in _as_list(_require(graph, "neighbors", "graph"), "graph.neighbors")
            )
            rewire_probs = tuple(
                float(p)
                for p in _as_list(_require(graph, "rewire_prob", "graph"), "graph.rewire_prob")
            )
        fractions = tuple(
            float(a)
            for a in _as_list(doc.get("initial_fraction", [0.1, 0.2, 0.5]), "initial_fraction")
        )
        iterations = int(doc.get("iterations", 3))
        if iterations < 1:
            raise ConfigError("iterations", "must be >= 1")
        replicates = int(doc.get("replicates", 5))
        if replicates < 1:
            raise ConfigError("replicates", "must be >= 1")
        training = (
            TrainingConfig.from_config(doc["training"]) if "training" in doc else None
        )
        try:
            params_check = [
                GraphParams(model, n, edge_prob=p) for p in edge_probs
            ] + [
                GraphParams(model, n, neighbors=k, rewire_prob=p)
                for k in neighbor_counts
                for p in rewire_probs
            ]
        except ValueError as exc:
            raise ConfigError("graph", str(exc)) from None
        del params_check
        return cls(
            graph_model=model,
            n=n,
            edge_probs=edge_probs,
            neighbor_counts=neighbor_counts,
            rewire_probs=rewire_probs,
            initial_fractions=fractions,
            iterations=iterations,
            replicates=replicates,
            seed=int(doc.get("seed", 0)),
            stats_file=str(doc.get("stats_file", BUILTIN_STATS)),
            output_dir=str(doc.get("output_dir", "out")),
            training=training,
            report_fields=tuple(doc.get("report_fields", ())),
        )

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError("<file>", f"not valid JSON: {exc}") from None
        return cls.from_dict(doc)

    def grid(self) -> list[dict]:
        """Grid points in sweep-table row order."""
        points = []
        if self.graph_model == ERDOS_RENYI:
            for p in self.edge_probs:
                for a in self.initial_fractions:
                    points.append(
                        {
                            "params": GraphParams(ERDOS_RENYI, self.n, edge_prob=p),
                            "initial_fraction": a,
                            "columns": {"edge_prob": p, "initial_fraction": a},
                            "tag": f"pe{p:g}_a{a:g}",
                        }
                    )
        else:
            for p in self.rewire_probs:
                for k in self.neighbor_counts:
                    for a in self.initial_fractions:
                        points.append(
                            {
                                "params": GraphParams(
                                    SMALL_WORLD, self.n, neighbors=k, rewire_prob=p
                                ),
                                "initial_fraction": a,
                                "columns": {
                                    "rewire_prob": p,
                                    "neighbors": k,
                                    "initial_fraction": a,
                                },
                                "tag": f"ps{p:g}_k{k}_a{a:g}",
                            }
                        )
        return points


def stream(master_seed: int, *key: int) -> np.random.Generator:
    """Independent generator for a spawn key; replicates never share one."""
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(entropy=master_seed, spawn_key=key))
    )


def load_stats(stats_file: str) -> PopulationStats:
    if stats_file == BUILTIN_STATS:
        ref = resources.files("netspread.data").joinpath("fixture_stats.json")
        with resources.as_file(ref) as path:
            return PopulationStats.from_json(path)
    if not os.path.exists(stats_file):
        raise ConfigError("stats_file", f"no such file: {stats_file}")
    return PopulationStats.from_json(stats_file)


def synthetic_pairs(
    stats: PopulationStats, size: int, rule: PlantedRule, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Random (sender, receiver) record pairs labeled by the planted rule."""
    senders = sample_population(stats, size, rng)
    receivers = sample_population(stats, size, rng)
    X = np.hstack([senders.encoded(), receivers.encoded()])
    y = rule.label_arrays(senders, receivers)
    return X, y


def _survey_pairs(tc: TrainingConfig, schema: FeatureSchema, rng) -> tuple[np.ndarray, np.ndarray]:
    egos_table = VertexTable.from_csv(tc.egos_file, schema)
    egos = list(egos_table.rows())
    pool_table = VertexTable.from_csv(tc.alter_pool_file, schema)
    pool = list(pool_table.rows())
    listed: list[list[dict]] = [[] for _ in egos]
    if tc.alters_file:
        with open(tc.alters_file, encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            for row in reader:
                ego_index = int(row.pop("ego"))
                partial = {k: int(v) for k, v in row.items() if v != ""}
                listed[ego_index].append(partial)
    pairs = completion.build_training_set(
        egos,
        listed,
        pool,
        criteria=tc.criteria,
        contact_fields=tc.contact_fields,
        h=tc.homophily,
        rng=rng,
        schema=schema,
    )
    return completion.pairs_to_arrays(pairs, schema)


def training_budget(n_examples: int) -> int:
    """Kernel-evaluation cap scaled so pipeline-sized fits can converge.

    The solver's flat default caps a 20k-example fit after a few hundred
    gradient steps; 5 n^2 evaluations allow roughly 2.5 n row computations,
    which is comfortably past convergence for the planted-rule tasks.
    """
    from .classifier import MAX_KERNEL_EVALS

    return max(MAX_KERNEL_EVALS, 5 * n_examples * n_examples)


def train_pipeline(
    config: ExperimentConfig,
    stats: PopulationStats | None = None,
    stream_index: int = 0,
    model_path=None,
) -> SvmModel:
    """Build training pairs per the configured mode, select params, fit, save.

    A single-point grid degenerates to a direct fit.  The returned model
    carries the fold-independent standardizer and the schema.
    """
    tc = config.training
    if tc is None:
        raise ConfigError("training", "missing section")
    if stats is None:
        stats = load_stats(config.stats_file)
    rng = stream(config.seed, 1, stream_index)
    if tc.mode == "synthetic":
        X, y = synthetic_pairs(stats, tc.sample_size, tc.rule, rng)
    elif tc.mode == "pairs":
        pairs = completion.read_pairs_csv(tc.pairs_file, stats.schema)
        X, y = completion.pairs_to_arrays(pairs, stats.schema)
    else:
        X, y = _survey_pairs(tc, stats.schema, rng)
    if len(y) > tc.sample_size:
        picked = np.sort(rng.choice(len(y), size=tc.sample_size, replace=False))
        X, y = X[picked], y[picked]
    budget = tc.max_kernel_evals or training_budget(len(y))
    params = tc.params
    if tc.grid:
        if len(tc.grid) == 1:
            params = tc.grid[0]
        else:
            report = cross_validate(
                X, y, tc.grid, tc.cv_folds, rng, max_kernel_evals=budget
            )
            params = report.best
            logger.info("cross-validation selected %s", params)
    model = fit_pair_classifier(
        X, y, params, schema=stats.schema, max_kernel_evals=budget
    )
    model.training_size = len(y)
    if model_path is not None:
        model.save(model_path)
    return model


def sweep_columns(config: ExperimentConfig) -> list[str]:
    if config.graph_model == ERDOS_RENYI:
        cols = ["edge_prob", "initial_fraction"]
    else:
        cols = ["rewire_prob", "neighbors", "initial_fraction"]
    cols += ["mu_h_mean", "mu_h_std", "xi_mean", "xi_std"]
    for i in range(min(config.iterations, 3)):
        cols += [f"dnu_{i + 1}_mean", f"dnu_{i + 1}_std"]
    cols.append("replicates")
    return cols


def _sample_std(values: np.ndarray) -> float:
    if len(values) < 2:
        return 0.0
    return float(np.std(values, ddof=1))


@dataclass
class RunArtifacts:
    tag: str
    replicate: int
    result: DiffusionResult


@dataclass
class ExperimentOutput:
    rows: list[dict]
    runs: list[RunArtifacts]


def run_experiment(
    config: ExperimentConfig,
    stub_model: str | None = None,
    out_dir: str | None = None,
) -> ExperimentOutput:
    """Run the full sweep and write per-run plus aggregated artifacts.

    Returns the aggregated sweep rows (also written to sweep.csv in
    Table-style column order) plus the per-run results.  `stub_model`
    replaces the trained SVM with an always-positive/always-negative
    predictor for oracle testing.
    """
    out_dir = out_dir or config.output_dir
    os.makedirs(out_dir, exist_ok=True)
    runs_dir = os.path.join(out_dir, "runs")
    os.makedirs(runs_dir, exist_ok=True)
    stats = load_stats(config.stats_file)

    model = None
    models_by_rep: dict[int, SvmModel] = {}
    if stub_model is not None:
        if stub_model not in ("always-positive", "always-negative"):
            raise ConfigError("stub_model", f"unknown stub {stub_model!r}")
        model = ConstantModel(1 if stub_model == "always-positive" else -1)
    elif config.training is not None and not config.training.per_replicate:
        model = train_pipeline(
            config, stats=stats, model_path=os.path.join(out_dir, "model.json")
        )
    elif config.training is None:
        raise ConfigError("training", "missing section and no stub model requested")

    diff_config_cache: dict[float, DiffusionConfig] = {}
    rows = []
    all_results: list[RunArtifacts] = []
    for grid_index, point in enumerate(config.grid()):
        hops, fans, deltas = [], [], []
        for rep in range(config.replicates):
            rng = stream(config.seed, 0, grid_index * config.replicates + rep)
            rep_model = model
            if rep_model is None:
                if rep not in models_by_rep:
                    models_by_rep[rep] = train_pipeline(
                        config, stats=stats, stream_index=rep + 1
                    )
                rep_model = models_by_rep[rep]
            graph = generate_graph(point["params"], rng)
            table = sample_population(stats, config.n, rng)
            dconf = diff_config_cache.setdefault(
                point["initial_fraction"],
                DiffusionConfig(point["initial_fraction"], config.iterations),
            )
            result = run_diffusion(graph, table, rep_model, dconf, rng)
            run_dir = os.path.join(runs_dir, f"{point['tag']}_r{rep}")
            os.makedirs(run_dir, exist_ok=True)
            write_log_csv(result.log, os.path.join(run_dir, "log.csv"))
            write_summary_json(
                result,
                config.n,
                os.path.join(run_dir, "summary.json"),
                extra={"tag": point["tag"], "replicate": rep},
            )
            hops.append(result.avg_hops)
            fans.append(result.fanout)
            deltas.append(np.diff(result.coverage))
            all_results.append(RunArtifacts(point["tag"], rep, result))
        deltas_arr = np.array(deltas)
        row = dict(point["columns"])
        row["mu_h_mean"] = float(np.mean(hops))
        row["mu_h_std"] = _sample_std(np.array(hops))
        row["xi_mean"] = float(np.mean(fans))
        row["xi_std"] = _sample_std(np.array(fans))
        for i in range(min(config.iterations, 3)):
            row[f"dnu_{i + 1}_mean"] = float(np.mean(deltas_arr[:, i]))
            row[f"dnu_{i + 1}_std"] = _sample_std(deltas_arr[:, i])
        row["replicates"] = config.replicates
        rows.append(row)
    _write_sweep_csv(rows, sweep_columns(config), os.path.join(out_dir, "sweep.csv"))
    return ExperimentOutput(rows=rows, runs=all_results)


def _write_sweep_csv(rows, columns, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([repr(row[c]) if isinstance(row[c], float) else row[c] for c in columns])


def report_distributions(
    config: ExperimentConfig, out_dir: str | None = None
) -> dict[str, np.ndarray]:
    """Per-field wave-distribution CSVs averaged over replicate runs.

    Each CSV mirrors the sweep's first grid point: rows All, Egos and one
    per iteration wave; proportions are means over replicates (waves empty
    in a replicate are excluded from its average; rows empty in every
    replicate keep the empty placeholder).
    """
    if not config.report_fields:
        raise ConfigError("report_fields", "must name at least one field")
    if config.replicates < 1:
        raise ConfigError("replicates", "must be >= 1")
    out_dir = out_dir or config.output_dir
    os.makedirs(out_dir, exist_ok=True)
    stats = load_stats(config.stats_file)
    for fid in config.report_fields:
        stats.schema.field(fid)  # raises UnknownFieldError early
    if config.training is None:
        raise ConfigError("training", "missing section")
    model = train_pipeline(config, stats=stats)
    point = config.grid()[0]
    per_field: dict[str, list] = {fid: [] for fid in config.report_fields}
    for rep in range(config.replicates):
        rng = stream(config.seed, 0, rep)
        graph = generate_graph(point["params"], rng)
        table = sample_population(stats, config.n, rng)
        result = run_diffusion(
            graph,
            table,
            model,
            DiffusionConfig(point["initial_fraction"], config.iterations),
            rng,
        )
        for fid in config.report_fields:
            per_field[fid].append(analysis.wave_distribution(result, table, fid))
    averaged: dict[str, np.ndarray] = {}
    for fid, dists in per_field.items():
        first = dists[0]
        rows = np.full_like(first.proportions, analysis.EMPTY_ROW)
        for i in range(len(first.row_labels)):
            stack = [d.proportions[i] for d in dists if not d.empty_rows[i]]
            if stack:
                rows[i] = np.mean(stack, axis=0)
        averaged[fid] = rows
        avg = analysis.WaveDistribution(
            field_id=fid,
            categories=first.categories,
            row_labels=first.row_labels,
            proportions=rows,
            empty_rows=tuple(bool(np.all(r == analysis.EMPTY_ROW)) for r in rows),
        )
        avg.to_csv(os.path.join(out_dir, f"dist_{fid}.csv"))
    return averaged
