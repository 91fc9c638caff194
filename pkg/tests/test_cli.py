import json
from pathlib import Path

from netspread.cli import main

RULE = {
    "conditions": [
        {"role": "receiver", "field": "food_risk_knowledge", "op": ">=", "value": 6},
        {"role": "sender", "field": "risk_perception", "op": ">=", "value": 4},
    ]
}


def write_config(tmp_path, name="cfg.json", **overrides) -> Path:
    doc = {
        "graph": {"model": "small_world", "n": 200, "neighbors": [4], "rewire_prob": [0.1]},
        "initial_fraction": [0.1],
        "iterations": 3,
        "replicates": 2,
        "seed": 3,
        "stats_file": "builtin",
        "output_dir": str(tmp_path / "out"),
        "report_fields": ["gender"],
        "training": {
            "mode": "synthetic",
            "sample_size": 300,
            "rule": RULE,
            "params": {"kernel": "rbf", "sigma": 12.0, "C": 4.0, "weight": 8.0},
        },
    }
    doc.update(overrides)
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return path


class TestExitCodes:
    def test_simulate_success(self, tmp_path, capsys):
        config = write_config(tmp_path)
        assert main(["simulate", "--config", str(config)]) == 0
        assert "sweep.csv" in capsys.readouterr().out

    def test_config_error_exits_2(self, tmp_path, capsys):
        config = write_config(tmp_path, replicates=0)
        assert main(["simulate", "--config", str(config)]) == 2
        assert "config error" in capsys.readouterr().err

    def test_runtime_error_exits_1(self, tmp_path, capsys):
        config = write_config(tmp_path, stats_file=str(tmp_path / "missing.json"))
        # stats_file existence is validated lazily: a ConfigError -> 2
        code = main(["simulate", "--config", str(config)])
        assert code == 2

    def test_broken_stats_file_exits_1(self, tmp_path, capsys):
        bad = tmp_path / "stats.json"
        bad.write_text("{}")
        config = write_config(tmp_path, stats_file=str(bad))
        assert main(["simulate", "--config", str(config)]) == 1


class TestSimulate:
    def test_stub_model_flag(self, tmp_path):
        config = write_config(tmp_path)
        assert main(["simulate", "--config", str(config), "--stub-model", "always-negative"]) == 0
        sweep = (tmp_path / "out" / "sweep.csv").read_text().splitlines()
        header = sweep[0].split(",")
        row = dict(zip(header, sweep[1].split(",")))
        assert float(row["mu_h_mean"]) == 0.0
        assert float(row["xi_mean"]) == 0.0

    def test_out_override(self, tmp_path):
        config = write_config(tmp_path)
        assert main(
            ["simulate", "--config", str(config), "--stub-model", "always-positive",
             "--out", str(tmp_path / "elsewhere")]
        ) == 0
        assert (tmp_path / "elsewhere" / "sweep.csv").exists()

    def test_sweep_column_order(self, tmp_path):
        config = write_config(tmp_path)
        main(["simulate", "--config", str(config), "--stub-model", "always-positive"])
        header = (tmp_path / "out" / "sweep.csv").read_text().splitlines()[0]
        assert header.split(",")[:3] == ["rewire_prob", "neighbors", "initial_fraction"]
        assert header.split(",")[3:7] == ["mu_h_mean", "mu_h_std", "xi_mean", "xi_std"]


class TestTrain:
    def test_writes_model(self, tmp_path, capsys):
        config = write_config(tmp_path)
        assert main(["train", "--config", str(config)]) == 0
        model_path = tmp_path / "out" / "model.json"
        assert model_path.exists()
        doc = json.loads(model_path.read_text())
        assert doc["kernel"] == "rbf"

    def test_byte_identical_model_reruns(self, tmp_path):
        config = write_config(tmp_path)
        main(["train", "--config", str(config), "--out", str(tmp_path / "t1")])
        main(["train", "--config", str(config), "--out", str(tmp_path / "t2")])
        assert (tmp_path / "t1" / "model.json").read_bytes() == (
            tmp_path / "t2" / "model.json"
        ).read_bytes()


class TestReport:
    def test_writes_distribution_tables(self, tmp_path):
        config = write_config(tmp_path)
        assert main(["report", "--config", str(config)]) == 0
        lines = (tmp_path / "out" / "dist_gender.csv").read_text().splitlines()
        assert lines[0] == "wave,0,1"
        assert [l.split(",")[0] for l in lines[1:]] == [
            "All", "Egos", "Alters 1", "Alters 2", "Alters 3"
        ]
