"""Command-line workflows: design, run, analyze, train-best, predict."""

import json

import numpy as np
import pytest

from oatune.analysis import REFERENCE_RESPONSES, reference_responses_path, save_responses
from oatune.cli import main
from oatune.design import TABLE_L27
from oatune.network import load_model
from oatune.pipeline import INPUT_COLUMNS

FAST_RUN = ["--max-epochs", "2", "--patience", "2", "--batch-size", "16"]


def run_cli(*argv):
    return main([str(a) for a in argv])


class TestDesign:
    def test_writes_published_design(self, tmp_path, capsys):
        out = tmp_path / "design.csv"
        assert run_cli("design", "--preset", "paper", "--out", out) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "run,HL,NN,ACT,OPT,LR"
        assert len(lines) == 28
        for lineno, expected in zip(lines[1:], TABLE_L27):
            cells = lineno.split(",")
            assert int(cells[1]) == expected[0]
            assert cells[3] == expected[2]
        assert "27 of 243 full-factorial cases" in capsys.readouterr().err

    def test_unknown_preset_exits_2(self, tmp_path, capsys):
        assert run_cli("design", "--preset", "latin", "--out-dir", tmp_path) == 2
        assert "latin" in capsys.readouterr().err

    def test_custom_factor_space(self, tmp_path):
        config = tmp_path / "factors.json"
        config.write_text(json.dumps([
            {"name": "X1", "levels": [1, 2, 3]},
            {"name": "X2", "levels": ["a", "b", "c"]},
        ]))
        out = tmp_path / "design.csv"
        assert run_cli("design", "--factors", config, "--out", out) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "run,X1,X2"
        assert len(lines) == 28


@pytest.fixture(scope="module")
def run_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("run")
    code = run_cli(
        "run", "--synthetic", 60, "--seed", 5, "--out-dir", out, *FAST_RUN
    )
    assert code == 0
    return out


class TestRun:
    def test_outputs_exist(self, run_dir):
        for name in ("responses.csv", "run_log.jsonl", "manifest.json"):
            assert (run_dir / name).exists()
        assert len(list((run_dir / "losses").glob("run_*.csv"))) == 27

    def test_responses_have_27_rows(self, run_dir):
        lines = (run_dir / "responses.csv").read_text().splitlines()
        assert lines[0] == "run,response"
        assert len(lines) == 28

    def test_run_log_records(self, run_dir):
        records = [json.loads(l) for l in (run_dir / "run_log.jsonl").read_text().splitlines()]
        assert len(records) == 27
        assert records[0]["run"] == 1
        assert records[12]["config"] == {"HL": 2, "NN": 20, "ACT": "selu",
                                         "OPT": "Adam", "LR": 0.001}

    def test_manifest_carries_settings(self, run_dir):
        manifest = json.loads((run_dir / "manifest.json").read_text())
        assert manifest["seed"] == 5
        assert manifest["settings"]["max_epochs"] == 2
        assert manifest["dataset"]["provenance"] == "synthetic(n=60, seed=5)"

    def test_rerun_reproduces_responses(self, run_dir, tmp_path):
        again = tmp_path / "again"
        assert run_cli(
            "run", "--synthetic", 60, "--seed", 5, "--out-dir", again, *FAST_RUN
        ) == 0
        assert (again / "responses.csv").read_bytes() == \
            (run_dir / "responses.csv").read_bytes()

    def test_workers_do_not_change_responses(self, run_dir, tmp_path):
        par = tmp_path / "par"
        assert run_cli(
            "run", "--synthetic", 60, "--seed", 5, "--out-dir", par,
            "--workers", 2, *FAST_RUN
        ) == 0
        assert (par / "responses.csv").read_bytes() == \
            (run_dir / "responses.csv").read_bytes()

    def test_missing_dataset_exits_2(self, tmp_path, capsys):
        assert run_cli("run", "--out-dir", tmp_path, *FAST_RUN) == 2
        assert "--data" in capsys.readouterr().err

    def test_unreadable_dataset_exits_2(self, tmp_path):
        assert run_cli(
            "run", "--data", tmp_path / "nope.csv", "--out-dir", tmp_path, *FAST_RUN
        ) == 2


class TestAnalyze:
    def test_reference_fixture_selects_published_optimum(self, tmp_path):
        out = tmp_path / "analysis"
        code = run_cli(
            "analyze", "--responses", reference_responses_path(), "--out-dir", out
        )
        assert code == 0
        optimum = json.loads((out / "optimum.json").read_text())
        assert optimum["factors"] == {
            "HL": 3, "NN": 20, "ACT": "elu", "OPT": "Adam", "LR": 0.001,
        }
        assert (out / "main_effects.csv").exists()
        assert (out / "main_effects.svg").exists()

    def test_constant_responses_select_first_levels(self, tmp_path):
        responses = tmp_path / "flat.csv"
        save_responses(np.full(27, 50.0), responses)
        out = tmp_path / "analysis"
        assert run_cli("analyze", "--responses", responses, "--out-dir", out,
                       "--no-plots") == 0
        optimum = json.loads((out / "optimum.json").read_text())
        assert optimum["factors"] == {
            "HL": 1, "NN": 10, "ACT": "relu", "OPT": "Adam", "LR": 0.001,
        }
        assert not (out / "main_effects.svg").exists()

    def test_short_responses_file_exits_2(self, tmp_path, capsys):
        responses = tmp_path / "short.csv"
        save_responses(np.asarray(REFERENCE_RESPONSES)[:26], responses)
        assert run_cli("analyze", "--responses", responses, "--out-dir", tmp_path) == 2
        err = capsys.readouterr().err
        assert "27" in err and "26" in err

    def test_sn_column(self, tmp_path):
        out = tmp_path / "analysis"
        assert run_cli(
            "analyze", "--responses", reference_responses_path(),
            "--out-dir", out, "--sn", "--no-plots",
        ) == 0
        header = (out / "main_effects.csv").read_text().splitlines()[0]
        assert header == "factor,level,mean_response,sn_db"


@pytest.fixture(scope="module")
def trained(tmp_path_factory):
    """A fast end-to-end chain: run is skipped, optimum comes from the fixture."""
    out = tmp_path_factory.mktemp("best")
    optimum = out / "optimum.json"
    optimum.write_text(json.dumps({
        "factors": {"HL": 1, "NN": 10, "ACT": "elu", "OPT": "Adam", "LR": 0.01},
    }))
    code = run_cli(
        "train-best", "--synthetic", 80, "--seed", 3, "--optimum", optimum,
        "--out-dir", out, "--max-epochs", 30, "--patience", 30,
        "--batch-size", 16,
    )
    assert code == 0
    return out


class TestTrainBest:
    def test_model_file_loads(self, trained):
        model, scaler = load_model(trained / "model.json")
        assert model.sizes == (12, 10, 21)
        assert model.activation == "elu"
        assert scaler.n_columns == 33

    def test_metric_reports_shape(self, trained):
        pooled = (trained / "metrics_pooled.csv").read_text().splitlines()
        assert pooled[0] == "split,r2,mae,mse,rmse"
        assert len(pooled) == 4  # header + train/val/test
        components = (trained / "metrics_components.csv").read_text().splitlines()
        assert len(components) == 1 + 21 * 3

    def test_figures_and_history(self, trained):
        assert (trained / "loss_convergence.svg").exists()
        assert (trained / "scatter_test.svg").exists()
        history = (trained / "loss_history.csv").read_text().splitlines()
        assert history[0] == "epoch,train_loss,val_loss"
        assert len(history) > 1

    def test_bad_optimum_file_exits_2(self, tmp_path):
        bad = tmp_path / "optimum.json"
        bad.write_text("{}")
        assert run_cli(
            "train-best", "--synthetic", 40, "--optimum", bad, "--out-dir", tmp_path,
        ) == 2


class TestPredict:
    def flax_inputs(self, path):
        # fiber length given instead of the aspect ratio; moduli in MPa
        header = [c if c != "lambda_f" else "l_f" for c in INPUT_COLUMNS]
        row = {
            "E_M": 1600.0, "nu_M": 0.4, "E_F": 69000.0, "nu_F": 0.15,
            "d_f": 16.0, "l_f": 1200.0, "phi": 0.13,
            "a11": 0.333, "a22": 0.333, "g1": 0.0, "g2": 0.0, "g3": 0.0,
        }
        path.write_text(",".join(header) + "\n" +
                        ",".join(str(row[h]) for h in header) + "\n")

    def test_predicts_with_fiber_length_conversion(self, trained, tmp_path):
        inputs = tmp_path / "inputs.csv"
        self.flax_inputs(inputs)
        out = tmp_path / "predictions.csv"
        assert run_cli(
            "predict", "--model", trained / "model.json",
            "--inputs", inputs, "--out", out,
        ) == 0
        lines = out.read_text().splitlines()
        header = lines[0].split(",")
        assert header[-3:] == ["E11", "E22", "E33"]
        values = dict(zip(header, lines[1].split(",")))
        assert float(values["lambda_f"]) == 75.0
        assert all(np.isfinite(float(values[q])) for q in ("Q11", "Q44", "Q66"))

    def test_wrong_column_count_exits_2(self, trained, tmp_path, capsys):
        inputs = tmp_path / "bad.csv"
        cols = list(INPUT_COLUMNS)[:10] + [f"extra{i}" for i in range(21)]
        inputs.write_text(",".join(cols) + "\n" + ",".join(["1"] * 31) + "\n")
        assert run_cli(
            "predict", "--model", trained / "model.json", "--inputs", inputs,
        ) == 2
        assert "schema" in capsys.readouterr().err

    def test_missing_model_exits_2(self, tmp_path):
        inputs = tmp_path / "inputs.csv"
        self.flax_inputs(inputs)
        assert run_cli(
            "predict", "--model", tmp_path / "nope.json", "--inputs", inputs,
        ) == 2
