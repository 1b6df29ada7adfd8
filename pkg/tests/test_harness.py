"""Harness tests: config validation, run loop, file outputs, CLI verbs."""

import json
import math
import subprocess
import sys
from dataclasses import replace

import numpy as np
import pytest

from conlearn import cli, harness, losses, models, streams
from conlearn.algorithms import Alg1Config, Alg2Config, SgdConfig
from conlearn.errors import ConfigError


def base_raw_config(**overrides):
    raw = {
        "stream": {
            "case": 1, "dim": 3, "num_tasks": 25, "samples_per_task": 6,
            "family": {"kind": "linear"},
            "regime": {"kind": "bounded_uniform", "bound": 2.0},
            "noise": {"kind": "gaussian", "sigma": 0.5},
            "order": {"kind": "sequential"},
            "seed": 9,
            "w_star": [0.5, -0.3, 0.2],
        },
        "learner": {"kind": "alg1"},
    }
    raw.update(overrides)
    return raw


class TestConfigParsing:
    def test_minimal_roundtrip(self):
        cfg = harness.parse_config(base_raw_config())
        assert isinstance(cfg.learner, Alg1Config)
        assert cfg.learner.mu == 1.0  # linear default
        assert cfg.replicate_seeds == (9,)
        echoed = harness.config_to_dict(cfg)
        again = harness.parse_config(echoed)
        assert harness.config_to_dict(again) == echoed

    def test_unknown_top_level_key(self):
        with pytest.raises(ConfigError) as err:
            harness.parse_config(base_raw_config(bogus=1))
        assert "bogus" in str(err.value)

    def test_unknown_nested_key_path(self):
        raw = base_raw_config()
        raw["stream"]["regime"]["fuzz"] = 3
        with pytest.raises(ConfigError) as err:
            harness.parse_config(raw)
        assert "stream.regime.fuzz" in str(err.value)

    def test_missing_field_path(self):
        raw = base_raw_config()
        del raw["stream"]["dim"]
        with pytest.raises(ConfigError) as err:
            harness.parse_config(raw)
        assert "stream.dim" in str(err.value)

    def test_alg2_requires_linear_family(self):
        raw = base_raw_config(learner={"kind": "alg2"})
        raw["stream"]["family"] = {"kind": "logistic"}
        raw["stream"]["noise"] = {"kind": "bernoulli"}
        with pytest.raises(ConfigError) as err:
            harness.parse_config(raw)
        assert "linear" in str(err.value)

    def test_saturated_family_fields(self):
        raw = base_raw_config()
        raw["stream"]["family"] = {"kind": "saturated", "l": -1.0, "u": 1.0,
                                   "lout": -1.0, "uout": 1.0}
        raw["stream"]["noise"] = {"kind": "gaussian", "sigma": 1.0}
        raw["learner"] = {"kind": "alg1", "radius": 1.5}
        cfg = harness.parse_config(raw)
        assert isinstance(cfg.stream.family, losses.Saturated)
        # auto mu from the curvature floor over |xi| <= bound * radius
        expected = math.sqrt(losses.curvature_bounds(cfg.stream.family, 3.0).mu_lower)
        assert cfg.learner.mu == pytest.approx(expected, rel=1e-12)

    def test_auto_mu_requires_bounded_features_for_nonlinear(self):
        raw = base_raw_config()
        raw["stream"]["family"] = {"kind": "logistic"}
        raw["stream"]["noise"] = {"kind": "bernoulli"}
        raw["stream"]["regime"] = {"kind": "gaussian_iid"}
        with pytest.raises(ConfigError) as err:
            harness.parse_config(raw)
        assert "mu" in str(err.value)

    def test_bad_checkpoint_cadence(self):
        with pytest.raises(ConfigError):
            harness.parse_config(base_raw_config(checkpoints={"every": 0}))

    def test_sgd_learner(self):
        cfg = harness.parse_config(base_raw_config(learner={"kind": "sgd", "lr": 0.05}))
        assert isinstance(cfg.learner, SgdConfig)
        assert cfg.learner.passes == 5


class TestRunExperiment:
    def test_single_task_stream(self):
        raw = base_raw_config()
        raw["stream"]["num_tasks"] = 1
        result = harness.run_experiment(harness.parse_config(raw))
        assert len(result.records) == 1
        rec = result.records[0]
        assert rec.t == 1
        assert math.isfinite(rec.regret) and math.isfinite(rec.forgetting)

    def test_case1_p_star_equals_l_star(self):
        result = harness.run_experiment(harness.parse_config(base_raw_config()))
        for rec in result.records:
            assert rec.p_star == rec.l_star

    def test_lambda_min_nondecreasing(self):
        result = harness.run_experiment(harness.parse_config(base_raw_config()))
        lams = [r.lambda_min for r in result.records]
        assert all(b >= a - 1e-12 for a, b in zip(lams, lams[1:]))

    def test_checkpoint_cadence(self):
        raw = base_raw_config(checkpoints={"every": 10})
        result = harness.run_experiment(harness.parse_config(raw))
        assert [r.t for r in result.records] == [10, 20, 25]

    def test_default_cadence_caps_record_count(self):
        assert harness.default_checkpoint_every(150) == 1
        assert harness.default_checkpoint_every(5000) == 25

    def test_sgd_divergence_flagged(self):
        raw = base_raw_config(learner={"kind": "sgd", "lr": 1000.0, "passes": 3})
        result = harness.run_experiment(harness.parse_config(raw))
        assert result.status == harness.STATUS_DIVERGED
        assert len(result.records) == 25  # partial records retained

    def test_sgd_q_lambda_min_is_nan(self):
        raw = base_raw_config(learner={"kind": "sgd"})
        result = harness.run_experiment(harness.parse_config(raw))
        assert math.isnan(result.records[-1].q_lambda_min)

    def test_order_experiment_same_final_l_star(self):
        cfg = harness.demo_config("sequential", "alg2", seed=42)
        cfg_rnd = harness.demo_config("random", "alg2", seed=42)
        res_seq = harness.run_experiment(cfg)
        res_rnd = harness.run_experiment(cfg_rnd)
        assert res_seq.records[-1].l_star == pytest.approx(res_rnd.records[-1].l_star,
                                                           rel=1e-12)


class TestOutputs:
    def test_csv_schema_and_roundtrip(self, tmp_path):
        raw = base_raw_config(output={"dir": str(tmp_path / "out")})
        cfg = harness.parse_config(raw)
        results = harness.run_config(cfg)
        csv_path = tmp_path / "out" / "metrics_9.csv"
        lines = csv_path.read_text().splitlines()
        assert lines[0] == ",".join(harness.CSV_COLUMNS)
        rows = harness.read_metrics_csv(csv_path)
        assert len(rows) == len(results[0].records)
        for parsed, rec in zip(rows, results[0].records):
            assert parsed.est_err_sq == rec.est_err_sq  # exact float round-trip
            assert parsed.forgetting == rec.forgetting

    def test_trajectory_summary_and_echo_written(self, tmp_path):
        raw = base_raw_config(output={"dir": str(tmp_path / "out")})
        harness.run_config(harness.parse_config(raw))
        assert (tmp_path / "out" / "trajectory_9.csv").exists()
        summary = json.loads((tmp_path / "out" / "summary.json").read_text())
        assert summary["replicates"][0]["seed"] == 9
        assert summary["replicates"][0]["status"] == "completed"
        echo = json.loads((tmp_path / "out" / "config_echo.json").read_text())
        assert echo["stream"]["seed"] == 9
        assert echo["learner"]["mu"] == 1.0

    def test_byte_identical_reruns(self, tmp_path):
        for sub in ("a", "b"):
            raw = base_raw_config(output={"dir": str(tmp_path / sub)})
            harness.run_config(harness.parse_config(raw))
        a = (tmp_path / "a" / "metrics_9.csv").read_bytes()
        b = (tmp_path / "b" / "metrics_9.csv").read_bytes()
        assert a == b

    def test_replicates_write_per_seed_files(self, tmp_path):
        raw = base_raw_config(output={"dir": str(tmp_path / "out")},
                              replicate_seeds=[3, 4])
        results = harness.run_config(harness.parse_config(raw))
        assert {r.seed for r in results} == {3, 4}
        assert (tmp_path / "out" / "metrics_3.csv").exists()
        assert (tmp_path / "out" / "metrics_4.csv").exists()

    def test_thread_cap_env(self, tmp_path, monkeypatch):
        monkeypatch.setenv(harness.THREADS_ENV, "2")
        raw = base_raw_config(output={"dir": str(tmp_path / "out")},
                              replicate_seeds=[5, 6, 7])
        results = harness.run_config(harness.parse_config(raw))
        assert len(results) == 3
        monkeypatch.setenv(harness.THREADS_ENV, "zero")
        with pytest.raises(ConfigError):
            harness.run_config(harness.parse_config(raw))

    def test_format_float_roundtrip(self):
        for x in (0.1, 1 / 3, 1e-17, 123456.789, float("nan")):
            s = harness.format_float(x)
            if s == "nan":
                assert math.isnan(x)
            else:
                assert float(s) == x


class TestReadMetricsCsvValidation:
    def test_permuted_columns_rejected_with_column_message(self, tmp_path):
        cols = list(harness.CSV_COLUMNS)
        cols[0], cols[1] = cols[1], cols[0]
        path = tmp_path / "bad.csv"
        path.write_text(",".join(cols) + "\n")
        with pytest.raises(ConfigError) as err:
            harness.read_metrics_csv(path)
        assert "column 1" in str(err.value)
        assert "t" in str(err.value)


class TestCli:
    def write_config(self, tmp_path, raw):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(raw))
        return path

    def test_run_verb(self, tmp_path, capsys):
        raw = base_raw_config(output={"dir": str(tmp_path / "out")})
        code = cli.main(["run", str(self.write_config(tmp_path, raw))])
        assert code == cli.EXIT_OK
        assert "status=completed" in capsys.readouterr().out

    def test_run_seed_override(self, tmp_path, capsys):
        raw = base_raw_config(output={"dir": str(tmp_path / "out")})
        code = cli.main(["run", str(self.write_config(tmp_path, raw)), "--seed", "77"])
        assert code == cli.EXIT_OK
        assert (tmp_path / "out" / "metrics_77.csv").exists()

    def test_config_error_exit_code(self, tmp_path):
        path = self.write_config(tmp_path, {"stream": {"case": 1}})
        assert cli.main(["run", str(path)]) == cli.EXIT_CONFIG_ERROR

    def test_rates_verb(self, tmp_path, capsys):
        raw = base_raw_config(output={"dir": str(tmp_path / "out")})
        cli.main(["run", str(self.write_config(tmp_path, raw))])
        code = cli.main(["rates", str(tmp_path / "out" / "metrics_9.csv")])
        assert code == cli.EXIT_OK
        out = capsys.readouterr().out
        assert "regret_gap" in out and "exponent" in out

    def test_rates_verb_schema_error(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("a,b,c\n1,2,3\n")
        assert cli.main(["rates", str(bad)]) == cli.EXIT_CONFIG_ERROR

    def test_module_entry_point(self, tmp_path):
        raw = base_raw_config(output={"dir": str(tmp_path / "out")})
        path = self.write_config(tmp_path, raw)
        proc = subprocess.run([sys.executable, "-m", "conlearn.cli", "run", str(path)],
                              capture_output=True, text=True)
        assert proc.returncode == 0
        assert "status=completed" in proc.stdout


class TestDemoConfig:
    def test_demo_stream_shape(self):
        spec = harness.demo_stream_spec("sequential", seed=1)
        assert (spec.num_tasks, spec.samples_per_task, spec.dim) == (100, 200, 2)
        stream = streams.build_stream(spec)
        np.testing.assert_allclose(stream.w_star, [25 / 6, -1 / 6], rtol=1e-15)

    def test_demo_rejects_unknown_order(self):
        with pytest.raises(ConfigError):
            harness.demo_config("shuffled", "alg2", seed=1)
