import json
import time

import numpy as np
import pytest

from spins import models
from spins.cli import main
from spins.experiments import (
    ConfigError,
    ExperimentConfig,
    bundled_config_names,
    load_config,
    read_trace,
    run_experiment,
    sampler_seeds,
    summarize_traces,
    write_trace,
)
from spins.mcmc import Trace


def small_config(tmp_path, **overrides):
    raw = load_config("msn.json").raw
    raw["chain"]["iterations"] = 200
    raw["chain"]["burn_in"] = 50
    raw["model"]["n"] = 100
    raw.update(overrides)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(raw))
    return path


class TestConfig:
    def test_bundled(self):
        assert {"msn.json", "multiplicative.json", "sector.json", "cube.json", "ballstick.json"} <= set(bundled_config_names())
        for name in bundled_config_names():
            load_config(name)

    def test_tuning_values(self):
        spec = {s["name"]: s for s in load_config("msn.json").samplers}
        assert (spec["spins_cw"]["d"], spec["spins_joint"]["d"], spec["salt"]["h"], spec["dirichlet"]["tau"]) == (2.5, 3.0, 0.4, 10.0)
        spec = {s["name"]: s for s in load_config("multiplicative.json").samplers}
        assert (spec["spins_cw"]["d"], spec["spins_joint"]["d"], spec["salt"]["h"], spec["dirichlet"]["tau"]) == (4.0, 6.0, 0.3, 50.0)
        assert load_config("cube.json").samplers[0]["d"] == 30.0
        assert load_config("sector.json").samplers[0]["d"] == 3.0

    @pytest.mark.parametrize(
        "patch",
        [
            {"domain": {"kind": "torus"}},
            {"samplers": [{"kind": "salt", "h": 0.4}, {"kind": "salt", "h": 0.3}]},
            {"samplers": [{"kind": "uniform"}]},
            {"samplers": [{"kind": "spins", "mode": "joint"}]},
            {"samplers": [{"kind": "spins", "d": -1}]},
            {"model": {"kind": "additive_msn"}},
            {"model": {"kind": "additive_msn", "dataset": "nope.csv"}},
            {"chain": {"iterations": 10, "initial_state": [0.0, 0.5, 0.5]}},
            {"chain": {"iterations": 10, "burn_in": 10, "initial_state": [0.2, 0.3, 0.5]}},
        ],
    )
    def test_invalid(self, patch):
        raw = {**load_config("msn.json").raw, **patch}
        with pytest.raises(ConfigError):
            ExperimentConfig.from_dict(raw)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(tmp_path / "absent.json")

    def test_seeds_distinct(self):
        s = sampler_seeds(1, 4)
        assert len(set(s)) == 4 and s == sampler_seeds(1, 4)


class TestTraceFiles:
    def test_round_trip_joint(self, tmp_path, rng):
        tr = Trace(rng.dirichlet(np.ones(3), 50), rng.random(50) < 0.4, rng.normal(size=50))
        write_trace(tr, tmp_path / "t.csv")
        assert read_trace(tmp_path / "t.csv") == tr
        assert (tmp_path / "t.csv").read_text().splitlines()[0] == "iter,theta_1,theta_2,theta_3,accepted,log_post"

    def test_round_trip_componentwise(self, tmp_path, rng):
        tr = Trace(rng.dirichlet(np.ones(3), 50), rng.random((50, 3)) < 0.4, rng.normal(size=50), mode="componentwise")
        write_trace(tr, tmp_path / "t.csv")
        assert read_trace(tmp_path / "t.csv") == tr

    def test_not_a_trace(self, tmp_path):
        (tmp_path / "x.csv").write_text("a,b\n1,2\n")
        with pytest.raises(ValueError):
            read_trace(tmp_path / "x.csv")

    def test_iid_trace_summary(self, tmp_path, rng):
        n = 4000
        tr = Trace(rng.random((n, 2)), np.ones(n, bool), np.zeros(n))
        write_trace(tr, tmp_path / "iid.csv")
        row = summarize_traces([tmp_path / "iid.csv"])["iid"]
        assert all(0.8 * n <= e <= n for e in row["ess"])


class TestCommands:
    def test_generate_bundled(self, tmp_path):
        assert main(["generate", "--config", "msn.json", "--out", str(tmp_path), "--quiet"]) == 0
        data = models.load_dataset(tmp_path / "msn_data.csv")
        assert data.observations.shape == (1000, 3)
        assert data.meta["params"]["theta"] == pytest.approx([1 / 3] * 3)

    def test_generate_ballstick(self, tmp_path):
        assert main(["generate", "--config", "ballstick.json", "--out", str(tmp_path), "--quiet"]) == 0
        data = models.load_dataset(tmp_path / "ballstick_snr20_data.csv")
        assert data.observations.shape == (64, 1)
        assert data.meta["params"]["snr"] == 20.0

    def test_generate_is_byte_identical(self, tmp_path):
        for sub in ("a", "b"):
            main(["generate", "--config", "cube.json", "--out", str(tmp_path / sub), "--seed", "9", "--quiet"])
        for name in ("cube_data.csv", "cube_data.json"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_run_and_summarize(self, tmp_path, capsys):
        cfg = small_config(tmp_path)
        assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "run"), "--quiet"]) == 0
        report = json.loads((tmp_path / "run" / "report.json").read_text())
        assert set(report["samplers"]) == {"spins_cw", "spins_joint", "salt", "dirichlet"}
        for entry in report["samplers"].values():
            trace = read_trace(entry["trace"])
            assert len(trace) == 200
            assert 0 <= entry["diagnostics"]["acceptance_rate"] <= 1
        assert read_trace(report["samplers"]["salt"]["trace"]).accepted.shape == (200, 3)
        assert main(["summarize", str(tmp_path / "run" / "report.json"), "--out", str(tmp_path / "s")]) == 0
        out = capsys.readouterr().out
        assert "spins_cw" in out and "dirichlet" in out
        summary = json.loads((tmp_path / "s" / "summary.json").read_text())
        assert summary["salt"]["n_samples"] == 150

    def test_run_deterministic(self, tmp_path):
        cfg = small_config(tmp_path)
        for sub in ("a", "b"):
            assert main(["run", "--config", str(cfg), "--out", str(tmp_path / sub), "--quiet"]) == 0
        for name in ("spins_cw.csv", "spins_joint.csv", "salt.csv", "dirichlet.csv"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_summarize_same_trace_twice(self, tmp_path):
        cfg = small_config(tmp_path)
        main(["run", "--config", str(cfg), "--out", str(tmp_path / "a"), "--quiet"])
        main(["run", "--config", str(cfg), "--out", str(tmp_path / "b"), "--quiet"])
        a = summarize_traces([tmp_path / "a" / "salt.csv"])["salt"]
        b = summarize_traces([tmp_path / "b" / "salt.csv"])["salt"]
        assert a == b

    def test_run_uses_dataset_file(self, tmp_path):
        main(["generate", "--config", "sector.json", "--out", str(tmp_path), "--quiet"])
        raw = load_config("sector.json").raw
        raw["model"] = {"kind": "additive_gaussian", "dataset": "sector_data.csv", "params": raw["model"]["params"]}
        raw["chain"]["iterations"] = 100
        raw["chain"]["burn_in"] = 10
        (tmp_path / "c.json").write_text(json.dumps(raw))
        report = run_experiment(load_config(tmp_path / "c.json"), out_dir=tmp_path / "run")
        assert report["dataset"].endswith("sector_data.csv")

    def test_exit_codes(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert main(["run", "--config", str(bad)]) == 1
        assert main(["run", "--config", str(tmp_path / "missing.json")]) == 1
        assert main(["summarize", str(tmp_path / "nothing.csv")]) == 1
        with pytest.raises(SystemExit) as exc:
            main(["run"])
        assert exc.value.code == 1

    def test_invalid_model_params_exit_code(self, tmp_path):
        raw = load_config("msn.json").raw
        raw["model"]["params"]["omega"] = [[1.0, 2.0, 0.0], [2.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps(raw))
        assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o"), "--quiet"]) == 1

    @pytest.mark.filterwarnings("ignore:overflow:RuntimeWarning")
    def test_chain_failure_exit_code(self, tmp_path):
        # observations so large that the log posterior overflows at the start
        models.save_dataset(models.Dataset(np.full((3, 3), 1e200)), tmp_path / "huge.csv")
        raw = load_config("sector.json").raw
        raw["model"] = {"kind": "additive_gaussian", "dataset": "huge.csv"}
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps(raw))
        assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o"), "--quiet"]) == 2


@pytest.mark.slow
@pytest.mark.parametrize("name", ["msn.json", "multiplicative.json", "sector.json", "cube.json", "ballstick.json", "ballstick_snr10.json"])
def test_bundled_config_under_a_minute(name, tmp_path):
    t0 = time.perf_counter()
    report = run_experiment(load_config(name), out_dir=tmp_path)
    assert time.perf_counter() - t0 < 60
    for entry in report["samplers"].values():
        assert read_trace(entry["trace"]) is not None
