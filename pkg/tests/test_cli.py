import json
import os

from uavdsa.cli import cli_dispatch


def write_config(tmp_path, **overrides):
    cfg = {
        "seed": 42,
        "radio": {"num_subchannels": 4, "num_uavs": 3},
        "dataset": {"fft_size": 256, "count_per_sinr": 30, "eval_count": 20},
        "sensing": {"kind": "energy-threshold",
                    "thresholds": [8.0, 8.0, 8.0, 8.0],
                    "input_mode": "band-energy", "epochs": 4},
        "agent": {"variant": "random"},
        "episodes": 1,
        "slots_per_episode": 30,
    }
    cfg.update(overrides)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    return str(path)


def tree_bytes(root):
    out = {}
    for dirpath, _dirs, files in os.walk(root):
        for name in files:
            p = os.path.join(dirpath, name)
            out[os.path.relpath(p, root)] = open(p, "rb").read()
    return out


class TestExitCodes:
    def test_missing_config_is_usage_error(self, capsys):
        assert cli_dispatch(["simulate", "--config", "/no/such/file.json"]) == 1
        assert "cannot read" in capsys.readouterr().err

    def test_malformed_config_lists_field_paths(self, tmp_path, capsys):
        p = tmp_path / "bad.json"
        p.write_text(json.dumps({"seed": 1, "radio": {"num_subchannels": -2},
                                 "mystery": True}))
        assert cli_dispatch(["simulate", "--config", str(p)]) == 1
        err = capsys.readouterr().err
        assert "radio.num_subchannels" in err
        assert "config.mystery" in err

    def test_unknown_subcommand(self):
        assert cli_dispatch(["frobnicate"]) == 1

    def test_missing_required_config_flag(self, capsys):
        assert cli_dispatch(["simulate"]) == 1

    def test_runtime_failure_is_2(self, tmp_path, capsys):
        cfg = write_config(tmp_path)
        # train-sensor with no dataset file on disk
        assert cli_dispatch(["train-sensor", "--config", cfg,
                             "--out", str(tmp_path / "empty")]) == 2

    def test_help_exits_zero(self):
        assert cli_dispatch(["--help"]) == 0


class TestPipeline:
    def test_full_pipeline(self, tmp_path, capsys):
        cfg = write_config(tmp_path)
        out = str(tmp_path / "run")
        assert cli_dispatch(["gen-dataset", "--config", cfg, "--out", out]) == 0
        assert cli_dispatch(["train-sensor", "--config", cfg, "--out", out]) == 0
        assert cli_dispatch(["eval-sensing", "--config", cfg, "--out", out,
                             "--model", os.path.join(out, "sensor.ckpt")]) == 0
        assert cli_dispatch(["train-agent", "--config", cfg, "--out", out,
                             "--variant", "ddqn-soft", "--uavs", "2"]) == 0
        assert cli_dispatch(["simulate", "--config", cfg, "--out", out]) == 0
        for name in ("dataset.iq", "sensor.ckpt", "sensor_curve.csv",
                     "sensing_metrics.csv", "training_ddqn-soft_2uav.csv",
                     "agent_ddqn-soft_2uav.ckpt", "ledgers.csv", "report.json"):
            assert os.path.exists(os.path.join(out, name)), name

    def test_report_merges_training_logs(self, tmp_path, capsys):
        cfg = write_config(tmp_path, episodes=2, slots_per_episode=10)
        out = str(tmp_path / "runs")
        for variant in ("dqn", "ddqn"):
            assert cli_dispatch(["train-agent", "--config", cfg, "--out", out,
                                 "--variant", variant]) == 0
        assert cli_dispatch([
            "report", "--out", out,
            os.path.join(out, "training_dqn_1uav.csv"),
            os.path.join(out, "training_ddqn_1uav.csv")]) == 0
        lines = open(os.path.join(out, "comparison.csv")).read().splitlines()
        assert lines[0].startswith("source,episode,")
        sources = {line.split(",")[0] for line in lines[1:]}
        assert sources == {"training_dqn_1uav", "training_ddqn_1uav"}

    def test_report_rejects_non_training_csv(self, tmp_path, capsys):
        bad = tmp_path / "x.csv"
        bad.write_text("a,b\n1,2\n")
        assert cli_dispatch(["report", "--out", str(tmp_path), str(bad)]) == 2


class TestDeterminism:
    def test_gen_dataset_and_simulate_byte_identical(self, tmp_path, capsys):
        cfg = write_config(tmp_path)
        trees = []
        for name in ("r1", "r2"):
            out = str(tmp_path / name)
            assert cli_dispatch(["gen-dataset", "--config", cfg, "--out", out]) == 0
            assert cli_dispatch(["simulate", "--config", cfg, "--out", out]) == 0
            trees.append(tree_bytes(out))
        assert trees[0] == trees[1]

    def test_seed_flag_changes_outputs(self, tmp_path, capsys):
        cfg = write_config(tmp_path)
        outs = []
        for name, seed in (("a", "42"), ("b", "43")):
            out = str(tmp_path / name)
            assert cli_dispatch(["gen-dataset", "--config", cfg, "--out", out,
                                 "--seed", seed]) == 0
            outs.append(open(os.path.join(out, "dataset.iq"), "rb").read())
        assert outs[0] != outs[1]
