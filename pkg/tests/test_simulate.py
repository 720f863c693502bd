import json

import pytest

from uavdsa import scheduler as sch
from uavdsa import simulate
from uavdsa.config import validate_config
from uavdsa.core import slot_utility


def config_dict(**overrides):
    base = {
        "seed": 11,
        "radio": {"num_subchannels": 4, "num_uavs": 3},
        "dataset": {"fft_size": 256, "count_per_sinr": 20},
        "sensing": {"kind": "perfect"},
        "agent": {"variant": "random"},
        "episodes": 2,
        "slots_per_episode": 40,
    }
    base.update(overrides)
    return base


class TestRunSlot:
    def test_no_requests_still_charges_sensing(self):
        cfg = validate_config(config_dict(request_probability=0.0, episodes=1,
                                          slots_per_episode=10))
        report = simulate.run_simulation(cfg)
        assert report.transmissions == 0
        assert report.mean_utility == 0.0
        for led in report.ledgers:
            assert len(led.assignment) == 0
            assert sum(led.sensing_costs.values()) > 0

    def test_ledger_utility_recomputes_from_own_fields(self):
        cfg = validate_config(config_dict())
        report = simulate.run_simulation(cfg)
        for led in report.ledgers:
            pairs = [(led.collision[key], led.throughput[key])
                     for key in sorted(led.collision)]
            assert slot_utility(pairs) == led.utility

    def test_holes_fields_consistent(self):
        cfg = validate_config(config_dict())
        report = simulate.run_simulation(cfg)
        m = cfg.radio.num_subchannels
        for led in report.ledgers:
            assert 0 <= led.holes_detected <= m
            assert 0 <= led.holes_true <= m
            # perfect sensing with majority fusion recovers the truth
            assert led.holes_detected == led.holes_true

    def test_zero_collisions_on_static_vacant_channels(self, tmp_path):
        # train an agent quickly, then simulate on always-vacant channels
        env = sch.SchedulingEnv(
            [sch.TransitionMatrix(0.0, 1.0) for _ in range(2)], [[1.0, 0.5]])
        agent = sch.DqnAgent(num_subchannels=2, variant="ddqn-soft",
                             hidden=(16,), seed=0)
        sch.train_agent(agent, env, episodes=30, slots_per_episode=40, seed=2)
        ckpt = str(tmp_path / "agent.ckpt")
        sch.save_agent(agent, ckpt)

        cfg = validate_config(config_dict(
            radio={"num_subchannels": 2, "num_uavs": 2},
            channels={"p01": 0.0, "p10": 1.0},
            agent={"variant": "ddqn-soft", "checkpoint": ckpt},
            episodes=3, slots_per_episode=50))
        report = simulate.run_simulation(cfg)
        assert report.transmissions > 0
        assert report.collisions == 0
        assert report.collision_rate == 0.0


class TestRunSimulation:
    def test_deterministic_reports(self):
        cfg = validate_config(config_dict())
        r1 = simulate.run_simulation(cfg)
        r2 = simulate.run_simulation(cfg)
        assert r1.mean_utility == r2.mean_utility
        assert r1.collision_rate == r2.collision_rate
        assert r1.sensing_counts == r2.sensing_counts

    def test_zero_episodes_yields_valid_empty_report(self, tmp_path):
        cfg = validate_config(config_dict(episodes=0))
        report = simulate.run_simulation(cfg)
        assert report.slots == 0
        simulate.save_report(report, cfg, str(tmp_path))
        with open(tmp_path / "report.json") as f:
            payload = json.load(f)
        assert payload["slots"] == 0
        assert payload["mean_ee"] is None

    def test_trained_beats_random_allocator(self, tmp_path):
        env = sch.preset_scheduling_env(4)
        agent = sch.DqnAgent(num_subchannels=4, variant="ddqn-soft", seed=0)
        sch.train_agent(agent, env, episodes=120, slots_per_episode=100, seed=4)
        ckpt = str(tmp_path / "m4.ckpt")
        sch.save_agent(agent, ckpt)

        base = dict(
            radio={"num_subchannels": 4, "num_uavs": 1},
            link={"sensing_sinr_db": [10.0],
                  "access_sinr_db": [[20.0, 12.0, 6.0, 0.0]]},
            fusion_n=1,
            sensing={"kind": "perfect"},
            episodes=200, slots_per_episode=50)
        trained_cfg = validate_config(config_dict(
            agent={"variant": "ddqn-soft", "checkpoint": ckpt}, **base))
        random_cfg = validate_config(config_dict(agent={"variant": "random"}, **base))
        trained = simulate.run_simulation(trained_cfg)
        randomized = simulate.run_simulation(random_cfg)
        assert trained.mean_utility >= 1.5 * randomized.mean_utility


class TestSaveReport:
    def test_outputs_exist_and_audit_passes(self, tmp_path):
        cfg = validate_config(config_dict())
        report = simulate.run_simulation(cfg)
        simulate.save_report(report, cfg, str(tmp_path))
        for name in ("ledgers.csv", "report.json", "sensing_metrics.csv"):
            assert (tmp_path / name).exists()
        with open(tmp_path / "report.json") as f:
            payload = json.load(f)
        assert payload["slots"] == report.slots
        assert set(payload["sensing"]) == {"uav_0", "uav_1", "uav_2", "fused"}

    def test_audit_catches_tampering(self, tmp_path):
        cfg = validate_config(config_dict())
        report = simulate.run_simulation(cfg)
        report.mean_utility += 1.0
        with pytest.raises(RuntimeError, match="audit|match"):
            simulate.save_report(report, cfg, str(tmp_path))

    def test_ledger_csv_row_count(self, tmp_path):
        cfg = validate_config(config_dict(episodes=2, slots_per_episode=15))
        report = simulate.run_simulation(cfg)
        simulate.save_report(report, cfg, str(tmp_path))
        lines = (tmp_path / "ledgers.csv").read_text().strip().splitlines()
        assert len(lines) == 1 + 30


class TestSensingKindsInSimulation:
    def test_energy_threshold_path(self):
        cfg = validate_config(config_dict(
            sensing={"kind": "energy-threshold",
                     "thresholds": [10.0, 10.0, 10.0, 10.0]},
            episodes=1, slots_per_episode=20))
        report = simulate.run_simulation(cfg)
        counts = report.sensing_counts["uav_0"]
        assert sum(counts) == 20 * 4

    def test_fused_at_least_tallied(self):
        cfg = validate_config(config_dict(episodes=1, slots_per_episode=10))
        report = simulate.run_simulation(cfg)
        assert sum(report.sensing_counts["fused"]) == 10 * 4
