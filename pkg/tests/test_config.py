import json

import pytest

from uavdsa.config import ConfigError, load_config, validate_config


def minimal(**overrides):
    cfg = {"seed": 7}
    cfg.update(overrides)
    return cfg


class TestDefaults:
    def test_minimal_config_fills_defaults(self):
        cfg = validate_config(minimal())
        assert cfg.seed == 7
        assert cfg.radio.num_subchannels == 4
        assert cfg.radio.num_uavs == 3
        assert cfg.fusion.n == 2
        assert len(cfg.matrices) == 4
        assert len(cfg.sensing) == 3
        assert cfg.synth.samples_per_observation == 1024
        assert cfg.link.sensing_sinr_db == (10.0, 10.0, 0.0)

    def test_seed_required(self):
        with pytest.raises(ConfigError, match="seed"):
            validate_config({})

    def test_seed_override_wins(self):
        cfg = validate_config(minimal(), seed_override=99)
        assert cfg.seed == 99

    def test_out_override(self):
        cfg = validate_config(minimal(out_dir="a"), out_override="b")
        assert cfg.out_dir == "b"


class TestValidation:
    def test_unknown_keys_rejected_everywhere(self):
        raw = minimal(radio={"num_subchannels": 4, "typo_key": 1}, bogus=2)
        with pytest.raises(ConfigError) as exc:
            validate_config(raw)
        text = str(exc.value)
        assert "radio.typo_key: unknown key" in text
        assert "config.bogus: unknown key" in text

    def test_all_problems_reported_together(self):
        raw = minimal(
            radio={"num_subchannels": 0},
            fusion_n=9,
            request_probability=2.0,
        )
        with pytest.raises(ConfigError) as exc:
            validate_config(raw)
        assert len(exc.value.problems) >= 3

    def test_channel_count_must_match_m(self):
        raw = minimal(radio={"num_subchannels": 3},
                      channels=[{"p01": 0.1, "p10": 0.2}] * 2)
        with pytest.raises(ConfigError, match="channels: expected 3"):
            validate_config(raw)

    def test_access_table_dimensions(self):
        raw = minimal(link={"access_sinr_db": [[1.0, 2.0]]})
        with pytest.raises(ConfigError, match="access_sinr_db"):
            validate_config(raw)

    def test_energy_threshold_requires_thresholds(self):
        raw = minimal(sensing={"kind": "energy-threshold"})
        with pytest.raises(ConfigError, match="thresholds: required"):
            validate_config(raw)

    def test_classifier_requires_model_path(self):
        raw = minimal(sensing={"kind": "dense-classifier"})
        with pytest.raises(ConfigError, match="model_path: required"):
            validate_config(raw)

    def test_qtable_refused_for_large_m(self):
        raw = minimal(radio={"num_subchannels": 16},
                      agent={"variant": "qtable"},
                      dataset={"fft_size": 1024})
        with pytest.raises(ConfigError, match="qtable"):
            validate_config(raw)

    def test_uniform_channel_shorthand(self):
        cfg = validate_config(minimal(channels={"p01": 0.4, "p10": 0.4}))
        assert all(m.p01 == 0.4 for m in cfg.matrices)

    def test_per_uav_sensing_list(self):
        specs = [{"kind": "perfect"}, {"kind": "perfect"},
                 {"kind": "energy-threshold", "thresholds": [1, 1, 1, 1]}]
        cfg = validate_config(minimal(sensing=specs))
        assert cfg.sensing[2].kind == "energy-threshold"

    def test_dataset_blocks_must_fit(self):
        raw = minimal(dataset={"fft_size": 64, "subcarriers_per_subchannel": 32})
        with pytest.raises(ConfigError, match="dataset"):
            validate_config(raw)


class TestLoadConfig:
    def test_missing_file(self):
        with pytest.raises(ConfigError, match="cannot read"):
            load_config("/nonexistent/cfg.json")

    def test_invalid_json(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text("{not json")
        with pytest.raises(ConfigError, match="not valid JSON"):
            load_config(str(p))

    def test_roundtrip(self, tmp_path):
        p = tmp_path / "ok.json"
        p.write_text(json.dumps(minimal(episodes=3)))
        cfg = load_config(str(p))
        assert cfg.episodes == 3
