# -*- coding: utf-8 -*-
"""RunConfig 驗證與環境變數設定測試"""

import copy
import math

import pytest

from conftest import ROOT_DIR, TWO_PI, small_run_config
from config_loader import (
    AccuracySettings,
    load_run_config,
    load_settings_from_env,
    read_json,
    validate_run_config,
    write_json,
)
from rdt_errors import ConfigError


class TestExampleConfig:
    def test_example_config_loads(self):
        config = load_run_config(f"{ROOT_DIR}/example_config.json")
        assert config.geometry.k0 == pytest.approx(TWO_PI)
        assert config.accuracy.Ns == 2400
        assert config.accuracy.truncation_widths == 5.0
        assert config.seed == 0
        assert config.detector.count == 512
        settings = config.simulation_settings(workers=4)
        assert settings.Ns == 2400
        assert settings.workers == 4


class TestValidation:
    def test_small_config(self):
        config = validate_run_config(small_run_config())
        assert config.scan.count == 32
        assert config.phantom.smallest_feature == pytest.approx(0.2)

    def test_accuracy_defaults(self):
        data = small_run_config()
        del data["accuracy"]
        config = validate_run_config(data)
        assert config.accuracy == AccuracySettings()

    def test_unknown_top_level_key(self):
        data = small_run_config()
        data["extra"] = 1
        with pytest.raises(ConfigError, match="未知的設定欄位: config.extra"):
            validate_run_config(data)

    def test_unknown_nested_key(self):
        data = small_run_config()
        data["geometry"]["foo"] = 1
        with pytest.raises(ConfigError, match="geometry.foo"):
            validate_run_config(data)

    def test_missing_key(self):
        data = small_run_config()
        del data["scan"]
        with pytest.raises(ConfigError, match="缺少必要的設定欄位: config.scan"):
            validate_run_config(data)

    def test_detector_must_lie_outside_ball(self):
        data = small_run_config()
        data["geometry"]["L"] = 1.0
        with pytest.raises(ConfigError, match="L > r"):
            validate_run_config(data)

    def test_dimension(self):
        data = small_run_config()
        data["geometry"]["d"] = 4
        with pytest.raises(ConfigError, match="geometry.d"):
            validate_run_config(data)

    def test_vectors_are_normalized(self):
        data = small_run_config(omega=(0.0, 2.0), nu=(3.0, 3.0))
        config = validate_run_config(data)
        assert config.geometry.omega == pytest.approx((0.0, 1.0))
        assert config.geometry.nu == pytest.approx((math.sqrt(0.5), math.sqrt(0.5)))

    @pytest.mark.parametrize(
        "key,value",
        [("taper", 1.5), ("gamma", 1.0), ("Ns", 8), ("Nv", 1.5)],
    )
    def test_bad_accuracy_values(self, key, value):
        data = small_run_config()
        data["accuracy"][key] = value
        with pytest.raises(ConfigError, match=f"accuracy.{key}"):
            validate_run_config(data)

    def test_phantom_outside_support(self):
        data = small_run_config()
        data["phantom"][0]["center"] = [0.5, 0.0]
        with pytest.raises(ConfigError):
            validate_run_config(data)

    def test_override_must_be_boolean(self):
        data = small_run_config()
        data["detector"]["override_nyquist"] = "yes"
        with pytest.raises(ConfigError, match="override_nyquist"):
            validate_run_config(data)

    def test_input_is_not_mutated(self):
        data = small_run_config()
        before = copy.deepcopy(data)
        validate_run_config(data)
        assert data == before


class TestJson:
    def test_round_trip(self, tmp_path):
        path = write_json({"b": 1, "a": [1.5, None]}, tmp_path / "out" / "x.json")
        assert read_json(path) == {"a": [1.5, None], "b": 1}
        assert path.read_text(encoding="utf-8").index('"a"') < path.read_text(encoding="utf-8").index('"b"')

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="找不到設定檔"):
            read_json(tmp_path / "absent.json")

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json", encoding="utf-8")
        with pytest.raises(ConfigError):
            load_run_config(path)


class TestEnvironment:
    @pytest.fixture
    def env_file(self, tmp_path):
        path = tmp_path / ".env"
        path.write_text("", encoding="utf-8")
        return str(path)

    def test_defaults(self, monkeypatch, env_file):
        for key in ("RDT_THREADS", "RDT_LOG_LEVEL", "RDT_RUNTIME_BUDGET_S"):
            monkeypatch.delenv(key, raising=False)
        settings = load_settings_from_env(env_file)
        assert settings["threads"] == 1
        assert settings["log_level"] == "INFO"

    def test_values_from_environment(self, monkeypatch, env_file):
        monkeypatch.setenv("RDT_THREADS", "6")
        monkeypatch.setenv("RDT_LOG_LEVEL", "DEBUG")
        monkeypatch.setenv("RDT_RUNTIME_BUDGET_S", "30")
        settings = load_settings_from_env(env_file)
        assert settings == {"threads": 6, "log_level": "DEBUG", "runtime_budget_s": 30.0}

    def test_bad_thread_count(self, monkeypatch, env_file):
        monkeypatch.setenv("RDT_THREADS", "many")
        with pytest.raises(ConfigError, match="環境變數格式錯誤"):
            load_settings_from_env(env_file)
