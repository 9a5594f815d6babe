from pathlib import Path

import pytest

from src.config import Config
from src.errors import ConfigError
from src.harness import ScenarioConfig

REPO_ROOT = Path(__file__).resolve().parent.parent
SCENARIOS_DIR = REPO_ROOT / "scenarios"


class TestConfig:
    def test_env_substitution(self, write_config, monkeypatch):
        monkeypatch.setenv("RESULTS_DIR", "/tmp/results")
        config = Config(write_config({"output": "${RESULTS_DIR}/run.csv"}))
        assert config.output == "/tmp/results/run.csv"

    def test_unset_variable_becomes_empty(self, write_config, monkeypatch):
        monkeypatch.delenv("NOT_SET_ANYWHERE", raising=False)
        config = Config(write_config({"output": "x${NOT_SET_ANYWHERE}.csv"}))
        assert config.output == "x.csv"

    def test_dotted_get(self, write_config):
        config = Config(write_config({"plant": {"sigma": 0.5}, "logging": {"level": "DEBUG"}}))
        assert config.get("plant.sigma") == 0.5
        assert config.get("plant.coeffs", [1.0]) == [1.0]
        assert config.get("plant.sigma.deeper", "fallback") == "fallback"
        assert config.log_level == "DEBUG"

    def test_zero_is_not_missing(self, write_config):
        assert Config(write_config({"seed": 0})).get("seed", 7) == 0

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            Config(str(tmp_path / "absent.yml"))

    def test_invalid_yaml(self, tmp_path):
        path = tmp_path / "broken.yml"
        path.write_text("plant: [1, 2\n", encoding="utf-8")
        with pytest.raises(ConfigError):
            Config(str(path))

    def test_top_level_must_be_mapping(self, tmp_path):
        path = tmp_path / "list.yml"
        path.write_text("- 1\n- 2\n", encoding="utf-8")
        with pytest.raises(ConfigError):
            Config(str(path))

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.yml"
        path.write_text("", encoding="utf-8")
        assert Config(str(path)).as_dict() == {}

    def test_from_dict(self, monkeypatch):
        monkeypatch.delenv("HARNESS_WORKERS", raising=False)
        monkeypatch.setenv("HARNESS_SEED_VALUE", "5")
        config = Config.from_dict({"seed": "${HARNESS_SEED_VALUE}"})
        assert ScenarioConfig.from_config(config).seed == 5


class TestOverrides:
    def test_workers_from_environment(self, write_config, monkeypatch):
        path = write_config({"workers": 1})
        monkeypatch.setenv("HARNESS_WORKERS", "3")
        assert ScenarioConfig.from_config(Config(path)).workers == 3

    def test_bad_workers_environment(self, write_config, monkeypatch):
        path = write_config({})
        monkeypatch.setenv("HARNESS_WORKERS", "many")
        with pytest.raises(ConfigError):
            ScenarioConfig.from_config(Config(path))

    def test_log_file_from_environment(self, write_config, monkeypatch, tmp_path):
        path = write_config({"logging": {"level": "info"}})
        monkeypatch.setenv("HARNESS_LOG_FILE", str(tmp_path / "run.log"))
        scenario = ScenarioConfig.from_config(Config(path))
        assert scenario.logging.file == str(tmp_path / "run.log")
        assert scenario.logging.level == "INFO"

    def test_command_line_wins(self, write_config):
        config = Config(write_config({"seed": 1, "workers": 1, "output": "a.csv"}))
        scenario = ScenarioConfig.from_config(config, seed=9, output="b.csv", workers=2)
        assert (scenario.seed, scenario.output, scenario.workers) == (9, "b.csv", 2)

    def test_command_line_validated(self, write_config):
        with pytest.raises(ConfigError):
            ScenarioConfig.from_config(Config(write_config({})), workers=0)


@pytest.mark.parametrize("path", sorted(SCENARIOS_DIR.glob("*.yml")), ids=lambda p: p.stem)
def test_bundled_scenarios_validate(path, monkeypatch):
    monkeypatch.delenv("HARNESS_WORKERS", raising=False)
    monkeypatch.delenv("HARNESS_LOG_FILE", raising=False)
    scenario = ScenarioConfig.from_config(Config(str(path)))
    assert scenario.output.startswith("results/")


def test_example_config_validates(monkeypatch):
    monkeypatch.delenv("HARNESS_WORKERS", raising=False)
    monkeypatch.delenv("HARNESS_LOG_FILE", raising=False)
    scenario = ScenarioConfig.from_config(Config(str(REPO_ROOT / "config.example.yml")))
    assert scenario.scenario == "estimation_sweep"
    assert scenario.logging.file == "logs/harness.log"
