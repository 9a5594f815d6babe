import os
import re
from pathlib import Path
from typing import Any, Dict, Optional

import yaml
from dotenv import load_dotenv

from .errors import ConfigError

ENV_PATTERN = re.compile(r"\$\{([^}]+)}")


class Config:
    """Experiment configuration: a YAML file with ``${VAR}`` references resolved from the environment.

    ``.env`` in the working directory is loaded first, so references may point
    at variables defined there.
    """

    def __init__(self, config_path: str = "config.yml"):
        load_dotenv()

        self.config_path = Path(config_path)
        self._config = self._load_config()

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Config":
        config = cls.__new__(cls)
        config.config_path = None
        config._config = config._substitute_env_vars(dict(data))
        return config

    def _load_config(self) -> Dict[str, Any]:
        if not self.config_path.exists():
            raise ConfigError(f"Config file not found: {self.config_path}")

        try:
            with open(self.config_path, "r", encoding="utf-8") as f:
                config = yaml.safe_load(f)
        except yaml.YAMLError as e:
            raise ConfigError(f"Config file {self.config_path} is not valid YAML: {e}") from e

        if config is None:
            config = {}
        if not isinstance(config, dict):
            raise ConfigError(f"Config file {self.config_path} must contain a mapping at the top level")

        return self._substitute_env_vars(config)

    def _substitute_env_vars(self, config: Any) -> Any:
        if isinstance(config, dict):
            return {k: self._substitute_env_vars(v) for k, v in config.items()}
        elif isinstance(config, list):
            return [self._substitute_env_vars(item) for item in config]
        elif isinstance(config, str):
            result = config
            for var_name in ENV_PATTERN.findall(config):
                result = result.replace(f"${{{var_name}}}", os.getenv(var_name, ""))
            return result
        else:
            return config

    def get(self, key: str, default: Any = None) -> Any:
        keys = key.split(".")
        value = self._config

        for k in keys:
            if isinstance(value, dict):
                value = value.get(k)
                if value is None:
                    return default
            else:
                return default

        return value

    def as_dict(self) -> Dict[str, Any]:
        return dict(self._config)

    @property
    def scenario(self) -> str:
        return self.get("scenario", "estimation_sweep")

    @property
    def seed(self) -> int:
        return self.get("seed", 0)

    @property
    def replications(self) -> int:
        return self.get("replications", 1)

    @property
    def horizon(self) -> int:
        return self.get("horizon", 500)

    @property
    def output(self) -> str:
        return self.get("output", "results/output.csv")

    @property
    def workers(self) -> int:
        workers = os.getenv("HARNESS_WORKERS", "")
        if workers and workers.strip():
            try:
                return int(workers.strip())
            except ValueError:
                raise ConfigError(f"HARNESS_WORKERS must be an integer, got {workers!r}", field="workers")
        return self.get("workers", 1)

    @property
    def plant(self) -> dict:
        return self.get("plant", {})

    @property
    def unmodeled(self) -> dict:
        return self.get("unmodeled", {})

    @property
    def input(self) -> dict:
        return self.get("input", {})

    @property
    def control(self) -> dict:
        return self.get("control", {})

    @property
    def logging_config(self) -> dict:
        return self.get("logging", {})

    @property
    def log_level(self) -> str:
        return self.get("logging.level", "INFO")

    @property
    def log_file(self) -> Optional[str]:
        return os.getenv("HARNESS_LOG_FILE", "") or self.get("logging.file")
