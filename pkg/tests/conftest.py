from pathlib import Path

import numpy as np
import pytest
import yaml

from src.control.riccati import CostMatrices
from src.dynamics.system import LinearSystem, companion_system

ESTIMATION_COEFFS = [0.048, -0.44, 1.2]
REGRET_COEFFS = [1.03, -3.06, 3.03]


@pytest.fixture
def stable_plant() -> LinearSystem:
    """Eigenvalues 0.2, 0.4, 0.6."""
    return companion_system(ESTIMATION_COEFFS)


@pytest.fixture
def regret_plant() -> LinearSystem:
    return companion_system(REGRET_COEFFS)


@pytest.fixture
def regret_costs() -> CostMatrices:
    return CostMatrices.scaled_identity(3, 1, q=10.0, r=1.0)


@pytest.fixture
def scalar_plant() -> LinearSystem:
    return LinearSystem(np.array([[0.5]]), np.array([[1.0]]), 0.0)


@pytest.fixture
def write_config(tmp_path, monkeypatch):
    """Write a YAML mapping into tmp_path and return its path; env overrides are cleared."""
    monkeypatch.delenv("HARNESS_WORKERS", raising=False)
    monkeypatch.delenv("HARNESS_LOG_FILE", raising=False)

    def write(data: dict, name: str = "config.yml") -> Path:
        path = tmp_path / name
        path.write_text(yaml.safe_dump(data), encoding="utf-8")
        return path

    return write
