"""
Shared fixtures for all tests.

Handles isolation of singleton instances (configuration, catalog cache) and
provides the catalog algebras and metrics most tests run against.
"""

import os
import sys
from pathlib import Path
from typing import Any

import numpy as np
import pytest
import yaml

# Add the project root to the Python path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from deforge.constants import ENV_PREFIX  # noqa: E402
from deforge.scalars import EXACT, FloatField  # noqa: E402

# =============================================================================
# Singleton Reset Fixtures
# =============================================================================


@pytest.fixture(autouse=True)
def reset_singletons():
    """Start and finish every test with no cached Config or catalog."""
    from deforge.utils.singleton import SingletonMeta

    SingletonMeta.reset_all()
    yield
    SingletonMeta.reset_all()


@pytest.fixture
def clean_environment(monkeypatch):
    """Drop every DEFORGE_* override for the duration of a test."""
    for key in [k for k in os.environ if k.startswith(ENV_PREFIX)]:
        monkeypatch.delenv(key)
    return monkeypatch


# =============================================================================
# Configuration Fixtures
# =============================================================================


@pytest.fixture
def sample_config() -> dict[str, Any]:
    """Provide a sample configuration dictionary."""
    return {
        "general": {"log_level": "WARNING", "log_file": None},
        "engine": {"backend": "exact", "tolerance": 1e-9, "threads": 1},
        "positivity": {"samples": 300, "margin": 1e-9, "refine_rounds": 2, "extremal_retries": 5},
        "fuzz": {"cases": 20},
        "report": {"indent": 2},
    }


@pytest.fixture
def temp_config_file(sample_config: dict[str, Any], tmp_path: Path) -> Path:
    """Write sample_config to a config.yaml under tmp_path."""
    path = tmp_path / "config.yaml"
    path.write_text(yaml.safe_dump(sample_config), encoding="utf-8")
    return path


# =============================================================================
# Scalar and Catalog Fixtures
# =============================================================================


@pytest.fixture
def exact():
    return EXACT


@pytest.fixture
def floats():
    return FloatField(1e-9)


@pytest.fixture
def rng() -> np.random.Generator:
    """Deterministic generator for randomized inputs."""
    return np.random.default_rng(2024)


@pytest.fixture
def torus3():
    from deforge.catalog.builtin import builtin

    return builtin("torus_3").algebra


@pytest.fixture
def iwasawa():
    from deforge.catalog.builtin import builtin

    return builtin("iwasawa").algebra


@pytest.fixture
def abelian_i0():
    from deforge.catalog.builtin import builtin

    return builtin("abelian_I0").algebra


@pytest.fixture
def category_iii():
    from deforge.catalog.builtin import builtin

    return builtin("category_iii").algebra


@pytest.fixture
def iwasawa_text() -> str:
    """Structure-constant file of the Iwasawa manifold."""
    return "# Iwasawa manifold\nname=iwasawa\nn=3\nd w1 = 0\nd w2 = 0\nd w3 = w1^w2\n"
