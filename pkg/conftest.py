"""
pytest 公共夹具
"""
import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parent
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from core.config_manager import ConfigManager  # noqa: E402


@pytest.fixture(scope="session")
def config_manager():
    return ConfigManager(ROOT / "config")


@pytest.fixture(scope="session")
def catalog(config_manager):
    return config_manager.load_catalog()


@pytest.fixture(scope="session")
def phonon_data(config_manager):
    return config_manager.load_phonon_modes()


@pytest.fixture
def run_config(config_manager, tmp_path):
    return config_manager.load_run_config(out_dir=tmp_path / "out")
