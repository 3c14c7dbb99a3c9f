import shutil

import pytest
import yaml

from core.config_manager import ConfigManager
from core.exceptions import ConfigError


@pytest.fixture
def config_copy(tmp_path, config_manager):
    """复制一份 config 目录，便于逐项篡改"""
    target = tmp_path / "config"
    shutil.copytree(config_manager.config_dir, target)
    return target


def rewrite(path, mutate):
    with open(path, 'r', encoding='utf-8') as f:
        data = yaml.safe_load(f)
    mutate(data)
    with open(path, 'w', encoding='utf-8') as f:
        yaml.safe_dump(data, f, allow_unicode=True)


def test_defaults(run_config):
    assert run_config.mode == "det"
    assert run_config.max_concurrent == 4
    assert run_config.worst_case is False
    assert run_config.catalog_path.name == "catalog.json"
    assert run_config.sweep_axis("nodes")[:3] == [1, 2, 3]


def test_cli_overrides(config_manager, tmp_path):
    config = config_manager.load_run_config(seed=5, mode="stoch", out_dir=tmp_path, worst_case=True)
    assert (config.seed, config.mode, config.out_dir, config.worst_case) == (5, "stoch", tmp_path, True)


def test_fingerprint_stable(config_manager, tmp_path):
    a = config_manager.load_run_config(out_dir=tmp_path / "a")
    b = config_manager.load_run_config(out_dir=tmp_path / "b")
    assert a.fingerprint(x=1) == b.fingerprint(x=1)
    assert a.fingerprint(x=1) != a.fingerprint(x=2)
    assert len(a.fingerprint()) == 64


def test_fingerprint_follows_seed(config_manager):
    assert (config_manager.load_run_config(seed=1).fingerprint()
            != config_manager.load_run_config(seed=2).fingerprint())


def test_missing_file(config_manager, tmp_path):
    with pytest.raises(ConfigError):
        config_manager.load_run_config(tmp_path / "nope.yaml")


def test_malformed_yaml(tmp_path, config_manager):
    path = tmp_path / "bad.yaml"
    path.write_text("run: [unclosed\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        config_manager.load_run_config(path)


def test_non_mapping_yaml(tmp_path, config_manager):
    path = tmp_path / "list.yaml"
    path.write_text("- 1\n- 2\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        config_manager.load_run_config(path)


@pytest.mark.parametrize("mutate", [
    lambda d: d["run"].update(mode="fast"),
    lambda d: d["run"].update(max_concurrent=0),
    lambda d: d["sweep"].update(nodes=[]),
    lambda d: d["sweep"]["pump_nm"].update(step=0),
    lambda d: d["paths"].update(catalog="missing.json"),
])
def test_invalid_run_config(config_copy, mutate):
    path = config_copy / "simulation.yaml"
    rewrite(path, mutate)
    with pytest.raises(ConfigError):
        ConfigManager(config_copy).load_run_config(path)


def test_relative_paths_follow_config_file(config_copy):
    config = ConfigManager(config_copy).load_run_config(config_copy / "simulation.yaml")
    assert config.catalog_path == (config_copy / "catalog.json").resolve()


def test_phonon_file_needs_modes(config_copy):
    (config_copy / "phonon_modes.json").write_text('{"modes": []}', encoding="utf-8")
    with pytest.raises(ConfigError):
        ConfigManager(config_copy).load_phonon_modes()


def test_broken_json(config_copy):
    (config_copy / "catalog.json").write_text("{", encoding="utf-8")
    with pytest.raises(ConfigError):
        ConfigManager(config_copy).load_catalog()


def test_load_job_formats(tmp_path, config_manager):
    (tmp_path / "job.yaml").write_text("demands:\n  - {qpus: [0, 1], pairs: 5}\n", encoding="utf-8")
    (tmp_path / "job.json").write_text('{"demands": [{"qpus": [0, 1], "pairs": 5}]}', encoding="utf-8")
    assert config_manager.load_job(tmp_path / "job.yaml") == config_manager.load_job(tmp_path / "job.json")
