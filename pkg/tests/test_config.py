import logging

import pytest
from pythonjsonlogger import jsonlogger

from amr_toolkit.core.exceptions import ConfigError
from amr_toolkit.utils import config as config_module
from amr_toolkit.utils.config import (
    DEFAULT_SEED,
    decimal_grid,
    load_run_config,
    parse_assignments,
    parse_bool,
    parse_grid,
    read_key_value_file,
    resolve_settings,
)
from amr_toolkit.utils.logging_config import PACKAGE_LOGGER, configure_logging

from .helpers import DATASETS_DIR


@pytest.fixture
def clean_env(monkeypatch):
    """No AMR_* variables and no .env loading"""
    monkeypatch.setattr(config_module, "_env_loaded", True)
    for name in ("AMR_SEED", "AMR_OUTPUT_DIR", "AMR_WORKERS", "AMR_N_PERM"):
        monkeypatch.delenv(name, raising=False)
    return monkeypatch


class TestGrids:
    def test_range_is_inclusive_and_exact(self):
        grid = parse_grid("0.1:1.0:0.1")
        assert len(grid) == 10
        assert grid[2] == 0.3
        assert grid[-1] == 1.0

    def test_default_delta_grid(self):
        grid = decimal_grid(1.0, 10.0, 0.1)
        assert len(grid) == 91
        assert grid[0] == 1.0 and grid[-1] == 10.0

    def test_explicit_list(self):
        assert parse_grid("1, 2.5,10") == [1.0, 2.5, 10.0]

    def test_bad_grids(self):
        for text in ("a:b:c", "1:2", "1,x"):
            with pytest.raises(ConfigError):
                parse_grid(text)
        with pytest.raises(ConfigError):
            decimal_grid(1.0, 2.0, 0.0)


class TestValues:
    def test_booleans(self):
        assert parse_bool("Yes") and parse_bool("1") and parse_bool("on")
        assert not parse_bool("false")
        with pytest.raises(ConfigError):
            parse_bool("maybe")

    def test_assignments(self):
        assert parse_assignments(["svr=a.csv", " rf = b.csv "]) == {"svr": "a.csv", "rf": "b.csv"}
        with pytest.raises(ConfigError):
            parse_assignments(["svr"])
        with pytest.raises(ConfigError):
            parse_assignments(["=a.csv"])

    def test_key_value_file(self, write_file):
        path = write_file("run.conf", "# comment\nSeed = 5  # inline\n\nalgorithms = amr, knn\n")
        assert read_key_value_file(path) == {"seed": "5", "algorithms": "amr, knn"}

    def test_line_without_equals(self, write_file):
        with pytest.raises(ConfigError):
            read_key_value_file(write_file("run.conf", "seed 5\n"))

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            read_key_value_file(tmp_path / "absent.conf")


class TestSettings:
    def test_defaults(self, clean_env):
        settings = resolve_settings()
        assert settings.seed == DEFAULT_SEED
        assert settings.workers == 1
        assert settings.n_perm == 5000
        assert str(settings.output_dir) == "results"

    def test_precedence(self, clean_env, write_file):
        clean_env.setenv("AMR_SEED", "7")
        clean_env.setenv("AMR_N_PERM", "300")
        assert resolve_settings().seed == 7

        path = write_file("run.conf", "seed = 9\n")
        from_file = resolve_settings(config_path=str(path))
        assert from_file.seed == 9
        assert from_file.n_perm == 300
        assert resolve_settings(seed=11, config_path=str(path)).seed == 11

    def test_bad_environment_value(self, clean_env):
        clean_env.setenv("AMR_WORKERS", "many")
        with pytest.raises(ConfigError):
            resolve_settings()

    def test_workers_must_be_positive(self, clean_env):
        with pytest.raises(ConfigError):
            resolve_settings(workers=0)


class TestRunConfig:
    def test_example_config(self, clean_env):
        path = DATASETS_DIR / "example_run.conf"
        config = load_run_config(resolve_settings(config_path=str(path)))
        assert config.algorithms == ["amr", "knn", "lr", "dt"]
        assert len(config.alpha_grid) == 10
        assert len(config.delta_grid) == 19
        assert config.knn.k is None
        assert config.tree.max_depth == 8
        assert config.datasets[0].endswith("sample.conf")

    def test_builtin_grids(self, clean_env):
        config = load_run_config(resolve_settings())
        assert len(config.alpha_grid) == 10
        assert len(config.delta_grid) == 91
        assert config.algorithms == ["amr", "knn", "lr", "dt"]

    def test_overrides_win(self, clean_env):
        path = DATASETS_DIR / "example_run.conf"
        config = load_run_config(
            resolve_settings(config_path=str(path)),
            {"algorithms": ["amr"], "knn_k": 3, "literal_sum": True, "delta_grid": None},
        )
        assert config.algorithms == ["amr"]
        assert config.knn.k == 3
        assert config.literal_sum
        assert len(config.delta_grid) == 19

    def test_unknown_key(self, clean_env, write_file):
        path = write_file("run.conf", "colour = blue\n")
        with pytest.raises(ConfigError):
            load_run_config(resolve_settings(config_path=str(path)))

    def test_alpha_outside_interval(self, clean_env):
        with pytest.raises(ConfigError):
            load_run_config(resolve_settings(), {"alpha_grid": [0.0, 0.5]})


class TestLogging:
    def test_json_format(self):
        logger = configure_logging("debug", "json")
        assert logger.name == PACKAGE_LOGGER
        assert logger.level == logging.DEBUG
        assert len(logger.handlers) == 1
        assert isinstance(logger.handlers[0].formatter, jsonlogger.JsonFormatter)

    def test_reconfiguring_replaces_handler(self):
        configure_logging("info", "text")
        logger = configure_logging("warning", "text")
        assert len(logger.handlers) == 1
        assert logger.level == logging.WARNING
        assert not isinstance(logger.handlers[0].formatter, jsonlogger.JsonFormatter)
