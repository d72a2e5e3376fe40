"""
Configuration loading

Handles:
- .env defaults via python-dotenv
- Plain `key = value` config files (run configs and dataset configs)
- Typed accessors for lists, grids and booleans
- Shared command settings and the RunConfig used by `evaluate`

Precedence: CLI flag > config file > environment > built-in default.
"""

import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from dotenv import load_dotenv
from pydantic import ValidationError

from ..core.exceptions import ConfigError
from ..models.regression_models import KnnSettings, RunConfig, TreeSettings


DEFAULT_SEED = 20240101
DEFAULT_OUTPUT_DIR = "results"
DEFAULT_N_PERM = 5000

_env_loaded = False


def load_environment(env_file: Optional[str] = None) -> None:
    """Load .env once per process (existing variables are never overridden)"""
    global _env_loaded
    if _env_loaded and env_file is None:
        return
    if env_file:
        load_dotenv(env_file)
    else:
        load_dotenv()
    _env_loaded = True


def env_int(name: str, default: int) -> int:
    value = os.getenv(name)
    if value is None or value.strip() == "":
        return default
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"environment variable {name} must be an integer, got {value!r}")


def env_str(name: str, default: str) -> str:
    value = os.getenv(name)
    return value if value else default


def read_key_value_file(path: Path) -> Dict[str, str]:
    """
    Parse a `key = value` file

    Blank lines and lines starting with # are skipped; inline # comments are
    stripped. Keys are lower-cased. A line without `=` is a ConfigError.
    """

    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")

    entries: Dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as handle:
        for line_number, raw in enumerate(handle, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{line_number}: expected 'key = value', got {raw.strip()!r}")
            key, value = line.split("=", 1)
            entries[key.strip().lower()] = value.strip()
    return entries


def parse_list(value: str) -> List[str]:
    return [item.strip() for item in value.split(",") if item.strip()]


def parse_bool(value: str) -> bool:
    lowered = value.strip().lower()
    if lowered in {"1", "true", "yes", "on"}:
        return True
    if lowered in {"0", "false", "no", "off"}:
        return False
    raise ConfigError(f"expected a boolean, got {value!r}")


def parse_grid(value: str) -> List[float]:
    """
    Parse a hyperparameter grid

    Accepts `0.1,0.2,0.5` or `start:stop:step` (inclusive stop). Values are
    rounded to 10 decimals so 0.1-step grids stay exact multiples.
    """

    value = value.strip()
    if ":" in value:
        parts = value.split(":")
        if len(parts) != 3:
            raise ConfigError(f"grid range must be start:stop:step, got {value!r}")
        try:
            start, stop, step = (float(p) for p in parts)
        except ValueError:
            raise ConfigError(f"non-numeric grid range {value!r}")
        return decimal_grid(start, stop, step)

    try:
        return [round(float(item), 10) for item in parse_list(value)]
    except ValueError:
        raise ConfigError(f"non-numeric grid value in {value!r}")


def decimal_grid(start: float, stop: float, step: float) -> List[float]:
    """Inclusive arithmetic grid computed by index, not by repeated addition"""
    if step <= 0:
        raise ConfigError(f"grid step must be positive, got {step}")
    count = int(round((stop - start) / step)) + 1
    grid = [round(start + i * step, 10) for i in range(max(count, 0))]
    return [g for g in grid if g <= stop + 1e-9]


# Command settings

@dataclass(frozen=True)
class CommandSettings:
    """Values every subcommand shares, resolved once per invocation"""
    seed: int
    output_dir: Path
    workers: int
    n_perm: int
    entries: Dict[str, str] = field(default_factory=dict)
    config_dir: Optional[Path] = None


def _int_entry(entries: Dict[str, str], key: str) -> Optional[int]:
    if key not in entries or entries[key] == "":
        return None
    try:
        return int(entries[key])
    except ValueError:
        raise ConfigError(f"config key {key} must be an integer, got {entries[key]!r}")


def _first(*values):
    for value in values:
        if value is not None:
            return value
    return None


def resolve_settings(
    seed: Optional[int] = None,
    output_dir: Optional[str] = None,
    workers: Optional[int] = None,
    n_perm: Optional[int] = None,
    config_path: Optional[str] = None,
) -> CommandSettings:
    """Apply CLI flag > config file > environment > default to the shared settings"""
    load_environment()
    entries = read_key_value_file(Path(config_path)) if config_path else {}

    settings = CommandSettings(
        seed=_first(seed, _int_entry(entries, "seed"), env_int("AMR_SEED", DEFAULT_SEED)),
        output_dir=Path(_first(output_dir, entries.get("output_dir") or None,
                               env_str("AMR_OUTPUT_DIR", DEFAULT_OUTPUT_DIR))),
        workers=_first(workers, _int_entry(entries, "workers"), env_int("AMR_WORKERS", 1)),
        n_perm=_first(n_perm, _int_entry(entries, "n_perm"), env_int("AMR_N_PERM", DEFAULT_N_PERM)),
        entries=entries,
        config_dir=Path(config_path).parent if config_path else None,
    )
    if settings.workers < 1:
        raise ConfigError(f"workers must be >= 1, got {settings.workers}")
    if settings.n_perm < 1:
        raise ConfigError(f"n_perm must be >= 1, got {settings.n_perm}")
    return settings


# Run configuration

RUN_CONFIG_KEYS = {
    "datasets", "algorithms", "alpha_grid", "delta_grid", "n_perm", "seed", "output_dir",
    "knn_k", "knn_metric", "tree_max_depth", "tree_min_leaf", "workers",
    "literal_sum", "literal_index_divisor", "max_features", "external",
}
DEFAULT_ALGORITHMS = ["amr", "knn", "lr", "dt"]


def parse_assignments(items: Sequence[str]) -> Dict[str, str]:
    """`id=path` pairs (used for external prediction files)"""
    pairs: Dict[str, str] = {}
    for item in items:
        if "=" not in item:
            raise ConfigError(f"expected id=path, got {item!r}")
        key, value = item.split("=", 1)
        if not key.strip() or not value.strip():
            raise ConfigError(f"expected id=path, got {item!r}")
        pairs[key.strip()] = value.strip()
    return pairs


def resolve_dataset_reference(reference: str, config_dir: Optional[Path] = None) -> str:
    """
    Locate a dataset entry: an existing path, a path relative to the run
    config, or a bare name under datasets/ (`<name>.conf`)
    """

    candidates = [Path(reference)]
    if config_dir is not None:
        candidates.append(config_dir / reference)
        candidates.append(config_dir / f"{reference}.conf")
    candidates.append(Path("datasets") / f"{reference}.conf")

    for candidate in candidates:
        if candidate.is_file():
            return str(candidate)
    return reference


def load_run_config(settings: CommandSettings, overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
    """
    Build the RunConfig for `evaluate`

    Shared values come from settings (already resolved); the remaining keys
    follow config file > built-in default, with overrides (CLI flags, None
    meaning "not given") on top.
    """

    entries = settings.entries
    unknown = sorted(set(entries) - RUN_CONFIG_KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")

    values: Dict[str, Any] = {
        "seed": settings.seed,
        "output_dir": str(settings.output_dir),
        "workers": settings.workers,
        "n_perm": settings.n_perm,
        "algorithms": list(DEFAULT_ALGORITHMS),
        "alpha_grid": decimal_grid(0.1, 1.0, 0.1),
        "delta_grid": decimal_grid(1.0, 10.0, 0.1),
    }
    knn: Dict[str, Any] = {}
    tree: Dict[str, Any] = {}

    if "datasets" in entries:
        values["datasets"] = parse_list(entries["datasets"])
    if "algorithms" in entries:
        values["algorithms"] = parse_list(entries["algorithms"])
    for key in ("alpha_grid", "delta_grid"):
        if key in entries:
            values[key] = parse_grid(entries[key])
    for key in ("literal_sum", "literal_index_divisor"):
        if key in entries:
            values[key] = parse_bool(entries[key])
    if "max_features" in entries:
        values["max_features"] = _int_entry(entries, "max_features")
    if "external" in entries:
        values["external"] = parse_assignments(parse_list(entries["external"]))
    if entries.get("knn_k") and entries["knn_k"].lower() != "auto":
        knn["k"] = _int_entry(entries, "knn_k")
    if "knn_metric" in entries:
        knn["metric"] = entries["knn_metric"].lower()
    if "tree_max_depth" in entries:
        tree["max_depth"] = _int_entry(entries, "tree_max_depth")
    if "tree_min_leaf" in entries:
        tree["min_leaf"] = _int_entry(entries, "tree_min_leaf")

    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key in ("knn_k", "knn_metric"):
            knn[key[4:]] = value
        elif key == "external":
            values["external"] = {**values.get("external", {}), **value}
        else:
            values[key] = value

    values["datasets"] = [resolve_dataset_reference(d, settings.config_dir) for d in values.get("datasets", [])]

    try:
        return RunConfig(**values, knn=KnnSettings(**knn), tree=TreeSettings(**tree))
    except ValidationError as error:
        raise ConfigError(f"invalid run configuration: {error}")
