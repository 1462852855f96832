"""Run configuration shared by the CLI and the acceptance suite."""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    tolerance: float = 1e-9
    witness_height: int = 50
    oracle_bound: int = 6
    seed: int = 20240607
    output: Optional[str] = None

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ConfigError("tolerance must be positive")
        if self.witness_height < 1:
            raise ConfigError("witness_height must be at least 1")
        if self.oracle_bound < 1:
            raise ConfigError("oracle_bound must be at least 1")

    def updated(self, **overrides) -> "RunConfig":
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})


def load_config(path: str | Path) -> RunConfig:
    """Read a TOML or JSON file with any subset of the RunConfig fields."""
    path = Path(path)
    text = path.read_text()
    try:
        if path.suffix == ".json":
            data = json.loads(text)
        else:
            data = tomllib.loads(text)
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    known = {f.name for f in fields(RunConfig)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return RunConfig(**data)
