"""Flat key/value configuration files and ``key=value`` overrides.

Files are YAML mappings with scalar values, e.g.::

    users: 20
    days: 50
    agents: [Ignorant, Omniscient]
"""

from __future__ import annotations

from dataclasses import replace
from pathlib import Path
from typing import Any, Iterable

import yaml

from .agents import AgentKind
from .environment import EnvConfig
from .simulator import ExperimentConfig


class ConfigError(ValueError):
    """Bad configuration key or value."""


ALIASES = {
    "users": "num_users",
    "seed": "master_seed",
    "agents": "agent_kinds",
    "videos": "videos_per_day",
    "scenario": "scenario_name",
}

_ENV_KEYS = {"videos_per_day", "days", "timeline_segments", "master_seed"}
_POSITIVE_INTS = {"videos_per_day", "days", "timeline_segments", "num_users", "particles", "smoothing_window"}
_BOOLS = {"regenerate_particles_daily", "aligned_expected_utility"}
KNOWN_KEYS = _ENV_KEYS | _POSITIVE_INTS | _BOOLS | {"agent_kinds", "scenario_name"}


def _coerce(key: str, value: Any) -> Any:
    if key in _POSITIVE_INTS:
        if isinstance(value, bool) or not isinstance(value, int) or value < 1:
            raise ConfigError(f"{key}={value!r} is out of range: expected an integer >= 1")
        return value
    if key == "master_seed":
        if isinstance(value, bool) or not isinstance(value, int) or not 0 <= value < 2**64:
            raise ConfigError(f"{key}={value!r} is out of range: expected an integer in [0, 2**64)")
        return value
    if key in _BOOLS:
        if not isinstance(value, bool):
            raise ConfigError(f"{key}={value!r} is out of range: expected true or false")
        return value
    if key == "agent_kinds":
        names = value.split(",") if isinstance(value, str) else value
        if not isinstance(names, (list, tuple)) or not names:
            raise ConfigError(f"{key}={value!r} is out of range: expected a non-empty list of agent kinds")
        try:
            kinds = tuple(AgentKind.parse(str(n)) for n in names)
        except ValueError as exc:
            raise ConfigError(f"{key}={value!r}: {exc}") from None
        if len(set(kinds)) != len(kinds):
            raise ConfigError(f"{key}={value!r} is out of range: agent kinds must not repeat")
        return kinds
    if key == "scenario_name":
        return str(value)
    raise ConfigError(f"unknown configuration key {key!r}")


def _canonical(key: str) -> str:
    key = key.strip()
    key = ALIASES.get(key, key)
    if key not in KNOWN_KEYS:
        raise ConfigError(f"unknown configuration key {key!r}; known keys: {', '.join(sorted(KNOWN_KEYS))}")
    return key


def apply_settings(cfg: ExperimentConfig, settings: dict[str, Any]) -> ExperimentConfig:
    """Return ``cfg`` with validated ``settings`` applied."""
    env_changes, top_changes = {}, {}
    for raw_key, value in settings.items():
        key = _canonical(str(raw_key))
        value = _coerce(key, value)
        (env_changes if key in _ENV_KEYS else top_changes)[key] = value
    env = replace(cfg.env, **env_changes) if env_changes else cfg.env
    return replace(cfg, env=env, **top_changes)


def load_config_file(path: str | Path) -> dict[str, Any]:
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: not a well-formed key/value file: {exc}") from None
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a flat mapping of key: value pairs")
    for key, value in data.items():
        if isinstance(value, dict):
            raise ConfigError(f"{path}: key {key!r} must hold a scalar or list, not a nested mapping")
    return data


def parse_override(item: str) -> tuple[str, Any]:
    key, sep, raw = item.partition("=")
    if not sep or not key.strip():
        raise ConfigError(f"override {item!r} must look like key=value")
    try:
        value = yaml.safe_load(raw) if raw.strip() else ""
    except yaml.YAMLError:
        value = raw
    return key.strip(), value


def parse_config(
    path: str | Path | None = None,
    overrides: Iterable[str] = (),
    base: ExperimentConfig | None = None,
) -> ExperimentConfig:
    """Build a config from defaults (or ``base``), then the file, then overrides."""
    cfg = base if base is not None else ExperimentConfig(env=EnvConfig())
    if path is not None:
        cfg = apply_settings(cfg, load_config_file(path))
    pairs = dict(parse_override(o) for o in overrides)
    return apply_settings(cfg, pairs) if pairs else cfg
