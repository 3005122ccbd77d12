"""Settings shared by the CLI tools: file values overridden by GW_* env vars.

Config files are JSON objects keyed like the Settings fields; every value
can also come from the environment (GW_BUDGET, GW_SPLIT, GW_TRIGGERS, ...).
Command-line flags take precedence over both.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, fields
from typing import Optional

from .tokenization import DEFAULT_TRIGGER_CHARACTERS

ENV_PREFIX = "GW_"


@dataclass
class Settings:
    triggers: tuple = DEFAULT_TRIGGER_CHARACTERS
    budget: int = 2048
    split: float = 0.7
    max_target_tokens: int = 100
    metadata_fields: tuple = ("language", "path", "kernel")
    beam_threshold: int = 1500
    beam_width: int = 3
    max_new_tokens: int = 100
    deadline_ms: int = 1000
    bind: str = "127.0.0.1:8777"
    service_url: str = "http://127.0.0.1:8777"
    debounce_ms: int = 20
    cache_capacity: int = 512
    min_display_ms: int = 750


def _coerce(name: str, value, target_type):
    if target_type is int:
        return int(value)
    if target_type is float:
        return float(value)
    if target_type is tuple:
        if isinstance(value, (list, tuple)):
            return tuple(value)
        if name == "triggers":
            return tuple(str(value))
        return tuple(part.strip() for part in str(value).split(",") if part.strip())
    return str(value)


def load_settings(config_path: Optional[str] = None, env=None) -> Settings:
    env = os.environ if env is None else env
    settings = Settings()
    file_values = {}
    if config_path:
        with open(config_path, encoding="utf-8") as fh:
            file_values = json.load(fh)
    for field_def in fields(Settings):
        name = field_def.name
        target_type = type(getattr(settings, name))
        if name in file_values:
            setattr(settings, name, _coerce(name, file_values[name], target_type))
        env_key = ENV_PREFIX + name.upper()
        if env_key in env:
            setattr(settings, name, _coerce(name, env[env_key], target_type))
    return settings


def parse_bind(bind: str) -> tuple[str, int]:
    host, _, port = bind.rpartition(":")
    return host or "127.0.0.1", int(port)
