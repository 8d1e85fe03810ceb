"""Shared TOML configuration for the CLI and the HTTP service.

Precedence: explicit overrides (flags) > environment > config file >
defaults. LLM settings nest under [llm] in the file and map onto the
MUSE_LLM_* environment variables the backend also honours.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Dict, Mapping, Optional, Union

try:
    import tomllib
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

DEFAULT_PORT = 8765
DEFAULT_UPLOAD_CAP_MB = 50
DEFAULT_TEMPO_BPM = 120.0

_ENV_NAMES = {
    "port": "MUSE_PORT",
    "library_path": "MUSE_LIBRARY_PATH",
    "session_root": "MUSE_SESSION_ROOT",
    "tempo_bpm": "MUSE_TEMPO_BPM",
    "cors_origin": "MUSE_CORS_ORIGIN",
    "max_upload_mb": "MUSE_MAX_UPLOAD_MB",
    "llm_url": "MUSE_LLM_URL",
    "llm_key": "MUSE_LLM_KEY",
    "llm_model": "MUSE_LLM_MODEL",
    "llm_timeout": "MUSE_LLM_TIMEOUT",
}


@dataclass(frozen=True)
class AppConfig:
    port: int = DEFAULT_PORT
    library_path: Optional[str] = None
    session_root: str = "."
    tempo_bpm: float = DEFAULT_TEMPO_BPM
    cors_origin: str = "*"
    max_upload_mb: int = DEFAULT_UPLOAD_CAP_MB
    llm_url: str = ""
    llm_key: str = ""
    llm_model: str = ""
    llm_timeout: float = 60.0


_FIELD_TYPES = {f.name: f.type for f in fields(AppConfig)}


def _coerce(name: str, value) -> object:
    if value is None:
        return None
    if name in ("port", "max_upload_mb"):
        return int(value)
    if name in ("tempo_bpm", "llm_timeout"):
        return float(value)
    return str(value)


def _from_file(path: Union[str, Path]) -> Dict[str, object]:
    with open(path, "rb") as handle:
        raw = tomllib.load(handle)
    values: Dict[str, object] = {}
    for key, value in raw.items():
        if key == "llm" and isinstance(value, dict):
            for sub, subval in value.items():
                name = f"llm_{sub}"
                if name in _FIELD_TYPES:
                    values[name] = subval
        elif key in _FIELD_TYPES:
            values[key] = value
    return values


def load_config(path: Optional[Union[str, Path]] = None,
                env: Optional[Mapping[str, str]] = None,
                overrides: Optional[Mapping[str, object]] = None
                ) -> AppConfig:
    """Merge defaults, config file, environment and explicit overrides."""
    env = os.environ if env is None else env
    merged: Dict[str, object] = {}
    if path is not None:
        merged.update(_from_file(path))
    for name, env_name in _ENV_NAMES.items():
        if env_name in env:
            merged[name] = env[env_name]
    if overrides:
        for name, value in overrides.items():
            if name in _FIELD_TYPES and value is not None:
                merged[name] = value
    coerced = {name: _coerce(name, value) for name, value in merged.items()}
    return replace(AppConfig(), **coerced)
