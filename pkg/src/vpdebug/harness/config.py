"""Settings file for the command line.

The file is JSON with any subset of these sections::

    {
      "endpoints": {"model": "http://...", "critic": "http://...", "refiner": "http://..."},
      "budgets":   {"feedback_tokens": 1024, "step_limit": 10000, "max_tokens": 64,
                    "timeout": 30.0, "retries": 0},
      "seeds":     {"inject": 0},
      "inject":    {"mode": "mask-best", "th": 0.9, "max_masked": 1, "attempts": 5},
      "debug":     {"threshold": 0.5, "max_steps": 3, "containment": "strict"}
    }

The environment variables ``VPDEBUG_MODEL_ENDPOINT``, ``VPDEBUG_CRITIC_ENDPOINT``
and ``VPDEBUG_REFINER_ENDPOINT`` override the endpoints. No other setting
is read from the environment.
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Mapping, Optional, Union

ENDPOINT_ENV = {
    "model": "VPDEBUG_MODEL_ENDPOINT",
    "critic": "VPDEBUG_CRITIC_ENDPOINT",
    "refiner": "VPDEBUG_REFINER_ENDPOINT",
}


@dataclass
class Endpoints:
    model: Optional[str] = None
    critic: Optional[str] = None
    refiner: Optional[str] = None


@dataclass
class Budgets:
    feedback_tokens: int = 1024
    step_limit: int = 10000
    max_tokens: int = 64
    timeout: float = 30.0
    retries: int = 0


@dataclass
class Seeds:
    inject: int = 0


@dataclass
class InjectSettings:
    mode: str = "mask-best"
    th: float = 0.9
    max_masked: int = 1
    attempts: int = 5


@dataclass
class DebugSettings:
    threshold: float = 0.5
    max_steps: int = 3
    containment: str = "strict"


@dataclass
class Config:
    endpoints: Endpoints = field(default_factory=Endpoints)
    budgets: Budgets = field(default_factory=Budgets)
    seeds: Seeds = field(default_factory=Seeds)
    inject: InjectSettings = field(default_factory=InjectSettings)
    debug: DebugSettings = field(default_factory=DebugSettings)

    def to_dict(self) -> dict:
        return asdict(self)


def _section(cls, data: Mapping, name: str):
    if not isinstance(data, Mapping):
        raise ValueError(f"config section {name!r} must be an object")
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown keys in config section {name!r}: {sorted(unknown)}")
    return cls(**data)


def load_config(path: Optional[Union[str, Path]] = None, environ: Optional[Mapping[str, str]] = None) -> Config:
    """Defaults, overlaid with the file at ``path``, then endpoint env vars."""
    data = json.loads(Path(path).read_text(encoding="utf-8")) if path else {}
    if not isinstance(data, dict):
        raise ValueError("config file must hold a JSON object")
    classes = {"endpoints": Endpoints, "budgets": Budgets, "seeds": Seeds, "inject": InjectSettings, "debug": DebugSettings}
    unknown = set(data) - set(classes)
    if unknown:
        raise ValueError(f"unknown config sections: {sorted(unknown)}")
    cfg = Config(**{name: _section(cls, data.get(name, {}), name) for name, cls in classes.items()})
    env = os.environ if environ is None else environ
    for key, var in ENDPOINT_ENV.items():
        if env.get(var):
            setattr(cfg.endpoints, key, env[var])
    return cfg
