"""Locations of the bundled fixtures and JSONL loaders."""

from __future__ import annotations

from importlib import resources
from pathlib import Path
from typing import Union

from vpdebug.inject.records import DatasetRecord, PoolEntry, loads_jsonl
from vpdebug.world.scene import SceneStore


def data_dir() -> Path:
    return Path(str(resources.files("vpdebug.data")))


def scene_dir() -> Path:
    return data_dir() / "scenes"


def default_store() -> SceneStore:
    return SceneStore(scene_dir())


def pool_correct_path() -> Path:
    return data_dir() / "corpus" / "pool_correct.jsonl"


def pool_incorrect_path() -> Path:
    return data_dir() / "corpus" / "pool_natural_incorrect.jsonl"


def golden_program_path() -> Path:
    return data_dir() / "golden" / "fig_trace.program.py"


def golden_feedback_path() -> Path:
    return data_dir() / "golden" / "fig_trace.feedback.txt"


GOLDEN_SCENE_ID = "fig_trace"


def load_pool(path: Union[str, Path]) -> list[PoolEntry]:
    rows = loads_jsonl(Path(path).read_text(encoding="utf-8"))
    return [PoolEntry.from_dict(d, i) for i, d in enumerate(rows)]


def load_records(path: Union[str, Path]) -> list[DatasetRecord]:
    return [DatasetRecord.from_dict(d) for d in loads_jsonl(Path(path).read_text(encoding="utf-8"))]
