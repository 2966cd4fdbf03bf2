"""Training-data statistics: pool sizes and injection error rates per mode."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional, Union

from vpdebug.inject.pipeline import MODES, error_rate
from vpdebug.inject.records import loads_jsonl


@dataclass(frozen=True)
class StatsRow:
    """One dataset: natural incorrect and correct pool sizes, and how many
    correct programs received an injected error under each mode."""

    name: str
    n_incorrect_natural: int
    n_correct: int
    injected: Mapping[str, int] = field(default_factory=dict)

    def rate(self, mode: str) -> float:
        if self.n_correct == 0:
            return 0.0
        return error_rate(self.injected.get(mode, 0), self.n_correct)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "n_incorrect_natural": self.n_incorrect_natural,
            "n_correct": self.n_correct,
            "injected": dict(self.injected),
            "error_rate": {m: self.rate(m) for m in self.injected},
        }


def render_table(rows: list[StatsRow], modes=MODES) -> str:
    head = ["dataset", "natural_incorrect", "correct"]
    for m in modes:
        head += [f"injected[{m}]", f"rate[{m}]"]
    lines = ["\t".join(head)]
    for r in rows:
        cells = [r.name, str(r.n_incorrect_natural), str(r.n_correct)]
        for m in modes:
            cells += [str(r.injected.get(m, 0)), f"{r.rate(m):.1f}"]
        lines.append("\t".join(cells))
    return "\n".join(lines) + "\n"


def _count_jsonl(path: Optional[Union[str, Path]]) -> int:
    if path is None or not Path(path).exists():
        return 0
    return len(loads_jsonl(Path(path).read_text(encoding="utf-8")))


def dataset_stats(
    name: str,
    pool_correct: Union[str, Path],
    pool_incorrect: Optional[Union[str, Path]] = None,
    records: Optional[Mapping[str, Union[str, Path]]] = None,
) -> StatsRow:
    """Count pool and record files. ``records`` maps a mode to a DatasetRecord JSONL."""
    injected = {mode: _count_jsonl(path) for mode, path in (records or {}).items()}
    return StatsRow(name, _count_jsonl(pool_incorrect), _count_jsonl(pool_correct), injected)
