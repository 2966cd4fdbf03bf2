"""Scene-graph fixtures: the deterministic stand-in for images and VLM answers."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Union


def _norm_question(q: str) -> str:
    return " ".join(q.strip().lower().split())


@dataclass(frozen=True, eq=False)
class SceneObject:
    name: str
    box: tuple  # (left, lower, right, upper), origin bottom-left
    synonyms: tuple[str, ...] = ()
    attributes: dict = field(default_factory=dict)
    depth: float = 0.0
    qa: dict = field(default_factory=dict)
    # questions whose qa answer is deliberately wrong (simulated perception error)
    faulty_qa: tuple[str, ...] = ()

    def __post_init__(self):
        left, lower, right, upper = self.box
        if not (left < right and lower < upper):
            raise ValueError(f"object {self.name!r}: box {self.box} is degenerate")
        if self.name != self.name.lower() or any(s != s.lower() for s in self.synonyms):
            raise ValueError(f"object {self.name!r}: names and synonyms must be lowercase")

    @property
    def center(self) -> tuple[float, float]:
        left, lower, right, upper = self.box
        return (left + right) / 2, (lower + upper) / 2

    def names(self) -> set[str]:
        return {self.name, *self.synonyms}

    def terms(self) -> set[str]:
        """Words this object answers to: names plus true attributes."""
        out = set()
        for s in self.names():
            out.update(s.split())
        out.update(k.lower() for k, v in self.attributes.items() if v)
        return out

    def answer(self, question: str):
        q = _norm_question(question)
        for k, v in self.qa.items():
            if _norm_question(k) == q:
                return v, any(_norm_question(f) == q for f in self.faulty_qa)
        return None, False

    def to_dict(self) -> dict:
        d = {
            "name": self.name,
            "synonyms": list(self.synonyms),
            "box": list(self.box),
            "attributes": dict(self.attributes),
            "depth": self.depth,
            "qa": dict(self.qa),
        }
        if self.faulty_qa:
            d["faulty_qa"] = list(self.faulty_qa)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SceneObject":
        return cls(
            name=d["name"],
            box=tuple(d["box"]),
            synonyms=tuple(d.get("synonyms", ())),
            attributes={k.lower(): bool(v) for k, v in d.get("attributes", {}).items()},
            depth=float(d.get("depth", 0.0)),
            qa=dict(d.get("qa", {})),
            faulty_qa=tuple(d.get("faulty_qa", ())),
        )


@dataclass(frozen=True, eq=False)
class SceneGraph:
    image_id: str
    width: int
    height: int
    objects: tuple[SceneObject, ...] = ()
    image_qa: dict = field(default_factory=dict)
    default_answer: str = "no"
    faulty_image_qa: tuple[str, ...] = ()

    def __post_init__(self):
        for obj in self.objects:
            left, lower, right, upper = obj.box
            if left < 0 or lower < 0 or right > self.width or upper > self.height:
                raise ValueError(f"scene {self.image_id}: object {obj.name!r} box {obj.box} outside image")

    def answer(self, question: str):
        q = _norm_question(question)
        for k, v in self.image_qa.items():
            if _norm_question(k) == q:
                return v, any(_norm_question(f) == q for f in self.faulty_image_qa)
        return None, False

    def to_dict(self) -> dict:
        d = {
            "image_id": self.image_id,
            "width": self.width,
            "height": self.height,
            "default_answer": self.default_answer,
            "image_qa": dict(self.image_qa),
            "objects": [o.to_dict() for o in self.objects],
        }
        if self.faulty_image_qa:
            d["faulty_image_qa"] = list(self.faulty_image_qa)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SceneGraph":
        return cls(
            image_id=str(d["image_id"]),
            width=d["width"],
            height=d["height"],
            objects=tuple(SceneObject.from_dict(o) for o in d.get("objects", ())),
            image_qa=dict(d.get("image_qa", {})),
            default_answer=d.get("default_answer", "no"),
            faulty_image_qa=tuple(d.get("faulty_image_qa", ())),
        )


def load_scene(path: Union[str, Path]) -> SceneGraph:
    with open(path, encoding="utf-8") as f:
        return SceneGraph.from_dict(json.load(f))


class SceneStore:
    """Directory of ``<image_id>.json`` fixtures, loaded lazily and cached."""

    def __init__(self, root: Union[str, Path]):
        self.root = Path(root)
        self._cache: dict[str, SceneGraph] = {}

    def get(self, image_id: str) -> SceneGraph:
        if image_id not in self._cache:
            path = self.root / f"{image_id}.json"
            if not path.exists():
                raise KeyError(f"missing scene fixture {image_id!r} in {self.root}")
            self._cache[image_id] = load_scene(path)
        return self._cache[image_id]

    def get_many(self, image_ids: Iterable[str]) -> list[SceneGraph]:
        return [self.get(i) for i in image_ids]

    def ids(self) -> list[str]:
        return sorted(p.stem for p in self.root.glob("*.json"))
