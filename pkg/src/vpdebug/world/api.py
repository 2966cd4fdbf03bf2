"""The visual-program API surface, answered from scene-graph fixtures.

Programs see ``ImagePatch`` plus the free functions in ``API_FUNCTIONS``.
Each execution wraps its scenes in fresh ``Image`` values, which also
record any deliberately faulty fixture answers the program consumed.
"""

from __future__ import annotations

from typing import Optional

from vpdebug.world.geometry import center_distance, intersection_area, iou
from vpdebug.world.scene import SceneGraph, SceneObject


class Image:
    """Runtime value bound to a program's ``image`` parameter."""

    def __init__(self, scene: SceneGraph):
        self.scene = scene
        self.faults: list[str] = []

    def __repr__(self):
        return f"Image(id={self.scene.image_id!r}, width={self.scene.width}, height={self.scene.height})"


def _as_image(value) -> Image:
    if isinstance(value, Image):
        return value
    if isinstance(value, ImagePatch):
        return value._image
    raise TypeError(f"ImagePatch() expects an image, got '{type(value).__name__}'")


class ImagePatch:
    """Rectangular region of a scene, coordinates in pixels from bottom-left."""

    # names a program may read or call; everything else is hidden
    API_ATTRS = frozenset(
        {
            "left", "right", "upper", "lower", "height", "width", "horizontal_center",
            "vertical_center", "find", "exists", "verify_property", "simple_query",
            "best_text_match", "crop", "compute_depth",
        }
    )

    def __init__(self, image, left=None, lower=None, right=None, upper=None):
        img = _as_image(image)
        scene = img.scene
        self._image = img
        self.left = 0 if left is None else left
        self.lower = 0 if lower is None else lower
        self.right = scene.width if right is None else right
        self.upper = scene.height if upper is None else upper
        if not (self.left < self.right and self.lower < self.upper):
            raise ValueError("empty crop")
        self.height = self.upper - self.lower
        self.width = self.right - self.left
        self.horizontal_center = (self.left + self.right) / 2
        self.vertical_center = (self.lower + self.upper) / 2

    @property
    def box(self) -> tuple:
        return (self.left, self.lower, self.right, self.upper)

    def __repr__(self):
        return (
            f"ImagePatch(left={self.left!r}, right={self.right!r}, upper={self.upper!r}, "
            f"lower={self.lower!r}, height={self.height!r}, width={self.width!r}, "
            f"horizontal_center={self.horizontal_center!r}, vertical_center={self.vertical_center!r})"
        )

    def __eq__(self, other):
        return (
            isinstance(other, ImagePatch)
            and other._image.scene is self._image.scene
            and other.box == self.box
        )

    def __hash__(self):
        return hash((self._image.scene.image_id, self.box))

    # -- fixture helpers --------------------------------------------------

    def _contains(self, obj: SceneObject) -> bool:
        cx, cy = obj.center
        return self.left <= cx <= self.right and self.lower <= cy <= self.upper

    def _objects(self) -> list[SceneObject]:
        return [o for o in self._image.scene.objects if self._contains(o)]

    def _best_object(self, name: Optional[str] = None) -> Optional[SceneObject]:
        best, best_score = None, -1.0
        for obj in self._objects():
            if name is not None and name.lower() not in obj.names():
                continue
            score = iou(obj.box, self.box)
            if score > best_score:
                best, best_score = obj, score
        return best

    # -- API ----------------------------------------------------------------

    def find(self, object_name: str) -> list["ImagePatch"]:
        if not isinstance(object_name, str) or not object_name:
            raise ValueError("find() needs a non-empty object name")
        name = object_name.lower()
        hits = [o for o in self._objects() if name in o.names()]
        hits.sort(key=lambda o: (o.box[0], o.box[1]))
        return [ImagePatch(self._image, *o.box) for o in hits]

    def exists(self, object_name: str) -> bool:
        return len(self.find(object_name)) > 0

    def verify_property(self, object_name: str, property: str) -> bool:
        obj = self._best_object(object_name)
        if obj is None:
            return False
        return bool(obj.attributes.get(str(property).lower(), False))

    def simple_query(self, question: str) -> str:
        obj = self._best_object()
        if obj is not None:
            answer, faulty = obj.answer(question)
            if answer is not None:
                if faulty:
                    self._image.faults.append(question)
                return answer
        answer, faulty = self._image.scene.answer(question)
        if answer is not None:
            if faulty:
                self._image.faults.append(question)
            return answer
        return self._image.scene.default_answer

    def best_text_match(self, option_list) -> str:
        options = list(option_list)
        if not options:
            raise ValueError("best_text_match() needs at least one option")
        obj = self._best_object()
        if obj is None:
            return options[0]
        terms = obj.terms()
        scores = [sum(w in terms for w in str(opt).lower().split()) for opt in options]
        return options[scores.index(max(scores))]

    def crop(self, left, lower, right, upper) -> "ImagePatch":
        box = (max(left, self.left), max(lower, self.lower), min(right, self.right), min(upper, self.upper))
        if not (box[0] < box[2] and box[1] < box[3]):
            raise ValueError("empty crop")
        return ImagePatch(self._image, *box)

    def compute_depth(self) -> float:
        objs = self._objects()
        if not objs:
            raise ValueError("no objects in patch")
        return sum(o.depth for o in objs) / len(objs)


def _patch_score(patch: ImagePatch, content: list[str]) -> int:
    objs = patch._objects()
    score = 0
    for c in content:
        words = set(str(c).lower().split())
        if words and any(words <= o.terms() for o in objs):
            score += 1
    return score


def best_image_match(list_patches, content, return_index=False):
    patches = list(list_patches)
    if not patches:
        raise ValueError("list_patches is empty")
    if isinstance(content, str):
        content = [content]
    scores = [_patch_score(p, list(content)) for p in patches]
    idx = scores.index(max(scores))
    return idx if return_index else patches[idx]


def bool_to_yesno(bool_answer) -> str:
    return "yes" if bool_answer else "no"


def distance(patch_a, patch_b) -> float:
    if isinstance(patch_a, ImagePatch) and isinstance(patch_b, ImagePatch):
        if intersection_area(patch_a.box, patch_b.box) > 0:
            return 0.0
        return center_distance(patch_a.box, patch_b.box)
    if isinstance(patch_a, (int, float)) and isinstance(patch_b, (int, float)):
        return float(abs(patch_a - patch_b))
    raise TypeError("distance() expects two ImagePatch values or two numbers")


API_FUNCTIONS = {
    "ImagePatch": ImagePatch,
    "best_image_match": best_image_match,
    "bool_to_yesno": bool_to_yesno,
    "distance": distance,
}

# Known API names from the wider visual-programming API that these fixtures
# cannot answer; calling them fails loudly instead of being guessed.
UNSUPPORTED_FUNCTIONS = frozenset({"llm_query", "coerce_to_numeric", "process_guesses", "select_answer"})
UNSUPPORTED_METHODS = frozenset({"overlaps", "llm_query", "image_caption", "print_image", "compute_depth_map"})
