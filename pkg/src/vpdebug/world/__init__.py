from vpdebug.world.api import (
    API_FUNCTIONS,
    Image,
    ImagePatch,
    best_image_match,
    bool_to_yesno,
    distance,
)
from vpdebug.world.geometry import iou
from vpdebug.world.scene import SceneGraph, SceneObject, SceneStore, load_scene

__all__ = [
    "API_FUNCTIONS",
    "Image",
    "ImagePatch",
    "SceneGraph",
    "SceneObject",
    "SceneStore",
    "best_image_match",
    "bool_to_yesno",
    "distance",
    "iou",
    "load_scene",
]
