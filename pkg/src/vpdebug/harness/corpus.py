"""Deterministic fixture corpus: scenes plus a pool of generated programs.

Each template yields a question, a program, and a ground truth computed
by a plain-Python oracle that reads the scene data directly (it never goes
through the interpreter or the API classes). Programs come in a faithful
form and in a buggy variant resembling typical generation mistakes;
execution against the oracle answer then splits them into the correct and
the naturally incorrect pool, just as a generated pool would be split.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional

from vpdebug.harness.metrics import is_box, matches_ground_truth
from vpdebug.inject.records import PoolEntry, dumps_jsonl
from vpdebug.runtime.interpreter import execute_or_syntax_error
from vpdebug.world.scene import SceneGraph, SceneObject

CATALOG = {
    "car": ("automobile",),
    "dog": ("puppy",),
    "cat": ("kitten",),
    "chair": ("seat",),
    "table": ("desk",),
    "cup": ("mug",),
    "bottle": (),
    "tree": (),
    "bicycle": ("bike",),
    "horse": (),
    "umbrella": (),
    "jacket": ("coat",),
    "sofa": ("couch",),
    "lamp": (),
    "book": (),
    "bird": (),
    "clock": (),
    "bus": (),
}
COLORS = ("red", "blue", "green", "white", "black", "yellow")
SIZES = ("small", "large")
ROOMS = ("kitchen", "bedroom", "living room", "office", "street", "park")
WIDTH, HEIGHT = 640, 480


# ----------------------------------------------------------------- scenes


def _make_scene(rng: random.Random, image_id: str) -> SceneGraph:
    k = rng.randint(3, 8)
    names = rng.sample(sorted(CATALOG), rng.randint(2, 4))
    objects = []
    used_cx, used_boxes = set(), set()
    while len(objects) < k:
        w, h = rng.randint(40, 200), rng.randint(40, 200)
        left, lower = rng.randint(0, WIDTH - w), rng.randint(0, HEIGHT - h)
        box = (left, lower, left + w, lower + h)
        cx = left + w / 2
        if box in used_boxes or cx in used_cx:
            continue
        used_boxes.add(box)
        used_cx.add(cx)
        name = rng.choice(names)
        color, size = rng.choice(COLORS), rng.choice(SIZES)
        attributes = {color: True, size: True}
        attributes[SIZES[1 - SIZES.index(size)]] = False
        qa = {f"What color is the {name}?": color, f"What size is the {name}?": size}
        faulty = ()
        if rng.random() < 0.08:
            # simulated perception error: the fixture answers a wrong color
            qa[f"What color is the {name}?"] = rng.choice([c for c in COLORS if c != color])
            faulty = (f"What color is the {name}?",)
        objects.append(
            SceneObject(
                name=name,
                box=box,
                synonyms=CATALOG[name],
                attributes=attributes,
                depth=round(rng.uniform(1.0, 20.0), 2),
                qa=qa,
                faulty_qa=faulty,
            )
        )
    room = rng.choice(ROOMS)
    image_qa = {"What room is this?": room, "Is it daytime?": rng.choice(("yes", "no"))}
    faulty_image = ()
    if rng.random() < 0.1:
        image_qa["What room is this?"] = rng.choice([r for r in ROOMS if r != room])
        faulty_image = ("What room is this?",)
    scene = SceneGraph(image_id, WIDTH, HEIGHT, tuple(objects), image_qa, "no", faulty_image)
    # the true room is kept for the oracle, outside the VLM-visible answers
    object.__setattr__(scene, "_true_room", room)
    return scene


def fig_trace_scene() -> SceneGraph:
    return SceneGraph.from_dict(
        {
            "image_id": "fig_trace",
            "width": 500,
            "height": 375,
            "default_answer": "no",
            "image_qa": {},
            "objects": [
                {
                    "name": "chair", "synonyms": ["seat"], "box": [40, 20, 160, 190],
                    "attributes": {"small": True, "furniture": True}, "depth": 3.0,
                    "qa": {"What item of furniture is not large?": "chair"},
                },
                {
                    "name": "sofa", "synonyms": ["couch"], "box": [200, 30, 470, 210],
                    "attributes": {"large": True, "furniture": True}, "depth": 4.5, "qa": {},
                },
            ],
        }
    )


# ---------------------------------------------------------------- oracles
# Independent re-statements of the fixture semantics over raw scene data.


def _center(o: SceneObject):
    l, b, r, u = o.box
    return (l + r) / 2, (b + u) / 2


def _named(scene: SceneGraph, name: str, box=None) -> list[SceneObject]:
    box = box or (0, 0, scene.width, scene.height)
    out = []
    for o in scene.objects:
        cx, cy = _center(o)
        if (o.name == name or name in o.synonyms) and box[0] <= cx <= box[2] and box[1] <= cy <= box[3]:
            out.append(o)
    return sorted(out, key=lambda o: (o.box[0], o.box[1]))


def _color(o: SceneObject) -> str:
    return next(c for c in COLORS if o.attributes.get(c))


def _mean_depth_in(scene: SceneGraph, box) -> float:
    inside = [o for o in scene.objects if box[0] <= _center(o)[0] <= box[2] and box[1] <= _center(o)[1] <= box[3]]
    return sum(o.depth for o in inside) / len(inside)


def _yn(b: bool) -> str:
    return "yes" if b else "no"


# -------------------------------------------------------------- templates


def _program(*body: str, returns: str = "str", param: str = "image") -> str:
    return "\n".join([f"def execute_command({param}) -> {returns}:"] + ["    " + line for line in body])


@dataclass(frozen=True)
class Generated:
    question: str
    program: str
    ground_truth: object
    n_scenes: int = 1


Template = Callable[[random.Random, list, bool], Optional[Generated]]


def _present_names(scene) -> list[str]:
    return sorted({o.name for o in scene.objects})


def t_exists(rng, scenes, buggy):
    s = scenes[0]
    name = rng.choice(sorted(CATALOG))
    query = rng.choice([n for n in CATALOG if n != name]) if buggy else name
    prog = _program("image_patch = ImagePatch(image)", f"return bool_to_yesno(image_patch.exists('{query}'))")
    return Generated(f"Is there a {name}?", prog, _yn(bool(_named(s, name))))


def t_count(rng, scenes, buggy):
    s = scenes[0]
    name = rng.choice(_present_names(s))
    ret = f"str(len({name}_patches) - 1)" if buggy else f"str(len({name}_patches))"
    prog = _program(
        "image_patch = ImagePatch(image)",
        f"{name}_patches = image_patch.find('{name}')",
        f"return {ret}",
    )
    return Generated(f"How many {name}s are there?", prog, str(len(_named(s, name))))


def t_count_while(rng, scenes, buggy):
    s = scenes[0]
    name = rng.choice(_present_names(s))
    cond = "i < len(patches) - 1" if buggy else "i < len(patches)"
    prog = _program(
        "image_patch = ImagePatch(image)",
        f"patches = image_patch.find('{name}')",
        "i = 0",
        "total = 0",
        f"while {cond}:",
        "    total += 1",
        "    i += 1",
        "return str(total)",
    )
    return Generated(f"How many {name}s are in the picture?", prog, str(len(_named(s, name))))


def t_color(rng, scenes, buggy):
    s = scenes[0]
    name = rng.choice(_present_names(s))
    target = "image_patch" if buggy else f"{name}_patches[0]"
    prog = _program(
        "image_patch = ImagePatch(image)",
        f"{name}_patches = image_patch.find('{name}')",
        f"if len({name}_patches) == 0:",
        f"    return image_patch.simple_query('What color is the {name}?')",
        f"return {target}.simple_query('What color is the {name}?')",
    )
    return Generated(f"What color is the {name}?", prog, _color(_named(s, name)[0]))


def t_verify(rng, scenes, buggy):
    s = scenes[0]
    name = rng.choice(_present_names(s))
    attr = rng.choice(COLORS + SIZES)
    idx = "-1" if buggy else "0"
    prog = _program(
        "image_patch = ImagePatch(image)",
        f"{name}_patches = image_patch.find('{name}')",
        f"if len({name}_patches) == 0:",
        "    return 'no'",
        f"return bool_to_yesno({name}_patches[{idx}].verify_property('{name}', '{attr}'))",
    )
    return Generated(f"Is the {name} {attr}?", prog, _yn(bool(_named(s, name)[0].attributes.get(attr))))


def t_left_of(rng, scenes, buggy):
    s = scenes[0]
    names = _present_names(s)
    if len(names) < 2:
        return None
    a, b = rng.sample(names, 2)
    axis = "vertical_center" if buggy else "horizontal_center"
    prog = _program(
        "image_patch = ImagePatch(image)",
        f"{a}_patches = image_patch.find('{a}')",
        f"{b}_patches = image_patch.find('{b}')",
        f"if len({a}_patches) == 0 or len({b}_patches) == 0:",
        "    return 'no'",
        f"{a}_patch = {a}_patches[0]",
        f"{b}_patch = {b}_patches[0]",
        f"if {a}_patch.{axis} < {b}_patch.{axis}:",
        "    return 'yes'",
        "return 'no'",
    )
    gt = _yn(_center(_named(s, a)[0])[0] < _center(_named(s, b)[0])[0])
    return Generated(f"Is the {a} to the left of the {b}?", prog, gt)


def t_count_attr_loop(rng, scenes, buggy):
    s = scenes[0]
    name = rng.choice(_present_names(s))
    attr = rng.choice(COLORS + SIZES)
    body = [
        "image_patch = ImagePatch(image)",
        f"{name}_patches = image_patch.find('{name}')",
        "count = 0",
        f"for {name}_patch in {name}_patches:",
    ]
    if buggy:
        body += ["    count += 1"]
    else:
        body += [f"    if {name}_patch.verify_property('{name}', '{attr}'):", "        count += 1"]
    body.append("return str(count)")
    gt = str(sum(1 for o in _named(s, name) if o.attributes.get(attr)))
    return Generated(f"How many {attr} {name}s are there?", _program(*body), gt)


def t_count_attr_comp(rng, scenes, buggy):
    s = scenes[0]
    name = rng.choice(_present_names(s))
    attr = rng.choice(COLORS + SIZES)
    cond = "not " if buggy else ""
    prog = _program(
        "image_patch = ImagePatch(image)",
        f"{name}_patches = image_patch.find('{name}')",
        f"matches = [p for p in {name}_patches if {cond}p.verify_property('{name}', '{attr}')]",
        "return str(len(matches))",
    )
    gt = str(sum(1 for o in _named(s, name) if o.attributes.get(attr)))
    return Generated(f"How many {name}s are {attr}?", prog, gt)


def t_closer(rng, scenes, buggy):
    s = scenes[0]
    names = _present_names(s)
    if len(names) < 2:
        return None
    a, b = rng.sample(names, 2)
    op = ">" if buggy else "<"
    prog = _program(
        "image_patch = ImagePatch(image)",
        f"{a}_patch = image_patch.find('{a}')[0]",
        f"{b}_patch = image_patch.find('{b}')[0]",
        f"if {a}_patch.compute_depth() {op} {b}_patch.compute_depth():",
        f"    return '{a}'",
        f"return '{b}'",
    )
    da, db = (_mean_depth_in(s, _named(s, x)[0].box) for x in (a, b))
    return Generated(f"Which is closer, the {a} or the {b}?", prog, a if da < db else b)


def t_text_match(rng, scenes, buggy):
    s = scenes[0]
    name = rng.choice(_present_names(s))
    obj = _named(s, name)[0]
    options = sorted(set(rng.sample(COLORS, 3)) | {_color(obj)})
    rng.shuffle(options)
    opts = ", ".join(repr(o) for o in options)
    target = "image_patch" if buggy else f"{name}_patches[0]"
    prog = _program(
        "image_patch = ImagePatch(image)",
        f"{name}_patches = image_patch.find('{name}')",
        f"return {target}.best_text_match([{opts}])",
    )
    return Generated(f"Which color is the {name}: {' or '.join(options)}?", prog, _color(obj))


def t_rightmost(rng, scenes, buggy):
    s = scenes[0]
    name = rng.choice(_present_names(s))
    idx = "0" if buggy else "-1"
    prog = _program(
        "image_patch = ImagePatch(image)",
        f"name = '{name}'",
        "patches = image_patch.find(name)",
        "patches = sorted(patches, key=lambda p: p.horizontal_center)",
        f"return patches[{idx}].simple_query(f'What color is the {{name}}?')",
    )
    objs = sorted(_named(s, name), key=lambda o: _center(o)[0])
    return Generated(f"What color is the rightmost {name}?", prog, _color(objs[-1]))


def t_left_half(rng, scenes, buggy):
    s = scenes[0]
    name = rng.choice(sorted(CATALOG))
    crop = "image_patch.width // 2, 0, image_patch.width, image_patch.height" if buggy else (
        "0, 0, image_patch.width // 2, image_patch.height"
    )
    prog = _program(
        "image_patch = ImagePatch(image)",
        f"left_half = image_patch.crop({crop})",
        f"return bool_to_yesno(left_half.exists('{name}'))",
    )
    gt = _yn(bool(_named(s, name, (0, 0, s.width // 2, s.height))))
    return Generated(f"Is there a {name} on the left side of the image?", prog, gt)


def t_both(rng, scenes, buggy):
    s = scenes[0]
    a, b = rng.sample(sorted(CATALOG), 2)
    op = "or" if buggy else "and"
    prog = _program(
        "image_patch = ImagePatch(image)",
        f"return bool_to_yesno(image_patch.exists('{a}') {op} image_patch.exists('{b}'))",
    )
    return Generated(f"Are there both a {a} and a {b}?", prog, _yn(bool(_named(s, a)) and bool(_named(s, b))))


def t_more_than(rng, scenes, buggy):
    s = scenes[0]
    a, b = rng.sample(sorted(CATALOG), 2)
    op = ">=" if buggy else ">"
    prog = _program(
        "image_patch = ImagePatch(image)",
        f"{a}_count = len(image_patch.find('{a}'))",
        f"{b}_count = len(image_patch.find('{b}'))",
        f"if {a}_count {op} {b}_count:",
        "    return 'yes'",
        f"elif {a}_count == 0:",
        "    return 'no'",
        "else:",
        "    return 'no'",
    )
    return Generated(f"Are there more {a}s than {b}s?", prog, _yn(len(_named(s, a)) > len(_named(s, b))))


def t_room(rng, scenes, buggy):
    s = scenes[0]
    question = "Which room is this?" if buggy else "What room is this?"
    prog = _program("image_patch = ImagePatch(image)", f"return image_patch.simple_query('{question}')")
    return Generated("What room is this?", prog, s._true_room)


def t_near(rng, scenes, buggy):
    s = scenes[0]
    names = _present_names(s)
    if len(names) < 2:
        return None
    a, b = rng.sample(names, 2)
    if buggy:
        return None
    prog = _program(
        "image_patch = ImagePatch(image)",
        f"{a}_patch = image_patch.find('{a}')[0]",
        f"{b}_patch = image_patch.find('{b}')[0]",
        f"return bool_to_yesno(distance({a}_patch, {b}_patch) < 150)",
    )
    oa, ob = _named(s, a)[0], _named(s, b)[0]
    ix = min(oa.box[2], ob.box[2]) - max(oa.box[0], ob.box[0])
    iy = min(oa.box[3], ob.box[3]) - max(oa.box[1], ob.box[1])
    (ax, ay), (bx, by) = _center(oa), _center(ob)
    d = 0.0 if ix > 0 and iy > 0 else ((ax - bx) ** 2 + (ay - by) ** 2) ** 0.5
    return Generated(f"Is the {a} near the {b}?", prog, _yn(d < 150))


def t_color_vote(rng, scenes, buggy):
    s = scenes[0]
    name = rng.choice(_present_names(s))
    pair = rng.sample(COLORS, 2)
    key = "-kv[1]" if buggy else "kv[1]"
    prog = _program(
        "image_patch = ImagePatch(image)",
        f"{name}_patch = image_patch.find('{name}')[0]",
        f"votes = {{'{pair[0]}': 0, '{pair[1]}': 0}}",
        f"for color in ['{pair[0]}', '{pair[1]}']:",
        f"    if {name}_patch.verify_property('{name}', color):",
        "        votes[color] += 1",
        f"best, score = max(votes.items(), key=lambda kv: {key})",
        "return best",
    )
    obj = _named(s, name)[0]
    gt = pair[1] if obj.attributes.get(pair[1]) and not obj.attributes.get(pair[0]) else pair[0]
    return Generated(f"Is the {name} {pair[0]} or {pair[1]}?", prog, gt)


def t_ground(rng, scenes, buggy):
    s = scenes[0]
    target = rng.choice(s.objects)
    name = target.name
    attr = rng.choice([_color(target), next(a for a in SIZES if target.attributes.get(a))])
    cands = [o for o in _named(s, name) if o.attributes.get(attr)]
    cond = f"not patch.verify_property('{name}', '{attr}')" if buggy else f"patch.verify_property('{name}', '{attr}')"
    prog = _program(
        "image_patch = ImagePatch(image)",
        f"patches = image_patch.find('{name}')",
        "for patch in patches:",
        f"    if {cond}:",
        "        return patch",
        "return image_patch",
        returns="ImagePatch",
    )
    return Generated(f"Find the {attr} {name}.", prog, list(cands[0].box))


def t_multi_any(rng, scenes, buggy):
    name = rng.choice(sorted(CATALOG))
    loop = "image[:1]" if buggy else "image"
    prog = _program(
        f"for img in {loop}:",
        "    image_patch = ImagePatch(img)",
        f"    if image_patch.exists('{name}'):",
        "        return 'yes'",
        "return 'no'",
    )
    return Generated(f"Is there a {name} in either image?", prog, _yn(any(_named(s, name) for s in scenes)), 2)


def t_unsupported(rng, scenes, buggy):
    # generated programs sometimes call API methods the fixtures cannot answer
    if not buggy:
        return None
    s = scenes[0]
    names = _present_names(s)
    if len(names) < 2:
        return None
    a, b = rng.sample(names, 2)
    prog = _program(
        "image_patch = ImagePatch(image)",
        f"{a}_patch = image_patch.find('{a}')[0]",
        f"{b}_patch = image_patch.find('{b}')[0]",
        f"return bool_to_yesno({a}_patch.overlaps({b}_patch))",
    )
    oa, ob = _named(s, a)[0], _named(s, b)[0]
    ix = min(oa.box[2], ob.box[2]) - max(oa.box[0], ob.box[0])
    iy = min(oa.box[3], ob.box[3]) - max(oa.box[1], ob.box[1])
    return Generated(f"Does the {a} overlap the {b}?", prog, _yn(ix > 0 and iy > 0))


TEMPLATES: dict[str, Template] = {
    "exists": t_exists,
    "count": t_count,
    "count_while": t_count_while,
    "color": t_color,
    "verify": t_verify,
    "left_of": t_left_of,
    "count_attr_loop": t_count_attr_loop,
    "count_attr_comp": t_count_attr_comp,
    "closer": t_closer,
    "text_match": t_text_match,
    "rightmost": t_rightmost,
    "left_half": t_left_half,
    "both": t_both,
    "more_than": t_more_than,
    "room": t_room,
    "near": t_near,
    "color_vote": t_color_vote,
    "ground": t_ground,
    "multi_any": t_multi_any,
    "unsupported": t_unsupported,
}


# -------------------------------------------------------------- generator


@dataclass
class Corpus:
    scenes: list[SceneGraph]
    correct: list[PoolEntry]
    incorrect: list[PoolEntry]


def generate_corpus(seed: int = 0, n_correct: int = 200, n_incorrect: int = 60, n_scenes: int = 80, bug_rate: float = 0.3) -> Corpus:
    """Generate scenes and a program pool split by execution against the oracle answer."""
    rng = random.Random(seed)
    scenes = [_make_scene(rng, f"scene_{i:03d}") for i in range(n_scenes)]
    correct: list[PoolEntry] = []
    incorrect: list[PoolEntry] = []
    names = sorted(TEMPLATES)
    seen: set[tuple] = set()
    guard = 0
    while len(correct) < n_correct or len(incorrect) < n_incorrect:
        guard += 1
        if guard > 100_000:
            raise RuntimeError("corpus generation did not converge")
        tname = rng.choice(names)
        buggy = rng.random() < bug_rate
        picked = rng.sample(scenes, 2)
        gen = TEMPLATES[tname](rng, picked, buggy)
        if gen is None:
            continue
        used = picked[: gen.n_scenes]
        key = (gen.program, tuple(s.image_id for s in used))
        if key in seen:
            continue
        outcome = execute_or_syntax_error(gen.program, used)
        ok = matches_ground_truth(outcome, gen.ground_truth)
        pool = correct if ok else incorrect
        limit = n_correct if ok else n_incorrect
        if len(pool) >= limit:
            continue
        seen.add(key)
        prefix = "c" if ok else "n"
        pool.append(
            PoolEntry(
                id=f"{prefix}{len(pool):03d}-{tname}",
                question=gen.question,
                scene_ids=tuple(s.image_id for s in used),
                ground_truth=gen.ground_truth,
                program=gen.program,
                task_kind="grounding" if is_box(gen.ground_truth) else "qa",
            )
        )
    return Corpus(scenes, correct, incorrect)


def write_corpus(corpus: Corpus, root: Path) -> None:
    """Write ``scenes/<id>.json`` and the two pool files under ``root``."""
    root = Path(root)
    (root / "scenes").mkdir(parents=True, exist_ok=True)
    (root / "corpus").mkdir(parents=True, exist_ok=True)
    for scene in corpus.scenes + [fig_trace_scene()]:
        text = json.dumps(scene.to_dict(), indent=1, sort_keys=True, ensure_ascii=False) + "\n"
        (root / "scenes" / f"{scene.image_id}.json").write_text(text, encoding="utf-8")
    (root / "corpus" / "pool_correct.jsonl").write_text(dumps_jsonl(e.to_dict() for e in corpus.correct), encoding="utf-8")
    (root / "corpus" / "pool_natural_incorrect.jsonl").write_text(
        dumps_jsonl(e.to_dict() for e in corpus.incorrect), encoding="utf-8"
    )


if __name__ == "__main__":  # regenerate the bundled fixtures
    write_corpus(generate_corpus(), Path(__file__).resolve().parent.parent / "data")
