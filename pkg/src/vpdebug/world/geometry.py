from __future__ import annotations

import math


def box_area(box) -> float:
    x0, y0, x1, y1 = box
    return max(0.0, x1 - x0) * max(0.0, y1 - y0)


def intersection_area(a, b) -> float:
    w = min(a[2], b[2]) - max(a[0], b[0])
    h = min(a[3], b[3]) - max(a[1], b[1])
    if w <= 0 or h <= 0:
        return 0.0
    return w * h


def iou(box_a, box_b) -> float:
    """Intersection over union of two ``(x0, y0, x1, y1)`` boxes.

    Degenerate (zero-area) boxes score 0.
    """
    area_a, area_b = box_area(box_a), box_area(box_b)
    if area_a <= 0 or area_b <= 0:
        return 0.0
    inter = intersection_area(box_a, box_b)
    return inter / (area_a + area_b - inter)


def center_distance(a, b) -> float:
    ax, ay = (a[0] + a[2]) / 2, (a[1] + a[3]) / 2
    bx, by = (b[0] + b[2]) / 2, (b[1] + b[3]) / 2
    return math.hypot(ax - bx, ay - by)
