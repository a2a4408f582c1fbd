#!/usr/bin/env python3
"""Regenerates the bundled demo scene and test masks under data/."""

import json
from pathlib import Path

import numpy as np
from PIL import Image

ROOT = Path(__file__).resolve().parent.parent / "data"


def grid(size):
    y, x = np.mgrid[0:size, 0:size].astype(np.float64) + 0.5
    return x, y


def save_mask(mask, path):
    Image.fromarray(np.where(mask, 255, 0).astype(np.uint8), mode="L").save(path)


def disk(size, cx, cy, r):
    x, y = grid(size)
    return (x - cx) ** 2 + (y - cy) ** 2 <= r * r


def ellipse(size, cx, cy, a, b, angle):
    x, y = grid(size)
    c, s = np.cos(angle), np.sin(angle)
    u = (x - cx) * c + (y - cy) * s
    v = -(x - cx) * s + (y - cy) * c
    return (u / a) ** 2 + (v / b) ** 2 <= 1.0


def rounded_rect(size, x0, y0, x1, y1, r):
    x, y = grid(size)
    qx = np.maximum(np.maximum(x0 + r - x, x - (x1 - r)), 0.0)
    qy = np.maximum(np.maximum(y0 + r - y, y - (y1 - r)), 0.0)
    inside = (x >= x0) & (x <= x1) & (y >= y0) & (y <= y1)
    return inside & (qx * qx + qy * qy <= r * r)


def demo():
    out = ROOT / "demo"
    out.mkdir(parents=True, exist_ok=True)
    size = 64
    x, y = grid(size)
    # A tall leaf anchored at its base.
    body = ellipse(size, 32, 34, 14, 26, 0.0)
    save_mask(body, out / "mask.png")

    image = np.full((size, size, 3), 0.95)
    image[body] = (0.55, 0.78, 0.45)
    edge = body & ~ellipse(size, 32, 34, 12.5, 24.5, 0.0)
    vein = body & (np.abs(x - 32) < 1.0) & (y > 12)
    ribs = body & (np.abs((y - 0.6 * np.abs(x - 32)) % 9 - 4.5) < 0.8) & (np.abs(x - 32) < 10)
    for part in (edge, vein, ribs):
        image[part] = (0.12, 0.22, 0.1)
    Image.fromarray((image * 255).round().astype(np.uint8), mode="RGB").save(out / "image.png")

    scene = {
        "image": "image.png",
        "bodies": [{"mask": "mask.png", "material": {"E": 2000, "nu": 0.3}, "mesh": {"spacing": 4, "max_area": 20}}],
        "strokes": [{"kind": "wind", "path": [[4, 20], [60, 20]], "strength": 600, "radius": 16}],
        "rigs": [{"kind": "fixed", "at": [28, 56]}, {"kind": "fixed", "at": [36, 56]}],
        "sim": {"dt": 0.001, "fps": 24, "frame_count": 8},
        "output": {"dir": "out"},
    }
    (out / "scene.json").write_text(json.dumps(scene, indent=2) + "\n")


def masks():
    out = ROOT / "masks"
    out.mkdir(parents=True, exist_ok=True)
    size = 256
    shapes = {
        "disk": disk(size, 128, 128, 90),
        "ellipse": ellipse(size, 128, 128, 110, 55, 0.5),
        "rounded_rect": rounded_rect(size, 30, 60, 226, 196, 24),
        "blob": disk(size, 90, 110, 60) | disk(size, 160, 120, 70) | disk(size, 130, 175, 50),
        "lshape": rounded_rect(size, 40, 30, 110, 226, 10) | rounded_rect(size, 40, 156, 220, 226, 10),
    }
    for name, mask in shapes.items():
        save_mask(mask, out / f"{name}.png")


if __name__ == "__main__":
    demo()
    masks()
