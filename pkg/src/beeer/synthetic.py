"""Seeded synthetic tabletop scenes for tests, benchmarks and the selftest."""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .core import LABEL_DTYPE, ImageSize, relabel_canonical


class SyntheticScene(NamedTuple):
    rgb: np.ndarray
    depth: np.ndarray
    gt: np.ndarray
    fg: np.ndarray


def _shape_mask(rng, h, w, cx, cy, rx, ry):
    yy, xx = np.mgrid[0:h, 0:w]
    if rng.random() < 0.5:
        return (np.abs(xx - cx) <= rx) & (np.abs(yy - cy) <= ry)
    return ((xx - cx) / rx) ** 2 + ((yy - cy) / ry) ** 2 <= 1.0


def make_label_map(rng, size: ImageSize, n_instances: int, min_px: int = 500,
                   radius_range=(14, 30), min_spacing: float = 15.0,
                   margin: int = 2, max_tries: int = 2000) -> np.ndarray:
    """Non-overlapping rectangles/ellipses with pairwise centroid spacing > ``min_spacing``.

    Raises RuntimeError when the canvas cannot fit the request.
    """
    h, w = size.height, size.width
    lm = np.zeros((h, w), dtype=LABEL_DTYPE)
    centers: list[tuple[float, float]] = []
    placed = 0
    tries = 0
    while placed < n_instances:
        tries += 1
        if tries > max_tries:
            raise RuntimeError(f"could not place {n_instances} instances on a {size} canvas")
        rx = int(rng.integers(radius_range[0], radius_range[1] + 1))
        ry = int(rng.integers(radius_range[0], radius_range[1] + 1))
        cx = int(rng.integers(rx + margin, w - rx - margin))
        cy = int(rng.integers(ry + margin, h - ry - margin))
        m = _shape_mask(rng, h, w, cx, cy, rx, ry)
        if m.sum() < min_px or (lm[m] != 0).any():
            continue
        ys, xs = np.nonzero(m)
        c = (xs.mean(), ys.mean())
        if any((c[0] - a) ** 2 + (c[1] - b) ** 2 <= min_spacing ** 2 for a, b in centers):
            continue
        placed += 1
        lm[m] = placed
        centers.append(c)
    return relabel_canonical(lm)


def render_rgb(rng, gt: np.ndarray) -> np.ndarray:
    """Textured background with one flat color per instance plus mild noise."""
    h, w = gt.shape
    yy, xx = np.mgrid[0:h, 0:w]
    base = np.stack([
        90 + 40 * xx / max(w - 1, 1),
        100 + 30 * yy / max(h - 1, 1),
        110 + 0 * xx,
    ], axis=-1)
    n = int(gt.max())
    colors = rng.integers(0, 256, size=(n + 1, 3)).astype(np.float64)
    img = np.where(gt[..., None] > 0, colors[gt], base)
    img = img + rng.normal(0.0, 3.0, size=img.shape)
    return np.clip(np.rint(img), 0, 255).astype(np.uint8)


def render_depth(rng, gt: np.ndarray) -> np.ndarray:
    h, w = gt.shape
    yy = np.mgrid[0:h, 0:w][0]
    table = 900.0 + 200.0 * yy / max(h - 1, 1)
    heights = rng.uniform(20.0, 120.0, size=int(gt.max()) + 1)
    heights[0] = 0.0
    return np.rint(table - heights[gt]).astype(np.uint16)


def make_scene(seed_or_rng, size: ImageSize = ImageSize(160, 120), n_instances: int = 4,
               **kw) -> SyntheticScene:
    rng = seed_or_rng if isinstance(seed_or_rng, np.random.Generator) else np.random.default_rng(seed_or_rng)
    gt = make_label_map(rng, size, n_instances, **kw)
    rgb = render_rgb(rng, gt)
    depth = render_depth(rng, gt)
    return SyntheticScene(rgb=rgb, depth=depth, gt=gt, fg=gt > 0)
