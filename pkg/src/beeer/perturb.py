"""Synthesize flawed initial segmentations from ground-truth label maps.

The full pipeline applies, in this order: per-instance removal, per-instance
splitting along a random line through the centroid, per-instance boundary
perturbation (contour subsampling followed by a random dilation or erosion)
and image-level false positives taken from a graph-based segmentation of the
RGB image. All randomness comes from one explicitly seeded generator, so a
config (seed included) fully determines the output.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from skimage.draw import line as draw_line
from skimage.draw import polygon as draw_polygon

from .core import (
    as_label_map,
    as_mask,
    check_same_size,
    connected_components,
    dilate,
    erode,
    instance_ids,
    make_rng,
    relabel_canonical,
)
from .exceptions import ConfigError, UnknownInstanceError
from .felzenszwalb import FelzParams, felzenszwalb

# Clockwise neighbour offsets (dx, dy) starting west; y grows downward.
_MOORE = ((-1, 0), (-1, -1), (0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1))
_MOORE_INDEX = {d: k for k, d in enumerate(_MOORE)}


@dataclass(frozen=True)
class PerturbConfig:
    p_boundary: float = 0.5
    subsample_keep: tuple[float, float] = (0.1, 0.5)
    morph_radius_range: tuple[int, int] = (1, 5)
    p_remove: float = 0.15
    p_split: float = 0.15
    p_add_fp: float = 0.5
    max_added_fp: int = 2
    fp_max_overlap: float = 0.1
    felz: FelzParams = field(default_factory=FelzParams)
    seed: int = 0

    def __post_init__(self):
        for name in ("p_boundary", "p_remove", "p_split", "p_add_fp", "fp_max_overlap"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1], got {v}")
        lo, hi = self.subsample_keep
        if not 0.0 < lo <= hi <= 1.0:
            raise ConfigError(f"subsample_keep must satisfy 0 < lo <= hi <= 1, got {self.subsample_keep}")
        lo, hi = self.morph_radius_range
        if not 0 <= lo <= hi:
            raise ConfigError(f"morph_radius_range must satisfy 0 <= lo <= hi, got {self.morph_radius_range}")
        if self.max_added_fp < 0:
            raise ConfigError("max_added_fp must be >= 0")

    @classmethod
    def identity(cls, **kw) -> "PerturbConfig":
        base = dict(p_boundary=0.0, p_remove=0.0, p_split=0.0, p_add_fp=0.0)
        base.update(kw)
        return cls(**base)


def trace_contour(mask) -> list[tuple[int, int]]:
    """Moore-neighbour trace of the outer contour of the first component.

    Starts at the topmost-then-leftmost foreground pixel and walks clockwise,
    stopping when the first move would repeat. Returns (x, y) vertices.
    """
    mask = as_mask(mask)
    ys, xs = np.nonzero(mask)
    if xs.size == 0:
        return []
    h, w = mask.shape
    start = (int(xs[0]), int(ys[0]))

    def fg(x, y):
        return 0 <= x < w and 0 <= y < h and mask[y, x]

    def step(p, back_dir):
        # Scan clockwise from the backtrack neighbour; return (next, new backtrack dir).
        for n in range(1, 9):
            d = (back_dir + n) % 8
            dx, dy = _MOORE[d]
            c = (p[0] + dx, p[1] + dy)
            if fg(*c):
                pdx, pdy = _MOORE[(d - 1) % 8]
                b = (p[0] + pdx, p[1] + pdy)
                return c, _MOORE_INDEX[(b[0] - c[0], b[1] - c[1])]
        return None, back_dir

    # The west neighbour of the start pixel is background by construction.
    first, back = step(start, 0)
    if first is None:
        return [start]
    contour = [start]
    p = first
    limit = 4 * mask.size + 8
    while len(contour) < limit:
        nxt, nback = step(p, back)
        if p == start and nxt == first:
            break
        contour.append(p)
        p, back = nxt, nback
    return contour


def _fill_polygon(vertices, shape) -> np.ndarray:
    out = np.zeros(shape, dtype=bool)
    xs = np.array([v[0] for v in vertices])
    ys = np.array([v[1] for v in vertices])
    rr, cc = draw_polygon(ys, xs, shape=shape)
    out[rr, cc] = True
    n = len(vertices)
    for k in range(n):
        x0, y0 = vertices[k]
        x1, y1 = vertices[(k + 1) % n]
        rr, cc = draw_line(y0, x0, y1, x1)
        out[rr, cc] = True
    return out


def subsample_polygon(mask, keep: float) -> np.ndarray:
    """Trace every 8-connected component, keep every ceil(1/keep)-th vertex and refill."""
    mask = as_mask(mask)
    comps = connected_components(mask, 8)
    out = np.zeros_like(mask)
    for cid in range(1, int(comps.max()) + 1):
        comp = comps == cid
        contour = trace_contour(comp)
        if len(contour) < 3:
            out |= comp
            continue
        step = math.ceil(1.0 / keep - 1e-9)
        # Never simplify below a triangle.
        step = max(1, min(step, len(contour) // 3))
        out |= _fill_polygon(contour[::step], mask.shape)
    return out


def perturb_boundary(mask, keep: float, rng: np.random.Generator,
                     radius_range=(1, 5), *, radius=None, mode=None) -> np.ndarray:
    """Contour subsampling followed by a random dilation or erosion.

    ``mode`` ('dilate' or 'erode') and ``radius`` are drawn from ``rng`` when
    not given, mode first. Masks whose contour has fewer than 3 points are
    returned unchanged.
    """
    mask = as_mask(mask)
    if not 0.0 < keep <= 1.0:
        raise ValueError(f"keep must lie in (0, 1], got {keep}")
    if mode is None:
        mode = "dilate" if rng.random() < 0.5 else "erode"
    if radius is None:
        radius = int(rng.integers(radius_range[0], radius_range[1] + 1))
    if mode not in ("dilate", "erode"):
        raise ValueError(f"mode must be 'dilate' or 'erode', got {mode!r}")
    ys, xs = np.nonzero(mask)
    if xs.size == 0:
        return mask.copy()
    # Work in a crop padded so dilation cannot reach an interior crop edge.
    h, w = mask.shape
    pad = radius + 2
    y0, y1 = max(ys.min() - pad, 0), min(ys.max() + pad + 1, h)
    x0, x1 = max(xs.min() - pad, 0), min(xs.max() + pad + 1, w)
    crop = mask[y0:y1, x0:x1]
    if len(trace_contour(crop)) < 3:
        return mask.copy()
    shaped = subsample_polygon(crop, keep)
    shaped = dilate(shaped, radius) if mode == "dilate" else erode(shaped, radius)
    out = np.zeros_like(mask)
    out[y0:y1, x0:x1] = shaped
    return out


def split_instance(lm, instance_id, rng: np.random.Generator, angle=None) -> np.ndarray:
    """Split one instance along a line through its centroid.

    The line direction is ``angle`` (radians, drawn uniformly from [0, pi) when
    None). Pixels on the positive side or on the line keep the id; the others
    get ``max id + 1``. A split leaving one side empty is a no-op.
    """
    lm = as_label_map(lm)
    sel = lm == instance_id
    if instance_id == 0 or not sel.any():
        raise UnknownInstanceError(f"instance id {instance_id} not present in label map")
    if angle is None:
        angle = rng.uniform(0.0, math.pi)
    ys, xs = np.nonzero(sel)
    if xs.size < 2:
        return lm.copy()
    cx, cy = xs.mean(), ys.mean()
    side = math.cos(angle) * (ys - cy) - math.sin(angle) * (xs - cx)
    # Round away float noise so pixels on the line land deterministically.
    side = np.round(side, 9)
    neg = side < 0
    if neg.all() or not neg.any():
        return lm.copy()
    out = lm.copy()
    out[ys[neg], xs[neg]] = int(lm.max()) + 1
    return out


def _add_segment(lm, segments, rng, max_overlap):
    fg = lm != 0
    seg_sizes = np.bincount(segments.ravel())
    seg_fg = np.bincount(segments.ravel(), weights=fg.ravel().astype(np.float64),
                         minlength=seg_sizes.size)
    ids = np.flatnonzero(seg_sizes)
    ids = ids[ids != 0]
    ratio = seg_fg[ids] / seg_sizes[ids]
    cands = ids[ratio < max_overlap]
    if cands.size == 0:
        return lm
    pick = cands[int(rng.integers(0, cands.size))]
    out = lm.copy()
    out[(segments == pick) & ~fg] = int(lm.max()) + 1
    return out


def add_false_positive(lm, rgb, params: FelzParams = FelzParams(), rng=None,
                       max_overlap: float = 0.1, segments=None) -> np.ndarray:
    """Add one graph segment overlapping existing foreground by less than ``max_overlap``.

    Pixels already owned by an instance stay with that instance. Without a
    candidate segment the input is returned unchanged. ``segments`` may carry
    a precomputed segmentation of ``rgb``.
    """
    lm = as_label_map(lm)
    check_same_size(lm, np.asarray(rgb), names=["labels", "rgb"])
    if rng is None:
        rng = make_rng(0)
    if segments is None:
        segments = felzenszwalb(rgb, params)
    return _add_segment(lm, segments, rng, max_overlap)


def perturb(gt, rgb, cfg: PerturbConfig = PerturbConfig(), rng=None) -> np.ndarray:
    """Apply removal, split, boundary and false-positive perturbations to ``gt``.

    Uses ``rng`` when given, otherwise a generator seeded from ``cfg.seed``.
    """
    gt = as_label_map(gt)
    check_same_size(gt, np.asarray(rgb), names=["gt", "rgb"])
    if rng is None:
        rng = make_rng(cfg.seed)
    lm = relabel_canonical(gt)

    for i in instance_ids(lm):
        if rng.random() < cfg.p_remove:
            lm[lm == i] = 0

    for i in instance_ids(lm):
        if rng.random() < cfg.p_split:
            lm = split_instance(lm, i, rng)

    out = np.zeros_like(lm)
    lo, hi = cfg.subsample_keep
    for i in instance_ids(lm):
        m = lm == i
        if rng.random() < cfg.p_boundary:
            keep = rng.uniform(lo, hi) if hi > lo else lo
            m = perturb_boundary(m, keep, rng, cfg.morph_radius_range)
        # Later instances overwrite earlier ones where perturbed masks collide.
        out[m] = i

    if cfg.max_added_fp > 0 and rng.random() < cfg.p_add_fp:
        n_fp = int(rng.integers(1, cfg.max_added_fp + 1))
        segments = felzenszwalb(rgb, cfg.felz)
        for _ in range(n_fp):
            out = _add_segment(out, segments, rng, cfg.fp_max_overlap)

    return relabel_canonical(out)
