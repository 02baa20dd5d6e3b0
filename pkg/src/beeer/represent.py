"""Center/offset instance representation: encoding and post-processing decode.

A label map is encoded as a center map (Gaussian bumps at instance
centroids, combined by per-pixel max) and an offset map pointing from every
foreground pixel to the centroid of its own instance. Decoding keeps windowed
maxima of the center map above a hard threshold and groups foreground pixels
with the center nearest to ``p + offset(p)``.

Offset maps are ``(h, w, 2)`` float arrays with ``[..., 0] = dx`` and
``[..., 1] = dy``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import ndimage

from .core import (
    LABEL_DTYPE,
    as_label_map,
    as_mask,
    check_same_size,
    instance_ids,
    relabel_canonical,
)
from .exceptions import ConfigError, UnknownInstanceError

DEFAULT_SIGMA = 8.0


@dataclass(frozen=True)
class DecodeConfig:
    center_threshold: float = 0.3
    nms_window: int = 7
    min_instance_px: int = 500

    def __post_init__(self):
        if not 0.0 < self.center_threshold < 1.0:
            raise ConfigError(f"center_threshold must lie in (0, 1), got {self.center_threshold}")
        if self.nms_window < 3 or self.nms_window % 2 == 0:
            raise ConfigError(f"nms_window must be odd and >= 3, got {self.nms_window}")
        if self.min_instance_px < 0:
            raise ConfigError("min_instance_px must be non-negative")


class EncodedIS(NamedTuple):
    center: np.ndarray
    offset: np.ndarray


def _centroids(lm: np.ndarray):
    """Return (ids, cx, cy) for every instance, using bincount sums."""
    ids = instance_ids(lm)
    flat = lm.ravel()
    h, w = lm.shape
    xs = np.tile(np.arange(w, dtype=np.float64), h)
    ys = np.repeat(np.arange(h, dtype=np.float64), w)
    n = int(flat.max()) + 1 if flat.size else 1
    count = np.bincount(flat, minlength=n).astype(np.float64)
    sx = np.bincount(flat, weights=xs, minlength=n)
    sy = np.bincount(flat, weights=ys, minlength=n)
    with np.errstate(invalid="ignore", divide="ignore"):
        cx = sx / count
        cy = sy / count
    return ids, cx, cy


def instance_center(lm, instance_id) -> tuple[float, float]:
    """Mean (x, y) pixel coordinate of one instance."""
    lm = as_label_map(lm)
    ys, xs = np.nonzero(lm == instance_id)
    if instance_id == 0 or xs.size == 0:
        raise UnknownInstanceError(f"instance id {instance_id} not present in label map")
    return float(xs.mean()), float(ys.mean())


def encode_centers(lm, sigma: float = DEFAULT_SIGMA) -> np.ndarray:
    if sigma <= 0:
        raise ConfigError(f"sigma must be positive, got {sigma}")
    lm = as_label_map(lm)
    h, w = lm.shape
    out = np.zeros((h, w), dtype=np.float64)
    ids, cx, cy = _centroids(lm)
    xs = np.arange(w, dtype=np.float64)
    ys = np.arange(h, dtype=np.float64)
    denom = 2.0 * sigma * sigma
    for i in ids:
        # The 2-D Gaussian factorises into row and column profiles.
        gx = np.exp(-((xs - cx[i]) ** 2) / denom)
        gy = np.exp(-((ys - cy[i]) ** 2) / denom)
        np.maximum(out, gy[:, None] * gx[None, :], out=out)
    return out


def encode_offsets(lm) -> np.ndarray:
    lm = as_label_map(lm)
    h, w = lm.shape
    out = np.zeros((h, w, 2), dtype=np.float64)
    if not lm.any():
        return out
    _, cx, cy = _centroids(lm)
    fg = lm != 0
    ys, xs = np.nonzero(fg)
    ids = lm[fg]
    out[ys, xs, 0] = cx[ids] - xs
    out[ys, xs, 1] = cy[ids] - ys
    return out


def encode(lm, sigma: float = DEFAULT_SIGMA) -> EncodedIS:
    return EncodedIS(encode_centers(lm, sigma), encode_offsets(lm))


def nms_centers(center, cfg: DecodeConfig = DecodeConfig()) -> list[tuple[int, int, float]]:
    """Windowed maxima of the center map scoring at least the threshold.

    Returns ``(x, y, score)`` sorted by descending score, ties in raster
    order. Candidates that equal a stronger accepted center inside its window
    (plateaus) are suppressed so no two results share a window.
    """
    c = np.asarray(center)
    if c.dtype.kind != "f":
        c = c.astype(np.float64)
    half = cfg.nms_window // 2
    peak = ndimage.maximum_filter(c, size=cfg.nms_window, mode="constant", cval=-np.inf)
    cand = (c == peak) & (c >= cfg.center_threshold)
    ys, xs = np.nonzero(cand)
    if xs.size == 0:
        return []
    scores = c[ys, xs]
    # np.nonzero is raster ordered, so a stable sort keeps raster tie order.
    order = np.argsort(-scores, kind="stable")
    kept: list[tuple[int, int, float]] = []
    for k in order:
        x, y = int(xs[k]), int(ys[k])
        if any(abs(x - kx) <= half and abs(y - ky) <= half for kx, ky, _ in kept):
            continue
        kept.append((x, y, float(scores[k])))
    return kept


def group_pixels(centers, offset, fg) -> np.ndarray:
    """Assign each fg pixel the 1-based index of the center nearest to p + offset(p)."""
    h, w = fg.shape
    out = np.zeros((h, w), dtype=LABEL_DTYPE)
    if not centers:
        return out
    ys, xs = np.nonzero(fg)
    tx = xs + offset[ys, xs, 0].astype(np.float64)
    ty = ys + offset[ys, xs, 1].astype(np.float64)
    best = np.full(xs.shape, np.inf)
    arg = np.zeros(xs.shape, dtype=LABEL_DTYPE)
    d = np.empty_like(tx)
    tmp = np.empty_like(tx)
    closer = np.empty(xs.shape, dtype=bool)
    for k, (cx, cy, _) in enumerate(centers):
        np.subtract(tx, cx, out=d)
        np.multiply(d, d, out=d)
        np.subtract(ty, cy, out=tmp)
        np.multiply(tmp, tmp, out=tmp)
        d += tmp
        # Strict comparison keeps the lower center index on ties.
        np.less(d, best, out=closer)
        np.copyto(best, d, where=closer)
        np.copyto(arg, k + 1, where=closer)
    out[ys, xs] = arg
    return out


def remove_small(lm, min_px: int) -> np.ndarray:
    """Drop instances with fewer than ``min_px`` pixels, then relabel canonically."""
    lm = as_label_map(lm)
    sizes = np.bincount(lm.ravel())
    small = sizes < min_px
    small[0] = False
    if small.any():
        lm = np.where(small[lm], 0, lm)
    return relabel_canonical(lm)


def decode(center, offset, fg, cfg: DecodeConfig = DecodeConfig()) -> np.ndarray:
    center = np.asarray(center)
    offset = np.asarray(offset)
    fg = as_mask(fg)
    check_same_size(center, offset, fg, names=["center", "offset", "foreground"])
    if offset.ndim != 3 or offset.shape[2] != 2:
        raise ValueError(f"offset map must have shape (h, w, 2), got {offset.shape}")
    centers = nms_centers(center, cfg)
    labels = group_pixels(centers, offset, fg)
    return remove_small(labels, cfg.min_instance_px)
