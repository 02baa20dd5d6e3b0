"""Graph-based image segmentation (Felzenszwalb & Huttenlocher, 2004).

Pixels are graph nodes joined to their 8 neighbours; an edge weighs the
Euclidean RGB distance between its endpoints after Gaussian smoothing.
Edges are visited in ascending weight (stable, so ties follow edge index)
and two components merge when the edge weight does not exceed either
component's internal difference plus ``k / size``. A second pass over the
same edge order absorbs components smaller than ``min_size``.

Edge index order is: all rightward edges in raster order, then downward,
then down-right, then up-right.
"""
from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np
from scipy import ndimage

from .core import LABEL_DTYPE, relabel_canonical
from .exceptions import ConfigError


@dataclass(frozen=True)
class FelzParams:
    k: float = 500.0
    min_size: int = 200
    smoothing_sigma: float = 0.8

    def __post_init__(self):
        if not self.k > 0:
            raise ConfigError(f"k must be positive, got {self.k}")
        if self.min_size < 1:
            raise ConfigError(f"min_size must be >= 1, got {self.min_size}")
        if self.smoothing_sigma < 0:
            raise ConfigError(f"smoothing_sigma must be >= 0, got {self.smoothing_sigma}")


def build_edges(h: int, w: int):
    """Endpoint index arrays (a, b) of the 8-connected grid graph."""
    idx = np.arange(h * w, dtype=np.int64).reshape(h, w)
    pairs = [
        (idx[:, :-1], idx[:, 1:]),      # right
        (idx[:-1, :], idx[1:, :]),      # down
        (idx[:-1, :-1], idx[1:, 1:]),   # down-right
        (idx[1:, :-1], idx[:-1, 1:]),   # up-right
    ]
    a = np.concatenate([p[0].ravel() for p in pairs])
    b = np.concatenate([p[1].ravel() for p in pairs])
    return a, b


def smooth(rgb: np.ndarray, sigma: float) -> np.ndarray:
    img = np.asarray(rgb, dtype=np.float64)
    if img.ndim == 2:
        img = img[:, :, None]
    if sigma <= 0:
        return img
    return np.stack(
        [ndimage.gaussian_filter(img[:, :, c], sigma, mode="nearest", truncate=4.0)
         for c in range(img.shape[2])],
        axis=-1,
    )


def edge_weights(img: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    flat = img.reshape(-1, img.shape[2])
    return np.sqrt(((flat[a] - flat[b]) ** 2).sum(axis=1))


@numba.njit(cache=True)
def _find(parent, x):
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        nxt = parent[x]
        parent[x] = root
        x = nxt
    return root


@numba.njit(cache=True)
def _segment_graph(n, a, b, w, order, k, min_size):
    parent = np.arange(n)
    rank = np.zeros(n, dtype=np.int64)
    size = np.ones(n, dtype=np.int64)
    thresh = np.full(n, k)
    for e in order:
        ra = _find(parent, a[e])
        rb = _find(parent, b[e])
        if ra == rb:
            continue
        we = w[e]
        if we <= thresh[ra] and we <= thresh[rb]:
            if rank[ra] < rank[rb]:
                ra, rb = rb, ra
            parent[rb] = ra
            size[ra] += size[rb]
            if rank[ra] == rank[rb]:
                rank[ra] += 1
            thresh[ra] = we + k / size[ra]
    for e in order:
        ra = _find(parent, a[e])
        rb = _find(parent, b[e])
        if ra != rb and (size[ra] < min_size or size[rb] < min_size):
            if rank[ra] < rank[rb]:
                ra, rb = rb, ra
            parent[rb] = ra
            size[ra] += size[rb]
            if rank[ra] == rank[rb]:
                rank[ra] += 1
    roots = np.empty(n, dtype=np.int64)
    for i in range(n):
        roots[i] = _find(parent, i)
    return roots


def felzenszwalb(rgb, params: FelzParams = FelzParams()) -> np.ndarray:
    """Segment an RGB (or gray) image into a canonical label map covering every pixel."""
    rgb = np.asarray(rgb)
    h, w = rgb.shape[:2]
    img = smooth(rgb, params.smoothing_sigma)
    a, b = build_edges(h, w)
    weights = edge_weights(img, a, b)
    order = np.argsort(weights, kind="stable")
    roots = _segment_graph(h * w, a, b, weights, order, float(params.k), int(params.min_size))
    # Roots are pixel indices; +1 keeps every pixel foreground before relabeling.
    return relabel_canonical((roots + 1).reshape(h, w).astype(LABEL_DTYPE))
