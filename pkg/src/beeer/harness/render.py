"""Overlay rendering: instance masks over RGB, error pixels in TP/FP/FN colors."""
from __future__ import annotations

import colorsys
from pathlib import Path

import numpy as np
from PIL import Image

from ..core import as_label_map, check_same_size
from ..error_maps import ErrorMaps
from ..exceptions import DataError

TP_COLOR = (0, 200, 0)
FP_COLOR = (230, 0, 0)
FN_COLOR = (0, 90, 255)

_GOLDEN = 0.618033988749895


def palette(n: int) -> np.ndarray:
    """(n + 1, 3) uint8 colors; entry 0 is unused, ids get well-spread hues."""
    out = np.zeros((n + 1, 3), dtype=np.uint8)
    for i in range(1, n + 1):
        r, g, b = colorsys.hsv_to_rgb((i * _GOLDEN) % 1.0, 0.75, 0.95)
        out[i] = (round(r * 255), round(g * 255), round(b * 255))
    return out


def overlay(rgb, lm, err: ErrorMaps | None = None) -> np.ndarray:
    rgb = np.asarray(rgb, dtype=np.uint8)
    lm = as_label_map(lm)
    check_same_size(rgb, lm, names=["rgb", "labels"])
    out = rgb.copy()
    fg = lm != 0
    if fg.any():
        colors = palette(int(lm.max()))[lm[fg]]
        # 50% alpha, integer blend.
        out[fg] = ((rgb[fg].astype(np.uint16) + colors) // 2).astype(np.uint8)
    if err is not None:
        check_same_size(rgb, err.tp, names=["rgb", "errors"])
        out[err.tp] = TP_COLOR
        out[err.fp] = FP_COLOR
        out[err.fn] = FN_COLOR
    return out


def error_rgba(err: ErrorMaps) -> np.ndarray:
    """RGBA visualization; TN pixels are fully transparent."""
    h, w = err.tp.shape
    out = np.zeros((h, w, 4), dtype=np.uint8)
    for mask, color in ((err.tp, TP_COLOR), (err.fp, FP_COLOR), (err.fn, FN_COLOR)):
        out[mask, :3] = color
        out[mask, 3] = 255
    return out


def _save(arr: np.ndarray, path) -> None:
    try:
        Image.fromarray(arr).save(path, format="PNG")
    except OSError as exc:
        raise DataError(f"cannot write image ({exc})", path) from exc


def render_overlay(scene, lm, err: ErrorMaps | None = None, path=None) -> np.ndarray:
    """Render ``lm`` (and optionally ``err``) over ``scene.rgb``; write a PNG when ``path`` is set."""
    img = overlay(scene.rgb, lm, err)
    if path is not None:
        _save(img, Path(path))
    return img


def save_error_viz(err: ErrorMaps, path) -> None:
    _save(error_rgba(err), Path(path))
