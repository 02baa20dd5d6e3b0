"""Loss terms for error, foreground, center and offset predictions.

Pure numpy; no gradients. The weighted total uses the standard weights
err=1, fg=1, ctr=200, off=0.01 unless told otherwise.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .error_maps import ErrorMaps

DICE_SMOOTH = 1.0
PROB_CLAMP = 1e-7


@dataclass(frozen=True)
class LossWeights:
    err: float = 1.0
    fg: float = 1.0
    ctr: float = 200.0
    off: float = 0.01

    def __post_init__(self):
        for name in ("err", "fg", "ctr", "off"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"loss weight {name} must be finite")


@dataclass(frozen=True)
class LossBreakdown:
    err: float
    fg: float
    ctr: float
    off: float
    total: float


def _check_shape(a: np.ndarray, b: np.ndarray, what: str):
    if a.shape != b.shape:
        raise ValueError(f"{what}: shape mismatch {a.shape} vs {b.shape}")


def dice_loss(pred, target, smooth: float = DICE_SMOOTH) -> float:
    """Mean over the four channels of 1 - (2*sum(p*t) + s) / (sum(p) + sum(t) + s)."""
    if isinstance(target, ErrorMaps):
        target = target.stack()
    p = np.asarray(pred, dtype=np.float64)
    t = np.asarray(target, dtype=np.float64)
    _check_shape(p, t, "dice_loss")
    if p.ndim != 3:
        raise ValueError(f"dice_loss expects (h, w, c) arrays, got {p.shape}")
    inter = (p * t).sum(axis=(0, 1))
    denom = p.sum(axis=(0, 1)) + t.sum(axis=(0, 1))
    per_channel = 1.0 - (2.0 * inter + smooth) / (denom + smooth)
    return float(per_channel.mean())


def cross_entropy_fg(pred, target) -> float:
    p = np.asarray(pred, dtype=np.float64)
    t = np.asarray(target, dtype=np.float64)
    _check_shape(p, t, "cross_entropy_fg")
    p = np.clip(p, PROB_CLAMP, 1.0 - PROB_CLAMP)
    ce = -(t * np.log(p) + (1.0 - t) * np.log1p(-p))
    return float(ce.mean())


def mse_center(pred, target) -> float:
    p = np.asarray(pred, dtype=np.float64)
    t = np.asarray(target, dtype=np.float64)
    _check_shape(p, t, "mse_center")
    return float(np.mean((p - t) ** 2))


def l1_offset(pred, target, fg) -> float:
    """Mean absolute offset error over foreground pixels and both components."""
    p = np.asarray(pred, dtype=np.float64)
    t = np.asarray(target, dtype=np.float64)
    fg = np.asarray(fg, dtype=bool)
    _check_shape(p, t, "l1_offset")
    _check_shape(p[..., 0], fg, "l1_offset mask")
    if not fg.any():
        return 0.0
    return float(np.abs(p[fg] - t[fg]).mean())


def total_loss(parts, weights: LossWeights = LossWeights()) -> LossBreakdown:
    err, fg, ctr, off = (float(v) for v in parts)
    total = weights.err * err + weights.fg * fg + weights.ctr * ctr + weights.off * off
    return LossBreakdown(err=err, fg=fg, ctr=ctr, off=off, total=total)
