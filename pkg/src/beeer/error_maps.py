"""Instance boundaries and TP/TN/FP/FN error maps between two segmentations."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ImageSize, as_label_map, check_same_size, dilate
from .exceptions import ConfigError

CHANNELS = ("tp", "tn", "fp", "fn")


@dataclass(frozen=True)
class BoundaryConfig:
    dilation_radius: int = 2
    connectivity: int = 4

    def __post_init__(self):
        if self.dilation_radius < 0:
            raise ConfigError(f"dilation_radius must be >= 0, got {self.dilation_radius}")
        if self.connectivity not in (4, 8):
            raise ConfigError(f"connectivity must be 4 or 8, got {self.connectivity}")


@dataclass(frozen=True, eq=False)
class ErrorMaps:
    """Four one-hot boolean channels; exactly one is set at every pixel."""

    tp: np.ndarray
    tn: np.ndarray
    fp: np.ndarray
    fn: np.ndarray

    @property
    def size(self) -> ImageSize:
        return ImageSize.of(self.tp)

    def stack(self) -> np.ndarray:
        """(h, w, 4) array in TP, TN, FP, FN channel order."""
        return np.stack([self.tp, self.tn, self.fp, self.fn], axis=-1)

    @classmethod
    def from_stack(cls, planes, threshold: float = 0.5) -> "ErrorMaps":
        """Build from an (h, w, 4) array; soft inputs are resolved by argmax."""
        planes = np.asarray(planes)
        if planes.ndim != 3 or planes.shape[2] != 4:
            raise ValueError(f"error planes must have shape (h, w, 4), got {planes.shape}")
        if planes.dtype == bool:
            onehot = planes
        else:
            winner = np.argmax(planes, axis=-1)
            onehot = winner[..., None] == np.arange(4)
        em = cls(*(onehot[..., k].copy() for k in range(4)))
        em.validate()
        return em

    def validate(self) -> None:
        check_same_size(self.tp, self.tn, self.fp, self.fn, names=list(CHANNELS))
        total = (self.tp.astype(np.uint8) + self.tn + self.fp + self.fn)
        if not np.all(total == 1):
            raise ValueError("error channels are not a one-hot partition")


def contour(lm, connectivity: int = 4) -> np.ndarray:
    """Foreground pixels with a neighbor of a different label.

    Neighbors outside the image count as different, so instances touching the
    border get contour pixels there.
    """
    lm = as_label_map(lm)
    padded = np.pad(lm, 1, mode="constant", constant_values=-1)
    h, w = lm.shape
    center = padded[1:h + 1, 1:w + 1]
    shifts = [(-1, 0), (1, 0), (0, -1), (0, 1)]
    if connectivity == 8:
        shifts += [(-1, -1), (-1, 1), (1, -1), (1, 1)]
    elif connectivity != 4:
        raise ValueError(f"connectivity must be 4 or 8, got {connectivity}")
    differs = np.zeros((h, w), dtype=bool)
    for dy, dx in shifts:
        differs |= padded[1 + dy:h + 1 + dy, 1 + dx:w + 1 + dx] != center
    return differs & (lm != 0)


def extract_boundary(lm, cfg: BoundaryConfig = BoundaryConfig()) -> np.ndarray:
    """Class-agnostic instance boundary: contour dilated by a Euclidean disk."""
    return dilate(contour(lm, cfg.connectivity), cfg.dilation_radius)


def _explicit(pred: np.ndarray, true: np.ndarray) -> ErrorMaps:
    return ErrorMaps(
        tp=pred & true,
        tn=~pred & ~true,
        fp=pred & ~true,
        fn=~pred & true,
    )


def boundary_explicit_error(init, gt, cfg: BoundaryConfig = BoundaryConfig()) -> ErrorMaps:
    init = as_label_map(init)
    gt = as_label_map(gt)
    check_same_size(init, gt, names=["init", "gt"])
    return _explicit(extract_boundary(init, cfg), extract_boundary(gt, cfg))


def mask_explicit_error(init, gt) -> ErrorMaps:
    init = as_label_map(init)
    gt = as_label_map(gt)
    check_same_size(init, gt, names=["init", "gt"])
    return _explicit(init != 0, gt != 0)


def binary_error(e: ErrorMaps) -> np.ndarray:
    """Two-class error: True where the pixel is wrong (FP or FN)."""
    return e.fp | e.fn
