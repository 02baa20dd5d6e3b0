"""Raster types, label-map utilities, morphology and seeded randomness.

Conventions used everywhere in the package:

* Rasters are numpy arrays indexed ``[y, x]`` (row-major, origin top-left,
  x to the right, y downward). Point coordinates are always ``(x, y)``.
* A label map is a 2-D integer array; 0 is background and every other value
  is an instance id. Ids are ``int64`` in memory and 16-bit in PNG files.
* A binary mask is a 2-D ``bool`` array.
* RGB images are ``uint8`` arrays of shape ``(h, w, 3)``; depth images are
  2-D arrays in millimetres.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError
from scipy import ndimage

from .exceptions import DataError, SizeMismatchError

LABEL_DTYPE = np.int64
MAX_FILE_ID = np.iinfo(np.uint16).max

# Above this many ids a sort-based relabel beats one scan per id.
_SCAN_RELABEL_LIMIT = 48


@dataclass(frozen=True)
class ImageSize:
    width: int
    height: int

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError(f"image size must be positive, got {self.width}x{self.height}")

    @classmethod
    def of(cls, array: np.ndarray) -> "ImageSize":
        return cls(width=int(array.shape[1]), height=int(array.shape[0]))

    @property
    def shape(self) -> tuple[int, int]:
        return (self.height, self.width)

    def __str__(self):
        return f"{self.width}x{self.height}"


def check_same_size(*arrays, names=None):
    """Raise SizeMismatchError unless all arrays share their first two dims."""
    shapes = [tuple(a.shape[:2]) for a in arrays]
    if len(set(shapes)) > 1:
        labels = names or [f"arg{i}" for i in range(len(arrays))]
        desc = ", ".join(f"{n}={s[1]}x{s[0]}" for n, s in zip(labels, shapes))
        raise SizeMismatchError(f"size mismatch: {desc}")


def as_label_map(labels) -> np.ndarray:
    arr = np.asarray(labels)
    if arr.ndim != 2:
        raise ValueError(f"label map must be 2-D, got shape {arr.shape}")
    if arr.dtype.kind not in "iub":
        raise ValueError(f"label map must hold integers, got {arr.dtype}")
    if arr.size and arr.min() < 0:
        raise ValueError("label map ids must be non-negative")
    return arr.astype(LABEL_DTYPE, copy=False)


def as_mask(mask) -> np.ndarray:
    arr = np.asarray(mask)
    if arr.ndim != 2:
        raise ValueError(f"mask must be 2-D, got shape {arr.shape}")
    return arr.astype(bool, copy=False)


def empty_label_map(size: ImageSize) -> np.ndarray:
    return np.zeros(size.shape, dtype=LABEL_DTYPE)


def instance_sizes(lm: np.ndarray) -> np.ndarray:
    """Pixel count per id, indexed by id (entry 0 is the background count)."""
    return np.bincount(lm.ravel())


def instance_ids(lm: np.ndarray) -> np.ndarray:
    """Sorted roster of nonzero ids present in ``lm``."""
    counts = instance_sizes(lm)
    ids = np.flatnonzero(counts)
    return ids[ids != 0]


def relabel_canonical(lm) -> np.ndarray:
    """Renumber ids to 1..K in raster order of first occurrence."""
    lm = as_label_map(lm)
    ids = instance_ids(lm)
    if ids.size == 0:
        return np.zeros_like(lm)
    if ids.size <= _SCAN_RELABEL_LIMIT:
        # First occurrence lies in the top row of the id's bounding box.
        slices = ndimage.find_objects(lm)
        first = np.empty(ids.size, dtype=np.int64)
        w = lm.shape[1]
        for k, i in enumerate(ids):
            ys, xs = slices[i - 1]
            row = lm[ys.start, xs]
            first[k] = ys.start * w + xs.start + int(np.argmax(row == i))
    else:
        uniq, idx = np.unique(lm.ravel(), return_index=True)
        keep = uniq != 0
        ids, first = uniq[keep], idx[keep]
    order = ids[np.argsort(first, kind="stable")]
    if np.array_equal(order, np.arange(1, order.size + 1)):
        return lm.copy()
    lut = np.zeros(int(ids.max()) + 1, dtype=LABEL_DTYPE)
    lut[order] = np.arange(1, order.size + 1, dtype=LABEL_DTYPE)
    return lut[lm]


def connectivity_structure(connectivity: int) -> np.ndarray:
    if connectivity == 4:
        return ndimage.generate_binary_structure(2, 1)
    if connectivity == 8:
        return ndimage.generate_binary_structure(2, 2)
    raise ValueError(f"connectivity must be 4 or 8, got {connectivity}")


def connected_components(mask, connectivity: int = 8) -> np.ndarray:
    """Label maximal connected true-regions of ``mask`` with ids 1..K.

    Ids follow raster order of each region's first pixel.
    """
    mask = as_mask(mask)
    labels, _ = ndimage.label(mask, structure=connectivity_structure(connectivity))
    return labels.astype(LABEL_DTYPE, copy=False)


def disk(radius: int) -> np.ndarray:
    """Euclidean disk footprint: offsets with dx^2 + dy^2 <= radius^2."""
    r = int(radius)
    yy, xx = np.mgrid[-r:r + 1, -r:r + 1]
    return (xx * xx + yy * yy) <= r * r


def dilate(mask: np.ndarray, radius: int) -> np.ndarray:
    if radius <= 0:
        return mask.copy()
    return ndimage.binary_dilation(mask, structure=disk(radius))


def erode(mask: np.ndarray, radius: int) -> np.ndarray:
    # Pixels outside the image count as background.
    if radius <= 0:
        return mask.copy()
    return ndimage.binary_erosion(mask, structure=disk(radius), border_value=0)


def make_rng(seed: int) -> np.random.Generator:
    """Deterministic generator: numpy's PCG64 seeded through SeedSequence.

    PCG64 streams are specified bit-for-bit and do not depend on platform.
    """
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))


def derive_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream for item ``index`` of a run seeded with ``seed``."""
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, int(index)])
    return np.random.Generator(np.random.PCG64(ss))


# -- PNG I/O ---------------------------------------------------------------

def _open_png(path) -> np.ndarray:
    path = Path(path)
    if not path.is_file():
        raise DataError("file not found", path)
    try:
        with Image.open(path) as im:
            im.load()
            return np.array(im)
    except (UnidentifiedImageError, OSError, SyntaxError, ValueError) as exc:
        raise DataError(f"malformed PNG ({exc})", path) from exc


def read_label_png(path) -> np.ndarray:
    arr = _open_png(path)
    if arr.ndim != 2:
        raise DataError(f"label PNG must be single-channel, got shape {arr.shape}", path)
    return arr.astype(LABEL_DTYPE)


def write_label_png(lm: np.ndarray, path) -> None:
    lm = as_label_map(lm)
    if lm.size and lm.max() > MAX_FILE_ID:
        raise ValueError(f"instance id {lm.max()} does not fit a 16-bit label PNG")
    Image.fromarray(lm.astype(np.uint16)).save(path, format="PNG")


def read_rgb_png(path) -> np.ndarray:
    arr = _open_png(path)
    if arr.ndim == 3 and arr.shape[2] == 4:
        arr = arr[:, :, :3]
    if arr.ndim != 3 or arr.shape[2] != 3 or arr.dtype != np.uint8:
        raise DataError(f"expected 8-bit RGB PNG, got shape {arr.shape} {arr.dtype}", path)
    return arr


def write_rgb_png(rgb: np.ndarray, path) -> None:
    Image.fromarray(np.asarray(rgb, dtype=np.uint8)).save(path, format="PNG")


def read_depth_png(path) -> np.ndarray:
    arr = _open_png(path)
    if arr.ndim != 2:
        raise DataError(f"depth PNG must be single-channel, got shape {arr.shape}", path)
    return arr.astype(np.uint16)


def write_depth_png(depth: np.ndarray, path) -> None:
    Image.fromarray(np.asarray(depth).astype(np.uint16)).save(path, format="PNG")


def read_mask_png(path) -> np.ndarray:
    arr = _open_png(path)
    if arr.ndim == 3:
        arr = arr[:, :, 0]
    return arr > 0


def write_mask_png(mask: np.ndarray, path) -> None:
    Image.fromarray(as_mask(mask).astype(np.uint8) * 255).save(path, format="PNG")
