"""Prediction bundle: binary exchange file for external predictors.

Layout (all integers unsigned 32-bit little-endian)::

    magic      4 bytes  b"BEER"
    version    u32      currently 1
    width      u32
    height     u32
    presence   u32      bit 0 foreground, bit 1 center, bit 2 offset, bit 3 error
    planes     float32 little-endian, for each present field in the order
               foreground (1 channel), center (1), offset (2: dx, dy),
               error (4: TP, TN, FP, FN). Every channel is a full
               height x width plane stored row-major.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..core import ImageSize
from ..exceptions import (
    BadMagicError,
    BundleError,
    DataError,
    TruncatedBundleError,
    UnsupportedVersionError,
)

MAGIC = b"BEER"
VERSION = 1
HEADER = struct.Struct("<4sIIII")

# (field name, channel count, presence bit)
PLANES = (("foreground", 1, 0), ("center", 1, 1), ("offset", 2, 2), ("error", 4, 3))
_KNOWN_BITS = sum(1 << bit for _, _, bit in PLANES)


@dataclass(frozen=True, eq=False)
class PredictionBundle:
    """Foreground/center probabilities, offsets and optional error estimates.

    Every plane is optional; present planes are float32 with shapes
    (h, w), (h, w), (h, w, 2) and (h, w, 4).
    """

    size: ImageSize
    foreground: np.ndarray | None = None
    center: np.ndarray | None = None
    offset: np.ndarray | None = None
    error: np.ndarray | None = None

    def __post_init__(self):
        h, w = self.size.shape
        for name, ch, _ in PLANES:
            plane = getattr(self, name)
            if plane is None:
                continue
            plane = np.ascontiguousarray(plane, dtype=np.float32)
            want = (h, w) if ch == 1 else (h, w, ch)
            if plane.shape != want:
                raise ValueError(f"{name} plane has shape {plane.shape}, expected {want}")
            if not np.all(np.isfinite(plane)):
                raise ValueError(f"{name} plane contains non-finite values")
            if name != "offset" and plane.size and (plane.min() < 0 or plane.max() > 1):
                raise ValueError(f"{name} plane must hold probabilities in [0, 1]")
            object.__setattr__(self, name, plane)

    @property
    def presence(self) -> int:
        return sum(1 << bit for name, _, bit in PLANES if getattr(self, name) is not None)


def encode_bundle(b: PredictionBundle) -> bytes:
    parts = [HEADER.pack(MAGIC, VERSION, b.size.width, b.size.height, b.presence)]
    for name, ch, _ in PLANES:
        plane = getattr(b, name)
        if plane is None:
            continue
        if ch > 1:
            plane = np.moveaxis(plane, -1, 0)
        parts.append(np.ascontiguousarray(plane, dtype="<f4").tobytes())
    return b"".join(parts)


def decode_bundle(data: bytes, path=None) -> PredictionBundle:
    if len(data) < HEADER.size:
        raise TruncatedBundleError(
            f"truncated header: expected {HEADER.size} bytes, got {len(data)}",
            path, expected=HEADER.size, actual=len(data))
    magic, version, width, height, presence = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise BadMagicError(f"bad magic {magic!r}, expected {MAGIC!r}", path)
    if version != VERSION:
        raise UnsupportedVersionError(f"unsupported format version {version}, expected {VERSION}", path)
    if width < 1 or height < 1:
        raise BundleError(f"invalid size {width}x{height}", path)
    if presence & ~_KNOWN_BITS:
        raise BundleError(f"unknown plane bits in presence field 0x{presence:x}", path)
    plane_bytes = width * height * 4
    n_channels = sum(ch for _, ch, bit in PLANES if presence & (1 << bit))
    expected = HEADER.size + n_channels * plane_bytes
    if len(data) < expected:
        raise TruncatedBundleError(
            f"truncated plane section: expected {expected} bytes, got {len(data)}",
            path, expected=expected, actual=len(data))
    if len(data) > expected:
        raise BundleError(f"{len(data) - expected} trailing bytes after planes", path)
    fields = {}
    pos = HEADER.size
    for name, ch, bit in PLANES:
        if not presence & (1 << bit):
            continue
        n = ch * plane_bytes
        arr = np.frombuffer(data, dtype="<f4", count=ch * width * height, offset=pos)
        arr = arr.reshape(ch, height, width) if ch > 1 else arr.reshape(height, width)
        if ch > 1:
            arr = np.moveaxis(arr, 0, -1)
        fields[name] = arr.astype(np.float32)
        pos += n
    try:
        return PredictionBundle(ImageSize(width, height), **fields)
    except ValueError as exc:
        raise BundleError(str(exc), path) from exc


def write_bundle(b: PredictionBundle, path) -> None:
    try:
        Path(path).write_bytes(encode_bundle(b))
    except OSError as exc:
        raise DataError(f"cannot write bundle ({exc.strerror})", path) from exc


def read_bundle(path) -> PredictionBundle:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise DataError(f"cannot read bundle ({exc.strerror})", path) from exc
    return decode_bundle(data, path)
