"""Scene directories: ``<id>_rgb.png``, ``<id>_label.png`` and optional
``<id>_depth.png`` / ``<id>_fg.png`` side by side in one folder."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..core import (
    ImageSize,
    read_depth_png,
    read_label_png,
    read_mask_png,
    read_rgb_png,
    write_depth_png,
    write_label_png,
    write_mask_png,
    write_rgb_png,
)
from ..exceptions import DataError, SizeMismatchError

LABEL_SUFFIX = "_label.png"


@dataclass(frozen=True, eq=False)
class Scene:
    id: str
    rgb: np.ndarray
    gt: np.ndarray
    depth: np.ndarray | None = None
    fg_mask: np.ndarray | None = None

    def __post_init__(self):
        want = self.gt.shape[:2]
        for name in ("rgb", "depth", "fg_mask"):
            arr = getattr(self, name)
            if arr is not None and arr.shape[:2] != want:
                raise SizeMismatchError(
                    f"scene {self.id}: {name} is {arr.shape[1]}x{arr.shape[0]}, "
                    f"labels are {want[1]}x{want[0]}")

    @property
    def size(self) -> ImageSize:
        return ImageSize.of(self.gt)


def scene_paths(directory, scene_id: str) -> dict[str, Path]:
    d = Path(directory)
    return {k: d / f"{scene_id}_{k}.png" for k in ("rgb", "label", "depth", "fg")}


def list_scene_ids(directory) -> list[str]:
    d = Path(directory)
    if not d.is_dir():
        raise DataError("not a directory", d)
    return sorted(p.name[: -len(LABEL_SUFFIX)] for p in d.glob(f"*{LABEL_SUFFIX}"))


def _check_size(arr, ref, path):
    if arr.shape[:2] != ref.shape[:2]:
        raise DataError(
            f"size mismatch: {arr.shape[1]}x{arr.shape[0]} vs rgb {ref.shape[1]}x{ref.shape[0]}",
            path)


def load_scene(directory, scene_id: str) -> Scene:
    paths = scene_paths(directory, scene_id)
    rgb = read_rgb_png(paths["rgb"])
    gt = read_label_png(paths["label"])
    _check_size(gt, rgb, paths["label"])
    depth = fg = None
    if paths["depth"].is_file():
        depth = read_depth_png(paths["depth"])
        _check_size(depth, rgb, paths["depth"])
    if paths["fg"].is_file():
        fg = read_mask_png(paths["fg"])
        _check_size(fg, rgb, paths["fg"])
    return Scene(scene_id, rgb, gt, depth, fg)


def save_scene(scene: Scene, directory) -> None:
    paths = scene_paths(directory, scene.id)
    Path(directory).mkdir(parents=True, exist_ok=True)
    write_rgb_png(scene.rgb, paths["rgb"])
    write_label_png(scene.gt, paths["label"])
    if scene.depth is not None:
        write_depth_png(scene.depth, paths["depth"])
    if scene.fg_mask is not None:
        write_mask_png(scene.fg_mask, paths["fg"])
