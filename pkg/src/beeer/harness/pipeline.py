"""Post-processing filters, bundle refinement and dataset evaluation."""
from __future__ import annotations

import csv
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..core import ImageSize, as_label_map, as_mask, check_same_size, read_label_png, read_mask_png, relabel_canonical
from ..exceptions import DataError, SizeMismatchError
from ..metrics import evaluate_pair
from ..represent import encode, group_pixels, nms_centers, remove_small
from .bundle import PredictionBundle, read_bundle
from .config import RunConfig
from .scene import LABEL_SUFFIX, Scene, list_scene_ids, scene_paths

log = logging.getLogger(__name__)

CSV_COLUMNS = ["image", "n_pred", "n_gt", "P_O", "R_O", "F_O", "P_B", "R_B", "F_B", "F_at_75", "ms"]
AGGREGATE_ID = "mean"

__all__ = [
    "filter_foreground", "remove_small", "bundle_from_labels", "refine_planes", "refine_from_bundle",
    "evaluate_dataset", "EvaluationResult", "write_csv", "write_markdown",
]


def _foreground_drop(sizes: np.ndarray, lm: np.ndarray, fg: np.ndarray, ratio: float) -> np.ndarray:
    inside = np.bincount(lm[fg], minlength=sizes.size)
    # Instances exactly at the ratio are kept.
    with np.errstate(invalid="ignore", divide="ignore"):
        frac = inside / sizes
    return (sizes > 0) & (frac < ratio)


def _drop_ids(lm: np.ndarray, drop: np.ndarray) -> np.ndarray:
    drop[0] = False
    if drop.any():
        lm = np.where(drop[lm], 0, lm)
    return relabel_canonical(lm)


def filter_foreground(lm, fg, ratio: float = 0.3) -> np.ndarray:
    """Keep instances with at least ``ratio`` of their pixels inside ``fg``."""
    lm = as_label_map(lm)
    fg = as_mask(fg)
    check_same_size(lm, fg, names=["labels", "foreground"])
    sizes = np.bincount(lm.ravel())
    return _drop_ids(lm, _foreground_drop(sizes, lm, fg, ratio))


def bundle_from_labels(lm, sigma: float = 8.0, error=None) -> PredictionBundle:
    """Ideal prediction bundle for a label map: hard foreground plus encoded centers/offsets."""
    lm = as_label_map(lm)
    enc = encode(lm, sigma)
    return PredictionBundle(
        size=ImageSize.of(lm),
        foreground=(lm != 0).astype(np.float32),
        center=enc.center.astype(np.float32),
        offset=enc.offset.astype(np.float32),
        error=None if error is None else np.asarray(error, dtype=np.float32),
    )


def refine_planes(b: PredictionBundle, fg_mask, cfg: RunConfig = RunConfig()) -> np.ndarray:
    """Threshold foreground, decode instances, then apply the foreground-overlap and size filters."""
    for name in ("foreground", "center", "offset"):
        if getattr(b, name) is None:
            raise DataError(f"bundle lacks the {name} plane needed for refinement")
    fg = b.foreground >= cfg.fg_threshold if cfg.fg_threshold > 0 else b.foreground > 0
    if fg_mask is not None:
        check_same_size(fg, as_mask(fg_mask), names=["bundle", "foreground mask"])
    centers = nms_centers(b.center, cfg.decode)
    labels = group_pixels(centers, b.offset, fg)
    # Size and foreground filters only remove whole instances and never
    # change sizes, so one pass over both gives the same result as decoding
    # first and filtering afterwards.
    sizes = np.bincount(labels.ravel())
    drop = sizes < cfg.decode.min_instance_px
    if fg_mask is not None:
        drop |= _foreground_drop(sizes, labels, as_mask(fg_mask), cfg.fg_overlap_ratio)
    return _drop_ids(labels, drop)


def refine_from_bundle(b: PredictionBundle, scene: Scene, cfg: RunConfig = RunConfig()) -> np.ndarray:
    """Refined label map from predicted planes, filtered by the scene's foreground mask."""
    if b.size != scene.size:
        raise SizeMismatchError(f"bundle is {b.size}, scene {scene.id} is {scene.size}")
    return refine_planes(b, scene.fg_mask, cfg)


# -- dataset evaluation ------------------------------------------------------

@dataclass
class EvaluationResult:
    rows: list[dict]
    aggregate: dict
    missing: list[str] = field(default_factory=list)
    unmatched_pred: list[str] = field(default_factory=list)

    @property
    def partial(self) -> bool:
        return bool(self.missing or self.unmatched_pred)


def _pred_index(pred_dir: Path) -> dict[str, tuple[str, Path]]:
    """Map scene id -> (kind, path). ``<id>_label.png`` wins over ``<id>.png`` over ``<id>.bundle``."""
    if not pred_dir.is_dir():
        raise DataError("not a directory", pred_dir)
    index: dict[str, tuple[str, Path]] = {}
    for p in sorted(pred_dir.glob("*.bundle")):
        index[p.name[: -len(".bundle")]] = ("bundle", p)
    for p in sorted(pred_dir.glob("*.png")):
        if p.name.endswith(LABEL_SUFFIX):
            continue
        sid = p.stem
        if sid.endswith(("_rgb", "_depth", "_fg")):
            continue
        index[sid] = ("labels", p)
    for p in sorted(pred_dir.glob(f"*{LABEL_SUFFIX}")):
        index[p.name[: -len(LABEL_SUFFIX)]] = ("labels", p)
    return index


def _evaluate_one(job) -> dict:
    sid, kind, pred_path, gt_dir, cfg = job
    paths = scene_paths(gt_dir, sid)
    gt = read_label_png(paths["label"])
    fg_mask = read_mask_png(paths["fg"]) if paths["fg"].is_file() else None
    if fg_mask is not None and fg_mask.shape != gt.shape:
        raise DataError("size mismatch with label map", paths["fg"])
    if kind == "bundle":
        b = read_bundle(pred_path)
        if b.size != ImageSize.of(gt):
            raise DataError(f"bundle is {b.size}, labels are {ImageSize.of(gt)}", pred_path)
        start = time.perf_counter()
        pred = refine_planes(b, fg_mask, cfg)
    else:
        pred = read_label_png(pred_path)
        if pred.shape != gt.shape:
            raise DataError(f"size mismatch with {paths['label']}", pred_path)
        start = time.perf_counter()
    rep = evaluate_pair(pred, gt, cfg.boundary)
    ms = (time.perf_counter() - start) * 1000.0
    return {
        "image": sid, "n_pred": rep.n_pred, "n_gt": rep.n_gt,
        "P_O": rep.overlap_p, "R_O": rep.overlap_r, "F_O": rep.overlap_f,
        "P_B": rep.boundary_p, "R_B": rep.boundary_r, "F_B": rep.boundary_f,
        "F_at_75": rep.f_at_75, "ms": ms,
    }


def aggregate_rows(rows: list[dict]) -> dict:
    agg: dict = {"image": AGGREGATE_ID}
    for col in CSV_COLUMNS[1:]:
        agg[col] = float(np.mean([r[col] for r in rows])) if rows else float("nan")
    return agg


def evaluate_dataset(pred_dir, gt_dir, cfg: RunConfig = RunConfig(), workers: int | None = None) -> EvaluationResult:
    """Score every ground-truth scene that has a prediction.

    Rows come back sorted by scene id whatever the worker count; scenes
    lacking a prediction (and predictions lacking a scene) are reported and
    skipped.
    """
    pred_dir, gt_dir = Path(pred_dir), Path(gt_dir)
    gt_ids = list_scene_ids(gt_dir)
    index = _pred_index(pred_dir)
    missing = [s for s in gt_ids if s not in index]
    unmatched = sorted(set(index) - set(gt_ids))
    for s in missing:
        log.warning("no prediction for scene %s; skipped", s)
    for s in unmatched:
        log.warning("prediction %s has no ground truth; skipped", s)
    jobs = [(s, *index[s], gt_dir, cfg) for s in gt_ids if s in index]
    workers = cfg.parallel_workers if workers is None else workers
    if workers > 1 and len(jobs) > 1:
        chunk = max(1, len(jobs) // (4 * workers))
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as ex:
            rows = list(ex.map(_evaluate_one, jobs, chunksize=chunk))
    else:
        rows = [_evaluate_one(j) for j in jobs]
    return EvaluationResult(rows, aggregate_rows(rows), missing, unmatched)


def write_csv(result: EvaluationResult, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        for row in result.rows:
            writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
        writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in result.aggregate.items()})


def write_markdown(result: EvaluationResult, path) -> None:
    """Human-readable table; P/R/F columns in percent like the usual result tables."""

    def fmt(row):
        cells = [str(row["image"])]
        for col in ("n_pred", "n_gt"):
            v = row[col]
            cells.append(f"{v:.2f}" if isinstance(v, float) else str(v))
        cells += [f"{100 * row[c]:.1f}" for c in CSV_COLUMNS[3:-1]]
        cells.append(f"{row['ms']:.1f}")
        return "| " + " | ".join(cells) + " |"

    lines = ["| " + " | ".join(CSV_COLUMNS) + " |", "|" + "---|" * len(CSV_COLUMNS)]
    lines += [fmt(r) for r in result.rows]
    lines.append(fmt(result.aggregate))
    if result.missing:
        lines += ["", "Skipped (no prediction): " + ", ".join(result.missing)]
    if result.unmatched_pred:
        lines += ["", "Skipped (no ground truth): " + ", ".join(result.unmatched_pred)]
    Path(path).write_text("\n".join(lines) + "\n")
