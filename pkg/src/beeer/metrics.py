"""Object-size-normalized (OSN) overlap and boundary P/R/F, plus F@.75.

Predicted and ground-truth instances are matched once with a maximum
assignment on pairwise overlap F-measure. Overlap sums use the mask P/R/F of
the matched pairs; boundary sums reuse the same matching with per-instance
dilated contours. Precision sums are normalized by the number of predictions
N, recall sums by the number of ground-truth objects M, and F sums by
max(M, N).
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy import ndimage

from .core import as_label_map, as_mask, check_same_size, dilate
from .error_maps import BoundaryConfig, contour
from .hungarian import Assignment, hungarian_max

F_THRESHOLD = 0.75


@dataclass(frozen=True)
class MetricsReport:
    overlap_p: float
    overlap_r: float
    overlap_f: float
    boundary_p: float
    boundary_r: float
    boundary_f: float
    f_at_75: float
    n_pred: int
    n_gt: int

    def as_dict(self) -> dict:
        return asdict(self)


def _prf(inter, n_pred, n_gt):
    """Elementwise P/R/F from integer counts with the zero conventions."""
    inter = np.asarray(inter, dtype=np.float64)
    n_pred = np.asarray(n_pred, dtype=np.float64)
    n_gt = np.asarray(n_gt, dtype=np.float64)
    with np.errstate(invalid="ignore", divide="ignore"):
        p = np.where(n_pred > 0, inter / n_pred, 0.0)
        r = np.where(n_gt > 0, inter / n_gt, 0.0)
        # 2PR/(P+R) rewritten as one division so exact thresholds like 0.75 compare exactly.
        f = np.where(inter > 0, 2.0 * inter / (n_pred + n_gt), 0.0)
    return p, r, f


def pairwise_prf(pred, gt) -> tuple[float, float, float]:
    pred = as_mask(pred)
    gt = as_mask(gt)
    check_same_size(pred, gt, names=["pred", "gt"])
    inter = int(np.count_nonzero(pred & gt))
    p, r, f = _prf(inter, int(np.count_nonzero(pred)), int(np.count_nonzero(gt)))
    return float(p), float(r), float(f)


def _compact(lm: np.ndarray):
    """Map ids to 1..K in ascending id order; returns (compact map, original ids)."""
    counts = np.bincount(lm.ravel())
    ids = np.flatnonzero(counts)
    ids = ids[ids != 0]
    if ids.size == counts.size - 1:
        return lm, ids
    lut = np.zeros(counts.size, dtype=np.int64)
    lut[ids] = np.arange(1, ids.size + 1)
    return lut[lm], ids


class _PairTables:
    """Overlap P/R/F matrices and the shared assignment for one image."""

    def __init__(self, pred, gt):
        pred = as_label_map(pred)
        gt = as_label_map(gt)
        check_same_size(pred, gt, names=["pred", "gt"])
        self.pred, self.pred_ids = _compact(pred)
        self.gt, self.gt_ids = _compact(gt)
        self.n = self.pred_ids.size
        self.m = self.gt_ids.size
        stride = self.m + 1
        joint = np.bincount(
            (self.pred * stride + self.gt).ravel(), minlength=(self.n + 1) * stride
        ).reshape(self.n + 1, stride)
        pred_sizes = joint.sum(axis=1)[1:]
        gt_sizes = joint.sum(axis=0)[1:]
        inter = joint[1:, 1:]
        self.P, self.R, self.F = _prf(inter, pred_sizes[:, None], gt_sizes[None, :])
        self.assignment: Assignment = hungarian_max(self.F)

    def empty_case(self):
        """(1,1,1) when both sides are empty, (0,0,0) when exactly one is."""
        if self.n == 0 and self.m == 0:
            return (1.0, 1.0, 1.0)
        if self.n == 0 or self.m == 0:
            return (0.0, 0.0, 0.0)
        return None

    def normalize(self, p_sum, r_sum, f_sum):
        return (p_sum / self.n, r_sum / self.m, f_sum / max(self.n, self.m))

    def overlap(self):
        special = self.empty_case()
        if special is not None:
            return special
        pairs = self.assignment.pairs
        return self.normalize(
            sum(self.P[i, j] for i, j in pairs),
            sum(self.R[i, j] for i, j in pairs),
            sum(self.F[i, j] for i, j in pairs),
        )

    def f_at(self, threshold=F_THRESHOLD):
        special = self.empty_case()
        if special is not None:
            return special[0]
        hits = sum(1 for i, j in self.assignment.pairs if self.F[i, j] >= threshold)
        return hits / max(self.n, self.m)

    def boundary(self, cfg: BoundaryConfig):
        special = self.empty_case()
        if special is not None:
            return special
        pairs = self.assignment.pairs
        pb = _instance_boundaries(self.pred, [i + 1 for i, _ in pairs], cfg)
        gb = _instance_boundaries(self.gt, [j + 1 for _, j in pairs], cfg)
        p_sum = r_sum = f_sum = 0.0
        for i, j in pairs:
            a, b = pb[i + 1], gb[j + 1]
            p, r, f = _prf(_crop_intersection(a, b), a[2].sum(), b[2].sum())
            p_sum += float(p)
            r_sum += float(r)
            f_sum += float(f)
        return self.normalize(p_sum, r_sum, f_sum)


def _instance_boundaries(lm: np.ndarray, ids, cfg: BoundaryConfig):
    """Dilated contour of each requested instance as (y0, x0, crop mask)."""
    h, w = lm.shape
    pad = cfg.dilation_radius + 1
    slices = ndimage.find_objects(lm)
    out = {}
    for k in ids:
        sl = slices[k - 1]
        y0 = max(sl[0].start - pad, 0)
        y1 = min(sl[0].stop + pad, h)
        x0 = max(sl[1].start - pad, 0)
        x1 = min(sl[1].stop + pad, w)
        crop = lm[y0:y1, x0:x1] == k
        # Interior crop edges sit radius + 1 away from the instance, so
        # contour() treating them like image borders changes nothing.
        edge = contour(crop.astype(np.int64), cfg.connectivity)
        out[k] = (y0, x0, dilate(edge, cfg.dilation_radius))
    return out


def _crop_intersection(a, b) -> int:
    ay, ax, am = a
    by, bx, bm = b
    y0, x0 = max(ay, by), max(ax, bx)
    y1 = min(ay + am.shape[0], by + bm.shape[0])
    x1 = min(ax + am.shape[1], bx + bm.shape[1])
    if y1 <= y0 or x1 <= x0:
        return 0
    sa = am[y0 - ay:y1 - ay, x0 - ax:x1 - ax]
    sb = bm[y0 - by:y1 - by, x0 - bx:x1 - bx]
    return int(np.count_nonzero(sa & sb))


def osn_overlap(pred, gt) -> tuple[float, float, float]:
    return _PairTables(pred, gt).overlap()


def osn_boundary(pred, gt, cfg: BoundaryConfig = BoundaryConfig()) -> tuple[float, float, float]:
    return _PairTables(pred, gt).boundary(cfg)


def f_at_75(pred, gt) -> float:
    return _PairTables(pred, gt).f_at(F_THRESHOLD)


def evaluate_pair(pred, gt, cfg: BoundaryConfig = BoundaryConfig()) -> MetricsReport:
    """All metrics for one image, sharing a single assignment."""
    t = _PairTables(pred, gt)
    op, orr, of = t.overlap()
    bp, br, bf = t.boundary(cfg)
    return MetricsReport(
        overlap_p=float(op), overlap_r=float(orr), overlap_f=float(of),
        boundary_p=float(bp), boundary_r=float(br), boundary_f=float(bf),
        f_at_75=float(t.f_at(F_THRESHOLD)), n_pred=t.n, n_gt=t.m,
    )
