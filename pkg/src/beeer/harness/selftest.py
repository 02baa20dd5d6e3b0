"""Quick built-in consistency checks run by ``beeer selftest``."""
from __future__ import annotations

import itertools
import math

import numpy as np

from ..core import ImageSize, make_rng, relabel_canonical
from ..error_maps import boundary_explicit_error
from ..felzenszwalb import FelzParams, felzenszwalb
from ..hungarian import hungarian_max
from ..losses import LossWeights, cross_entropy_fg, dice_loss, l1_offset, mse_center, total_loss
from ..metrics import osn_overlap
from ..perturb import PerturbConfig, perturb
from ..represent import decode, encode
from ..synthetic import make_scene


def _losses():
    t = np.zeros((4, 4, 4))
    t[:2, :, 0] = 1
    ok = math.isclose(dice_loss(np.full((4, 4, 4), 0.5), t), 2 / 17 + 2 / 3, abs_tol=1e-12)
    ok &= math.isclose(cross_entropy_fg(np.full((3, 3), 0.5), np.ones((3, 3))), math.log(2), abs_tol=1e-12)
    ok &= math.isclose(mse_center(np.full((2, 2), 0.1), np.zeros((2, 2))), 0.01, abs_tol=1e-12)
    d = np.zeros((2, 2, 2))
    d[..., 0], d[..., 1] = 3, 4
    ok &= math.isclose(l1_offset(d, np.zeros_like(d), np.ones((2, 2), bool)), 3.5, abs_tol=1e-12)
    ok &= math.isclose(total_loss((0.1, 0.2, 0.001, 10), LossWeights()).total, 0.6, abs_tol=1e-12)
    return ok


def _hungarian():
    rng = make_rng(7)
    for _ in range(200):
        n, m = (int(v) for v in rng.integers(1, 6, 2))
        s = rng.random((n, m))
        k = min(n, m)
        best = max(
            sum(s[i, j] for i, j in zip(rows, cols))
            for rows in itertools.combinations(range(n), k)
            for cols in itertools.permutations(range(m), k)
        )
        if abs(hungarian_max(s).total(s) - best) > 1e-9:
            return False
    return True


def _roundtrip():
    for seed in range(5):
        sc = make_scene(seed, ImageSize(256, 192), n_instances=4)
        enc = encode(sc.gt)
        if not np.array_equal(decode(enc.center, enc.offset, sc.gt > 0), relabel_canonical(sc.gt)):
            return False
    return True


def _errors():
    sc = make_scene(3, ImageSize(96, 64), n_instances=2, radius_range=(8, 14), min_px=100)
    e = boundary_explicit_error(sc.gt, sc.gt)
    return not e.fp.any() and not e.fn.any()


def _felz():
    seg = felzenszwalb(np.full((24, 24, 3), 90, np.uint8), FelzParams(min_size=10))
    return int(seg.max()) == 1


def _perturb():
    sc = make_scene(5, ImageSize(160, 120), n_instances=4, radius_range=(10, 20), min_px=200)
    same = perturb(sc.gt, sc.rgb, PerturbConfig.identity())
    cfg = PerturbConfig(p_boundary=1.0, seed=11)
    a, b = perturb(sc.gt, sc.rgb, cfg), perturb(sc.gt, sc.rgb, cfg)
    return (np.array_equal(same, relabel_canonical(sc.gt)) and np.array_equal(a, b)
            and osn_overlap(a, sc.gt)[2] < 1.0)


CHECKS = [
    ("losses", _losses),
    ("hungarian vs brute force", _hungarian),
    ("encode/decode roundtrip", _roundtrip),
    ("error maps identity", _errors),
    ("felzenszwalb constant image", _felz),
    ("perturbation determinism", _perturb),
]


def run(echo=print) -> bool:
    all_ok = True
    for name, fn in CHECKS:
        ok = bool(fn())
        all_ok &= ok
        echo(f"{'PASS' if ok else 'FAIL'}  {name}")
    return all_ok
