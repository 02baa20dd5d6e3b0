import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from beeer.core import make_rng
from beeer.error_maps import boundary_explicit_error
from beeer.losses import (
    LossWeights,
    cross_entropy_fg,
    dice_loss,
    l1_offset,
    mse_center,
    total_loss,
)

TOL = 1e-9


def one_hot(h, w, rng):
    k = rng.integers(0, 4, size=(h, w))
    return (k[..., None] == np.arange(4)).astype(np.float64)


def test_dice_perfect_match():
    t = one_hot(64, 64, make_rng(0))
    assert dice_loss(t, t) < 1e-3


def test_dice_disjoint():
    t = one_hot(64, 64, make_rng(1))
    loss = dice_loss(1.0 - t, t)
    # Per channel 1 - 1/(sum p + sum t + 1), and sum p + sum t = 64 * 64.
    assert math.isclose(loss, 1.0 - 1.0 / 4097.0, abs_tol=TOL)


def test_dice_half_covered_uniform():
    t = np.zeros((4, 4, 4))
    t[:2, :, 0] = 1
    # Channel 0: 1 - (2*4 + 1) / (8 + 8 + 1); channels 1-3: 1 - 1 / (8 + 1).
    expect = (8 / 17 + 3 * 8 / 9) / 4
    assert math.isclose(dice_loss(np.full((4, 4, 4), 0.5), t), expect, abs_tol=TOL)


def test_dice_accepts_error_maps():
    a = np.zeros((12, 12), int)
    a[3:9, 3:9] = 1
    e = boundary_explicit_error(a, np.roll(a, 1, axis=0))
    assert dice_loss(e.stack().astype(float), e) == 0.0
    with pytest.raises(ValueError):
        dice_loss(np.zeros((12, 12, 3)), e)


@given(st.integers(0, 2**32 - 1))
def test_dice_bounds_and_nesting(seed):
    rng = make_rng(seed)
    t = one_hot(10, 10, rng)
    p = rng.random((10, 10, 4))
    assert 0.0 <= dice_loss(p, t) <= 1.0
    # Growing a binary prediction inside the target support never hurts.
    order = rng.permutation(100)
    flat_t = t.reshape(100, 4)
    pred = np.zeros((100, 4))
    prev = dice_loss(pred.reshape(10, 10, 4), t)
    for i in order:
        pred[i] = flat_t[i]
        cur = dice_loss(pred.reshape(10, 10, 4), t)
        assert cur <= prev + 1e-15
        prev = cur


def test_cross_entropy_examples():
    assert math.isclose(cross_entropy_fg(np.full((3, 3), 0.5), np.ones((3, 3))), math.log(2), abs_tol=TOL)
    t = np.array([[1.0, 0.0], [0.0, 1.0]])
    loss = cross_entropy_fg(t, t)
    assert 0 < loss < 2e-7
    assert math.isclose(loss, -math.log1p(-1e-7), rel_tol=1e-9)
    pred = np.array([[0.9, 0.1], [0.8, 0.2]])
    tgt = np.array([[1, 0], [1, 0]])
    expect = -(math.log(0.9) * 2 + math.log(0.8) * 2) / 4
    assert math.isclose(cross_entropy_fg(pred, tgt), expect, abs_tol=TOL)
    with pytest.raises(ValueError):
        cross_entropy_fg(np.zeros((2, 2)), np.zeros((2, 3)))


def test_mse_and_l1_examples():
    a = make_rng(2).random((5, 6))
    assert mse_center(a, a) == 0.0
    assert math.isclose(mse_center(np.full((4, 4), 0.1), np.zeros((4, 4))), 0.01, abs_tol=TOL)
    off = make_rng(3).normal(size=(5, 6, 2))
    fg = make_rng(4).random((5, 6)) < 0.5
    assert l1_offset(off, off, fg) == 0.0
    d = off.copy()
    d[..., 0] += 3
    d[..., 1] -= 4
    assert math.isclose(l1_offset(d, off, fg), 3.5, abs_tol=TOL)
    # Background pixels are ignored; an empty foreground gives 0.
    d[~fg] += 100
    assert math.isclose(l1_offset(d, off, fg), 3.5, abs_tol=TOL)
    assert l1_offset(d, off, np.zeros((5, 6), bool)) == 0.0
    with pytest.raises(ValueError):
        mse_center(np.zeros((2, 2)), np.zeros((3, 2)))
    with pytest.raises(ValueError):
        l1_offset(off, off, np.zeros((4, 6), bool))


def test_total_loss_examples():
    assert total_loss((0, 0, 0, 0)).total == 0.0
    b = total_loss((0.1, 0.2, 0.001, 10), LossWeights())
    assert math.isclose(b.total, 0.6, abs_tol=TOL)
    assert (b.err, b.fg, b.ctr, b.off) == (0.1, 0.2, 0.001, 10.0)
    assert total_loss((1, 1, 1, 1), LossWeights(1, 1, 1, 1)).total == 4.0
    assert LossWeights() == LossWeights(1.0, 1.0, 200.0, 0.01)
    with pytest.raises(ValueError):
        LossWeights(err=float("nan"))


@given(st.lists(st.floats(0, 10), min_size=4, max_size=4), st.integers(0, 3), st.floats(0.1, 10))
def test_total_loss_linear(parts, idx, scale):
    w = LossWeights()
    base = total_loss(parts, w).total
    scaled = list(parts)
    scaled[idx] *= scale
    weight = (w.err, w.fg, w.ctr, w.off)[idx]
    expect = base + weight * parts[idx] * (scale - 1)
    assert math.isclose(total_loss(scaled, w).total, expect, rel_tol=1e-9, abs_tol=1e-9)
