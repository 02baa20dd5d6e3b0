import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from beeer.core import ImageSize, instance_sizes, make_rng, relabel_canonical
from beeer.exceptions import ConfigError, SizeMismatchError, UnknownInstanceError
from beeer.represent import (
    DecodeConfig,
    decode,
    encode,
    encode_centers,
    encode_offsets,
    instance_center,
    nms_centers,
    remove_small,
)
from beeer.synthetic import make_label_map


def test_decode_config_validation():
    with pytest.raises(ConfigError):
        DecodeConfig(nms_window=4)
    with pytest.raises(ConfigError):
        DecodeConfig(nms_window=1)
    with pytest.raises(ConfigError):
        DecodeConfig(center_threshold=1.0)


def test_instance_center_examples():
    lm = np.zeros((5, 5), int)
    lm[0:3, 0:3] = 1
    assert instance_center(lm, 1) == (1.0, 1.0)
    lm = np.zeros((10, 10), int)
    lm[7, 4] = 2
    assert instance_center(lm, 2) == (4.0, 7.0)
    lm = np.zeros((3, 3), int)
    lm[0, 0] = lm[0, 1] = lm[1, 0] = 1
    cx, cy = instance_center(lm, 1)
    assert math.isclose(cx, 1 / 3) and math.isclose(cy, 1 / 3)
    with pytest.raises(UnknownInstanceError):
        instance_center(lm, 5)
    with pytest.raises(UnknownInstanceError):
        instance_center(lm, 0)


def test_encode_centers_examples():
    assert not encode_centers(np.zeros((8, 8), int)).any()
    lm = np.zeros((32, 32), int)
    lm[10:15, 10:15] = 1  # centroid (12, 12)
    c = encode_centers(lm, 8)
    assert c[12, 12] == 1.0
    assert math.isclose(c[12, 20], math.exp(-0.5), rel_tol=1e-12)
    assert math.isclose(c[20, 12], math.exp(-0.5), rel_tol=1e-12)
    assert c.min() >= 0 and c.max() <= 1
    with pytest.raises(ConfigError):
        encode_centers(lm, 0)


def test_encode_centers_combines_by_max():
    lm = np.zeros((20, 40), int)
    lm[9:12, 4:7] = 1
    lm[9:12, 30:33] = 2
    both = encode_centers(lm)
    a = encode_centers(np.where(lm == 1, 1, 0))
    b = encode_centers(np.where(lm == 2, 2, 0))
    assert np.array_equal(both, np.maximum(a, b))


def test_encode_offsets_examples():
    lm = np.zeros((5, 10), int)
    lm[2, 2:9] = 1  # centroid (5, 2)
    off = encode_offsets(lm)
    assert off[2, 2].tolist() == [3.0, 0.0]
    assert off[2, 5].tolist() == [0.0, 0.0]
    assert not off[lm == 0].any()
    assert not encode_offsets(np.zeros((4, 4), int)).any()


@given(st.integers(0, 2**32 - 1))
def test_offsets_point_at_centroid(seed):
    rng = make_rng(seed)
    lm = rng.integers(0, 4, size=(12, 15))
    off = encode_offsets(lm)
    ys, xs = np.mgrid[:12, :15]
    for i in np.unique(lm[lm > 0]):
        m = lm == i
        cx, cy = xs[m].mean(), ys[m].mean()
        assert np.allclose(xs[m] + off[..., 0][m], cx, atol=1e-6)
        assert np.allclose(ys[m] + off[..., 1][m], cy, atol=1e-6)


def bump(shape, x, y, peak, sigma=2.0):
    ys, xs = np.mgrid[: shape[0], : shape[1]]
    return peak * np.exp(-((xs - x) ** 2 + (ys - y) ** 2) / (2 * sigma * sigma))


def brute_local_maxima(c, window, thr):
    """Pixels equal to the max of their clipped window and at least thr."""
    h, w = c.shape
    half = window // 2
    out = []
    for y in range(h):
        for x in range(w):
            v = c[y, x]
            if v < thr:
                continue
            win = c[max(0, y - half):y + half + 1, max(0, x - half):x + half + 1]
            if v == win.max():
                out.append((x, y))
    return set(out)


def test_nms_examples():
    assert nms_centers(np.zeros((10, 10))) == []
    c = bump((20, 20), 9, 6, 0.9)
    assert nms_centers(c) == [(9, 6, 0.9)]
    c = np.maximum(bump((20, 20), 8, 10, 0.9), bump((20, 20), 11, 10, 0.7))
    found = nms_centers(c)
    assert [(x, y) for x, y, _ in found] == [(8, 10)]
    assert (8, 10) in brute_local_maxima(c, 7, 0.3)
    assert (11, 10) not in brute_local_maxima(c, 7, 0.3)


def test_nms_threshold_is_inclusive():
    c = np.zeros((9, 9))
    c[4, 4] = 0.3
    assert nms_centers(c) == [(4, 4, 0.3)]
    c[4, 4] = np.nextafter(0.3, 0)
    assert nms_centers(c) == []


def test_nms_ties_in_raster_order():
    c = np.zeros((20, 30))
    c[15, 3] = 0.8
    c[2, 20] = 0.8
    c[10, 10] = 0.9
    assert [(x, y) for x, y, _ in nms_centers(c)] == [(10, 10), (20, 2), (3, 15)]


def test_nms_plateau_yields_one_center():
    c = np.zeros((12, 12))
    c[5:7, 5:7] = 0.5
    assert [(x, y) for x, y, _ in nms_centers(c)] == [(5, 5)]


@given(st.integers(0, 2**32 - 1), st.sampled_from([3, 5, 7]))
def test_nms_subset_of_local_maxima(seed, window):
    rng = make_rng(seed)
    c = np.zeros((20, 20))
    for _ in range(int(rng.integers(1, 8))):
        c = np.maximum(c, bump(c.shape, *rng.integers(0, 20, 2), round(rng.uniform(0.1, 1), 1)))
    # Coarse quantization produces plateaus and exact ties.
    c = np.round(c, 2)
    cfg = DecodeConfig(nms_window=window)
    found = nms_centers(c, cfg)
    maxima = brute_local_maxima(c, window, cfg.center_threshold)
    half = window // 2
    assert {(x, y) for x, y, _ in found} <= maxima
    for i, (x, y, s) in enumerate(found):
        assert s == c[y, x]
        for x2, y2, _ in found[i + 1:]:
            assert max(abs(x - x2), abs(y - y2)) > half
    scores = [s for _, _, s in found]
    assert scores == sorted(scores, reverse=True)


def test_decode_roundtrip_two_squares():
    lm = np.zeros((256, 256), int)
    lm[40:80, 30:70] = 5
    lm[40:80, 170:210] = 2
    enc = encode(lm, 8)
    out = decode(enc.center, enc.offset, lm > 0)
    assert np.array_equal(out, relabel_canonical(lm))


def test_decode_empty_and_small():
    lm = np.zeros((64, 64), int)
    lm[10:40, 10:40] = 1
    enc = encode(lm)
    assert decode(enc.center, enc.offset, np.zeros((64, 64), bool)).max() == 0
    small = np.zeros((64, 64), int)
    small[5:5 + 499 // 20, 5:25] = 1
    small[5 + 499 // 20, 5:5 + 499 % 20] = 1
    assert (small > 0).sum() == 499
    enc = encode(small)
    assert decode(enc.center, enc.offset, small > 0).max() == 0
    small[5 + 499 // 20, 5 + 499 % 20] = 1
    enc = encode(small)
    assert decode(enc.center, enc.offset, small > 0).max() == 1


def test_decode_no_centers_is_empty():
    fg = np.ones((30, 30), bool)
    out = decode(np.zeros((30, 30)), np.zeros((30, 30, 2)), fg)
    assert out.max() == 0


def test_decode_tie_goes_to_lower_center_index():
    center = np.zeros((40, 60))
    center[20, 10] = 0.9
    center[20, 30] = 0.8
    fg = np.ones((40, 60), bool)
    offset = np.zeros((40, 60, 2))
    ys, xs = np.mgrid[:40, :60]
    # Every pixel points to (20, 20), equidistant from both centers.
    offset[..., 0] = 20 - xs
    offset[..., 1] = 20 - ys
    out = decode(center, offset, fg, DecodeConfig(min_instance_px=1))
    assert np.all(out == 1)


def test_decode_size_mismatch():
    with pytest.raises(SizeMismatchError):
        decode(np.zeros((5, 5)), np.zeros((5, 6, 2)), np.zeros((5, 5), bool))
    with pytest.raises(ValueError):
        decode(np.zeros((5, 5)), np.zeros((5, 5, 3)), np.zeros((5, 5), bool))


@given(st.integers(0, 2**32 - 1))
def test_decode_output_has_no_small_instances(seed):
    rng = make_rng(seed)
    center = np.clip(rng.random((40, 40)) ** 8, 0, 1)
    offset = rng.normal(0, 3, size=(40, 40, 2))
    fg = rng.random((40, 40)) < 0.7
    cfg = DecodeConfig(min_instance_px=40)
    out = decode(center, offset, fg, cfg)
    sizes = instance_sizes(out)[1:]
    assert np.all(sizes[sizes > 0] >= 40)
    assert np.array_equal(out, relabel_canonical(out))
    assert not out[~fg].any()


@given(st.integers(0, 2**32 - 1), st.integers(2, 8))
def test_roundtrip_property(seed, n):
    # Centroid spacing must exceed 2 * nms_window = 14.
    lm = make_label_map(make_rng(seed), ImageSize(200, 160), n, min_px=500, radius_range=(13, 22))
    enc = encode(lm)
    assert np.array_equal(decode(enc.center, enc.offset, lm > 0), relabel_canonical(lm))


def test_remove_small_boundary():
    lm = np.zeros((40, 40), int)
    lm[0:10, 0:10] = 3  # 100 px
    lm[20:30, 20:29] = 4  # 90 px
    out = remove_small(lm, 100)
    assert out.max() == 1 and (out == 1).sum() == 100
