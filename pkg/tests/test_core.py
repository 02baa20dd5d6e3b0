import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from beeer.core import (
    ImageSize,
    connected_components,
    derive_rng,
    dilate,
    disk,
    erode,
    instance_ids,
    make_rng,
    read_depth_png,
    read_label_png,
    read_mask_png,
    read_rgb_png,
    relabel_canonical,
    write_depth_png,
    write_label_png,
    write_mask_png,
    write_rgb_png,
)
from beeer.exceptions import DataError

small_maps = arrays(np.int64, st.tuples(st.integers(1, 12), st.integers(1, 12)), elements=st.integers(0, 6))
small_masks = arrays(bool, st.tuples(st.integers(1, 12), st.integers(1, 12)))


def same_partition(a, b):
    pairs = set(zip(a.ravel().tolist(), b.ravel().tolist()))
    fwd = {}
    back = {}
    for x, y in pairs:
        if fwd.setdefault(x, y) != y or back.setdefault(y, x) != x:
            return False
    return True


def test_image_size():
    s = ImageSize(640, 480)
    assert s.shape == (480, 640)
    assert ImageSize.of(np.zeros((3, 5))) == ImageSize(5, 3)
    with pytest.raises(ValueError):
        ImageSize(0, 4)


def test_connected_components_examples():
    assert connected_components(np.zeros((4, 4), bool)).max() == 0
    one = np.zeros((3, 3), bool)
    one[1, 1] = True
    cc = connected_components(one)
    assert cc.max() == 1 and (cc == 1).sum() == 1
    diag = np.array([[True, False], [False, True]])
    assert connected_components(diag, 4).max() == 2
    assert connected_components(diag, 8).max() == 1


@given(small_masks, st.sampled_from([4, 8]))
def test_connected_components_contiguous_ids(mask, conn):
    cc = connected_components(mask, conn)
    ids = instance_ids(cc)
    assert list(ids) == list(range(1, ids.size + 1))
    assert np.array_equal(cc > 0, mask)


def test_relabel_examples():
    lm = np.array([[3, 3, 0], [7, 0, 7]])
    out = relabel_canonical(lm)
    assert out.tolist() == [[1, 1, 0], [2, 0, 2]]
    assert relabel_canonical(np.zeros((2, 2), int)).max() == 0


def test_relabel_many_ids_uses_same_order():
    rng = np.random.default_rng(3)
    lm = rng.integers(0, 200, size=(30, 30))
    out = relabel_canonical(lm)
    _, first = np.unique(lm.ravel(), return_index=True)
    seen = [v for v in lm.ravel()[np.sort(first)] if v != 0]
    lut = {v: k + 1 for k, v in enumerate(seen)}
    expect = np.vectorize(lambda v: lut.get(v, 0))(lm)
    assert np.array_equal(out, expect)


@given(small_maps)
def test_relabel_partition_and_idempotence(lm):
    out = relabel_canonical(lm)
    assert same_partition(lm, out)
    assert np.array_equal(relabel_canonical(out), out)
    assert np.array_equal(out == 0, lm == 0)
    # First occurrences come in increasing id order.
    flat = out.ravel()
    firsts = [int(v) for i, v in enumerate(flat) if v and v not in flat[:i]]
    assert firsts == list(range(1, len(firsts) + 1))


def test_disk_and_morphology():
    assert disk(0).sum() == 1
    assert disk(1).sum() == 5
    assert disk(2).sum() == 13
    m = np.zeros((9, 9), bool)
    m[4, 4] = True
    assert dilate(m, 2).sum() == 13
    sq = np.ones((5, 5), bool)
    # Outside counts as background, so the border erodes away.
    assert erode(sq, 1).sum() == 9
    assert np.array_equal(dilate(m, 0), m)


def test_rng_reproducible():
    a = make_rng(42).random(10_000)
    b = make_rng(42).random(10_000)
    assert np.array_equal(a, b)
    assert not np.array_equal(derive_rng(42, 0).random(8), derive_rng(42, 1).random(8))
    assert np.array_equal(derive_rng(42, 3).random(8), derive_rng(42, 3).random(8))


def test_png_roundtrips(tmp_path):
    lm = np.array([[0, 1, 65535], [2, 2, 0]])
    write_label_png(lm, tmp_path / "l.png")
    assert np.array_equal(read_label_png(tmp_path / "l.png"), lm)
    with pytest.raises(ValueError):
        write_label_png(np.array([[70000]]), tmp_path / "big.png")

    rgb = np.arange(2 * 3 * 3, dtype=np.uint8).reshape(2, 3, 3)
    write_rgb_png(rgb, tmp_path / "c.png")
    assert np.array_equal(read_rgb_png(tmp_path / "c.png"), rgb)

    depth = np.array([[0, 1500], [65535, 7]], dtype=np.uint16)
    write_depth_png(depth, tmp_path / "d.png")
    assert np.array_equal(read_depth_png(tmp_path / "d.png"), depth)

    mask = np.array([[True, False], [False, True]])
    write_mask_png(mask, tmp_path / "m.png")
    assert np.array_equal(read_mask_png(tmp_path / "m.png"), mask)


def test_png_errors_name_path(tmp_path):
    with pytest.raises(DataError, match="nope.png"):
        read_label_png(tmp_path / "nope.png")
    bad = tmp_path / "bad.png"
    bad.write_bytes(b"not a png at all")
    with pytest.raises(DataError, match="bad.png"):
        read_label_png(bad)
    write_rgb_png(np.zeros((2, 2, 3), np.uint8), tmp_path / "rgb.png")
    with pytest.raises(DataError, match="single-channel"):
        read_label_png(tmp_path / "rgb.png")
