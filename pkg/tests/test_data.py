"""Data pipeline tests: IDX parsing, subsetting, pooling, preparation."""

import gzip
import struct

import numpy as np
import pytest

from qnnkit.data import (
    Dataset,
    IdxFormatError,
    downsample,
    downsample_image,
    load_idx,
    load_mnist,
    make_xor_dataset,
    prepare,
    select_subset,
    write_idx,
)


@pytest.fixture
def idx_pair(tmp_path):
    """A small synthetic IDX image/label pair on disk."""
    rng = np.random.default_rng(0)
    images = rng.integers(0, 256, size=(10, 28, 28), dtype=np.uint8)
    labels = np.array([0, 1, 2, 3, 4, 5, 6, 7, 8, 9], dtype=np.uint8)
    ipath = tmp_path / "imgs-idx3-ubyte.gz"
    lpath = tmp_path / "labels-idx1-ubyte.gz"
    write_idx(ipath, lpath, images, labels)
    return ipath, lpath, images, labels


# ---------------------------------------------------------------------------
# IDX
# ---------------------------------------------------------------------------


def test_idx_round_trip(idx_pair):
    ipath, lpath, images, labels = idx_pair
    ds = load_idx(ipath, lpath)
    assert ds.images.shape == (10, 784)
    np.testing.assert_allclose(ds.images, images.reshape(10, 784) / 255.0)
    np.testing.assert_array_equal(ds.labels, labels)
    assert ds.meta["rows"] == 28


def test_bad_magic_is_reported_with_observed_value(tmp_path):
    path = tmp_path / "bad-idx3-ubyte"
    path.write_bytes(struct.pack(">IIII", 0xDEADBEEF, 1, 2, 2) + b"\x00" * 4)
    lpath = tmp_path / "labels-idx1-ubyte"
    lpath.write_bytes(struct.pack(">II", 0x00000801, 1) + b"\x00")
    with pytest.raises(IdxFormatError, match="0xdeadbeef"):
        load_idx(path, lpath)


def test_truncated_file_is_detected(tmp_path):
    ipath = tmp_path / "imgs-idx3-ubyte"
    ipath.write_bytes(struct.pack(">IIII", 0x00000803, 2, 28, 28) + b"\x00" * 100)
    lpath = tmp_path / "labels-idx1-ubyte"
    lpath.write_bytes(struct.pack(">II", 0x00000801, 2) + b"\x00\x01")
    with pytest.raises(IdxFormatError, match="truncated"):
        load_idx(ipath, lpath)


def test_count_mismatch_is_detected(tmp_path):
    ipath = tmp_path / "imgs-idx3-ubyte"
    ipath.write_bytes(struct.pack(">IIII", 0x00000803, 2, 2, 2) + b"\x00" * 8)
    lpath = tmp_path / "labels-idx1-ubyte"
    lpath.write_bytes(struct.pack(">II", 0x00000801, 3) + b"\x00\x01\x02")
    with pytest.raises(IdxFormatError, match="count mismatch"):
        load_idx(ipath, lpath)


def test_plain_and_gzip_files_both_load(idx_pair, tmp_path):
    ipath, lpath, images, labels = idx_pair
    raw_i = tmp_path / "plain-idx3-ubyte"
    raw_l = tmp_path / "plain-idx1-ubyte"
    raw_i.write_bytes(gzip.decompress(ipath.read_bytes()))
    raw_l.write_bytes(gzip.decompress(lpath.read_bytes()))
    a = load_idx(ipath, lpath)
    b = load_idx(raw_i, raw_l)
    np.testing.assert_array_equal(a.images, b.images)
    np.testing.assert_array_equal(a.labels, b.labels)


# ---------------------------------------------------------------------------
# subsetting
# ---------------------------------------------------------------------------


def make_toy_dataset():
    rng = np.random.default_rng(3)
    labels = np.repeat(np.arange(10), 20)
    images = rng.uniform(0, 1, size=(200, 16))
    return Dataset(images, labels, {"rows": 4, "cols": 4})


def test_select_two_classes_relabels_by_position():
    ds = select_subset(make_toy_dataset(), [3, 6])
    assert set(ds.labels) == {0, 1}
    assert len(ds) == 40
    assert ds.meta["class_subset"] == [3, 6]


def test_select_preserves_per_class_counts():
    ds = select_subset(make_toy_dataset(), [0, 3, 6, 9])
    counts = np.bincount(ds.labels)
    np.testing.assert_array_equal(counts, [20, 20, 20, 20])


def test_empty_class_list_rejected():
    with pytest.raises(ValueError, match="non-empty"):
        select_subset(make_toy_dataset(), [])


def test_duplicate_classes_rejected():
    with pytest.raises(ValueError, match="distinct"):
        select_subset(make_toy_dataset(), [3, 3])


# ---------------------------------------------------------------------------
# downsampling
# ---------------------------------------------------------------------------


def test_constant_image_stays_constant():
    for k in (4, 8, 16):
        out = downsample_image(np.full((28, 28), 0.7), k)
        np.testing.assert_allclose(out, 0.7, atol=1e-12)


def test_all_zero_image_stays_zero():
    np.testing.assert_array_equal(downsample_image(np.zeros((28, 28)), 4), 0.0)


def test_checkerboard_tile_means():
    # Hand oracle: count the dark cells of each 7x7 tile of an alternating
    # pattern. Tiles whose top-left corner has even parity hold 24 ones of
    # 49 cells, odd parity holds 25.
    board = np.fromfunction(lambda i, j: (i + j) % 2, (28, 28))
    expected = np.empty((4, 4))
    for ti in range(4):
        for tj in range(4):
            tile = board[7 * ti : 7 * ti + 7, 7 * tj : 7 * tj + 7]
            expected[ti, tj] = tile.sum() / 49.0
    assert expected[0, 0] == pytest.approx(24 / 49)
    assert expected[0, 1] == pytest.approx(25 / 49)
    np.testing.assert_allclose(downsample_image(board, 4), expected, atol=1e-12)


def test_pooling_is_mean_preserving_over_the_crop():
    rng = np.random.default_rng(7)
    image = rng.uniform(0, 1, size=(28, 28))
    for k, crop in ((4, 28), (8, 24), (16, 16)):
        off = (28 - crop) // 2
        cropped = image[off : off + crop, off : off + crop]
        pooled = downsample_image(image, k)
        assert pooled.mean() == pytest.approx(cropped.mean(), abs=1e-12)
        assert pooled.max() <= image.max() + 1e-12


def test_unsupported_resolution():
    with pytest.raises(ValueError, match="unsupported target"):
        downsample_image(np.zeros((28, 28)), 5)


def test_dataset_downsample_matches_per_image():
    rng = np.random.default_rng(9)
    images = rng.uniform(0, 1, size=(5, 784))
    ds = Dataset(images, np.arange(5), {"rows": 28, "cols": 28})
    out = downsample(ds, 8)
    assert out.images.shape == (5, 64)
    for i in range(5):
        np.testing.assert_allclose(
            out.images[i].reshape(8, 8), downsample_image(images[i], 8), atol=1e-12
        )


# ---------------------------------------------------------------------------
# preparation
# ---------------------------------------------------------------------------


def test_amplitude_prepare_gives_unit_rows_and_records_scales():
    rng = np.random.default_rng(11)
    ds = Dataset(rng.uniform(0, 1, size=(6, 16)), np.zeros(6, dtype=int))
    out = prepare(ds, "amplitude")
    np.testing.assert_allclose(np.linalg.norm(out.images, axis=1), 1.0, atol=1e-12)
    np.testing.assert_allclose(
        out.meta["scales"], np.linalg.norm(ds.images, axis=1), atol=1e-12
    )


def test_zero_image_falls_back_to_uniform_vector(caplog):
    ds = Dataset(np.zeros((1, 4)), np.zeros(1, dtype=int))
    with caplog.at_level("WARNING", logger="qnnkit.data"):
        out = prepare(ds, "amplitude")
    np.testing.assert_allclose(out.images[0], 0.5)
    assert "all-zero" in caplog.text


def test_probability_prepare_clamps_range():
    ds = Dataset(np.array([[-0.2, 0.5, 1.3]]), np.zeros(1, dtype=int))
    out = prepare(ds, "probability")
    np.testing.assert_array_equal(out.images[0], [0.0, 0.5, 1.0])


# ---------------------------------------------------------------------------
# synthetic XOR
# ---------------------------------------------------------------------------


def test_xor_dataset_shape_and_labels():
    ds = make_xor_dataset(n=200, seed=1)
    assert ds.images.shape == (200, 4)
    assert set(np.unique(ds.labels)) <= {0, 1}
    # complement embedding: columns 2,3 mirror columns 0,1
    np.testing.assert_allclose(ds.images[:, 2:], 1.0 - ds.images[:, :2], atol=1e-12)
    # labels actually follow XOR of the quadrants
    quad = (ds.images[:, :2] > 0.5).astype(int)
    np.testing.assert_array_equal(ds.labels, quad[:, 0] ^ quad[:, 1])


# ---------------------------------------------------------------------------
# MNIST cache + fallback subset
# ---------------------------------------------------------------------------

mlxtend_missing = False
try:
    import mlxtend.data  # noqa: F401
except ImportError:
    mlxtend_missing = True


@pytest.mark.skipif(mlxtend_missing, reason="mlxtend subset source not installed")
def test_subset_materialization_round_trip(tmp_path):
    train = load_mnist(tmp_path, "train")
    test = load_mnist(tmp_path, "test")
    assert len(train) == 4000
    assert len(test) == 1000
    np.testing.assert_array_equal(np.bincount(train.labels), [400] * 10)
    np.testing.assert_array_equal(np.bincount(test.labels), [100] * 10)
    assert train.images.min() >= 0.0 and train.images.max() <= 1.0
    assert (tmp_path / "SOURCE.txt").exists()


@pytest.mark.skipif(mlxtend_missing, reason="mlxtend subset source not installed")
def test_subset_split_is_deterministic(tmp_path):
    a = load_mnist(tmp_path / "one", "train")
    b = load_mnist(tmp_path / "two", "train")
    np.testing.assert_array_equal(a.images, b.images)
    np.testing.assert_array_equal(a.labels, b.labels)


def test_missing_files_error_mentions_env_var(tmp_path, monkeypatch):
    import qnnkit.data as data_mod

    monkeypatch.setattr(data_mod, "_materialize_subset", lambda d: False)
    with pytest.raises(FileNotFoundError, match="QNNKIT_DATA_DIR"):
        load_mnist(tmp_path / "nowhere", "train")
