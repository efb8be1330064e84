"""Dataset ingestion: IDX parsing, class subsets, downsampling, encoding prep.

MNIST ships as four IDX files (big-endian magic + dimension header +
unsigned bytes). ``load_mnist`` looks for them in the cache directory
(``QNNKIT_DATA_DIR`` or ``~/.cache/qnnkit/mnist``), reading ``.gz``
variants transparently. When the files are absent and the optional
``mlxtend`` dependency is importable, a balanced 5000-image subset of
MNIST bundled with that package is materialized into real IDX files and
used instead -- smaller than the full 60k/10k distribution, but byte-real
MNIST through the same loader. Drop the official files into the cache
directory to run at full scale.
"""

from __future__ import annotations

import gzip
import logging
import os
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

logger = logging.getLogger(__name__)

DATA_DIR_ENV = "QNNKIT_DATA_DIR"

IMAGES_MAGIC = 0x00000803
LABELS_MAGIC = 0x00000801

TRAIN_IMAGES = "train-images-idx3-ubyte"
TRAIN_LABELS = "train-labels-idx1-ubyte"
TEST_IMAGES = "t10k-images-idx3-ubyte"
TEST_LABELS = "t10k-labels-idx1-ubyte"

# Deterministic train/test split of the bundled 5000-image subset.
_SUBSET_SEED = 20260810
_SUBSET_TEST_PER_CLASS = 100


class IdxFormatError(ValueError):
    """Malformed IDX file."""


@dataclass
class Dataset:
    """Flat image vectors in [0, 1] with integer labels."""

    images: np.ndarray
    labels: np.ndarray
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.images)

    @property
    def num_classes(self) -> int:
        return int(self.labels.max()) + 1 if len(self.labels) else 0


# ---------------------------------------------------------------------------
# IDX parsing / writing
# ---------------------------------------------------------------------------


def _open_maybe_gzip(path):
    path = Path(path)
    if path.suffix == ".gz":
        return gzip.open(path, "rb")
    return open(path, "rb")


def _read_exact(fh, count: int, path, what: str) -> bytes:
    data = fh.read(count)
    if len(data) != count:
        raise IdxFormatError(
            f"{path}: truncated while reading {what} "
            f"(wanted {count} bytes, got {len(data)})"
        )
    return data


def load_idx(images_path, labels_path) -> Dataset:
    """Parse an IDX image/label file pair into a Dataset.

    Pixels are scaled to [0, 1]; images come out flattened with the
    source resolution recorded in ``meta``.
    """
    with _open_maybe_gzip(labels_path) as fh:
        (magic,) = struct.unpack(">I", _read_exact(fh, 4, labels_path, "magic"))
        if magic != LABELS_MAGIC:
            raise IdxFormatError(
                f"{labels_path}: bad label magic 0x{magic:08x}, "
                f"expected 0x{LABELS_MAGIC:08x}"
            )
        (n_labels,) = struct.unpack(">I", _read_exact(fh, 4, labels_path, "count"))
        labels = np.frombuffer(
            _read_exact(fh, n_labels, labels_path, "labels"), dtype=np.uint8
        ).astype(int)

    with _open_maybe_gzip(images_path) as fh:
        (magic,) = struct.unpack(">I", _read_exact(fh, 4, images_path, "magic"))
        if magic != IMAGES_MAGIC:
            raise IdxFormatError(
                f"{images_path}: bad image magic 0x{magic:08x}, "
                f"expected 0x{IMAGES_MAGIC:08x}"
            )
        n_images, rows, cols = struct.unpack(
            ">III", _read_exact(fh, 12, images_path, "dimensions")
        )
        raw = _read_exact(fh, n_images * rows * cols, images_path, "pixels")
        images = np.frombuffer(raw, dtype=np.uint8).reshape(n_images, rows * cols)

    if n_images != n_labels:
        raise IdxFormatError(
            f"count mismatch: {n_images} images vs {n_labels} labels"
        )
    return Dataset(
        images=images.astype(float) / 255.0,
        labels=labels,
        meta={"rows": int(rows), "cols": int(cols), "source_resolution": int(rows)},
    )


def write_idx(images_path, labels_path, images: np.ndarray, labels: np.ndarray) -> None:
    """Write byte images (n, rows, cols) and labels as gzip'd IDX files."""
    images = np.asarray(images, dtype=np.uint8)
    labels = np.asarray(labels, dtype=np.uint8)
    n, rows, cols = images.shape
    with gzip.open(images_path, "wb") as fh:
        fh.write(struct.pack(">IIII", IMAGES_MAGIC, n, rows, cols))
        fh.write(images.tobytes())
    with gzip.open(labels_path, "wb") as fh:
        fh.write(struct.pack(">II", LABELS_MAGIC, n))
        fh.write(labels.tobytes())


# ---------------------------------------------------------------------------
# MNIST resolution
# ---------------------------------------------------------------------------


def default_data_dir() -> Path:
    env = os.environ.get(DATA_DIR_ENV)
    if env:
        return Path(env)
    return Path.home() / ".cache" / "qnnkit" / "mnist"


def _resolve(directory: Path, name: str) -> Path | None:
    for candidate in (directory / name, directory / (name + ".gz")):
        if candidate.exists():
            return candidate
    return None


def _materialize_subset(directory: Path) -> bool:
    """Write IDX files from mlxtend's bundled 5000-image MNIST subset."""
    try:
        from mlxtend.data import mnist_data
    except ImportError:
        return False
    X, y = mnist_data()  # (5000, 784) floats 0..255, 500 per digit
    X = X.reshape(-1, 28, 28).astype(np.uint8)
    y = y.astype(np.uint8)

    rng = np.random.default_rng(_SUBSET_SEED)
    test_idx = []
    for digit in range(10):
        members = np.flatnonzero(y == digit)
        test_idx.extend(rng.permutation(members)[:_SUBSET_TEST_PER_CLASS])
    test_mask = np.zeros(len(y), dtype=bool)
    test_mask[test_idx] = True

    directory.mkdir(parents=True, exist_ok=True)
    write_idx(
        directory / (TRAIN_IMAGES + ".gz"),
        directory / (TRAIN_LABELS + ".gz"),
        X[~test_mask],
        y[~test_mask],
    )
    write_idx(
        directory / (TEST_IMAGES + ".gz"),
        directory / (TEST_LABELS + ".gz"),
        X[test_mask],
        y[test_mask],
    )
    (directory / "SOURCE.txt").write_text(
        "Materialized from the mlxtend 5000-image MNIST subset "
        "(500 per digit), split 4000 train / 1000 test with seed "
        f"{_SUBSET_SEED}. Replace these files with the official MNIST "
        "IDX files to run at full scale.\n"
    )
    logger.warning(
        "full MNIST not found in %s; using the bundled 5000-image subset", directory
    )
    return True


def mnist_available(data_dir=None) -> bool:
    directory = Path(data_dir) if data_dir else default_data_dir()
    if all(
        _resolve(directory, n)
        for n in (TRAIN_IMAGES, TRAIN_LABELS, TEST_IMAGES, TEST_LABELS)
    ):
        return True
    try:
        import mlxtend.data  # noqa: F401

        return True
    except ImportError:
        return False


def load_mnist(data_dir=None, split: str = "train") -> Dataset:
    """Load an MNIST split from the cache directory (materializing if needed)."""
    if split not in ("train", "test"):
        raise ValueError(f"split must be 'train' or 'test', got {split!r}")
    directory = Path(data_dir) if data_dir else default_data_dir()
    names = (TRAIN_IMAGES, TRAIN_LABELS) if split == "train" else (TEST_IMAGES, TEST_LABELS)
    paths = [_resolve(directory, n) for n in names]
    if not all(paths):
        if not _materialize_subset(directory):
            raise FileNotFoundError(
                f"MNIST IDX files not found in {directory} and the optional "
                f"mlxtend fallback is not installed. Either place "
                f"{TRAIN_IMAGES}[.gz] etc. there (set ${DATA_DIR_ENV} to change "
                f"the location) or `pip install qnnkit[mnist]`."
            )
        paths = [_resolve(directory, n) for n in names]
    ds = load_idx(paths[0], paths[1])
    ds.meta["split"] = split
    ds.meta["data_dir"] = str(directory)
    return ds


# ---------------------------------------------------------------------------
# transforms
# ---------------------------------------------------------------------------


def select_subset(ds: Dataset, classes) -> Dataset:
    """Keep only ``classes``, relabelled to 0..k-1 by list position."""
    classes = list(classes)
    if not classes:
        raise ValueError("class list must be non-empty")
    if len(set(classes)) != len(classes):
        raise ValueError(f"classes must be distinct, got {classes}")
    if any(c < 0 or c > 9 for c in classes):
        raise ValueError(f"classes must be digits 0..9, got {classes}")
    mask = np.isin(ds.labels, classes)
    remap = {c: i for i, c in enumerate(classes)}
    labels = np.array([remap[c] for c in ds.labels[mask]], dtype=int)
    meta = dict(ds.meta, class_subset=classes)
    return Dataset(ds.images[mask], labels, meta)


_CROP_FOR = {4: 28, 8: 24, 16: 16}


def downsample_image(image: np.ndarray, target: int) -> np.ndarray:
    """Average-pool one 28x28 image to target x target.

    28 is not divisible by 8 or 16, so those targets first center-crop to
    the largest divisible square (24 and 16).
    """
    if target not in _CROP_FOR:
        raise ValueError(f"unsupported target resolution {target}, pick 4, 8 or 16")
    image = np.asarray(image, dtype=float).reshape(28, 28)
    crop = _CROP_FOR[target]
    off = (28 - crop) // 2
    cropped = image[off : off + crop, off : off + crop]
    tile = crop // target
    return cropped.reshape(target, tile, target, tile).mean(axis=(1, 3))


def downsample(ds: Dataset, target: int) -> Dataset:
    """Downsample every image of a 28x28 dataset; output stays in [0, 1]."""
    if target not in _CROP_FOR:
        raise ValueError(f"unsupported target resolution {target}, pick 4, 8 or 16")
    if ds.meta.get("rows", 28) != 28:
        raise ValueError("downsample expects 28x28 source images")
    images = ds.images.reshape(-1, 28, 28)
    crop = _CROP_FOR[target]
    off = (28 - crop) // 2
    cropped = images[:, off : off + crop, off : off + crop]
    tile = crop // target
    pooled = cropped.reshape(-1, target, tile, target, tile).mean(axis=(2, 4))
    meta = dict(ds.meta, target_resolution=target, rows=target, cols=target)
    return Dataset(pooled.reshape(len(ds.images), target * target), ds.labels.copy(), meta)


def prepare(ds: Dataset, encoding: str = "amplitude") -> Dataset:
    """Make vectors model-ready for the given encoding.

    Amplitude: L2-normalize each row (scales recorded in meta); an
    all-zero image becomes the uniform unit vector and is logged.
    Probability: clamp into [0, 1].
    """
    images = np.asarray(ds.images, dtype=float)
    if encoding == "amplitude":
        scales = np.linalg.norm(images, axis=1)
        zero_rows = np.flatnonzero(scales == 0)
        if len(zero_rows):
            logger.warning(
                "%d all-zero image(s) replaced by the uniform vector", len(zero_rows)
            )
        safe = np.where(scales == 0, 1.0, scales)
        out = images / safe[:, None]
        dim = images.shape[1]
        out[zero_rows] = 1.0 / np.sqrt(dim)
        meta = dict(ds.meta, normalization="amplitude", scales=scales)
    elif encoding == "probability":
        out = np.clip(images, 0.0, 1.0)
        meta = dict(ds.meta, normalization="probability")
    else:
        raise ValueError(f"unknown encoding {encoding!r}")
    return Dataset(out, ds.labels.copy(), meta)


def mnist_task(
    classes, resolution: int, data_dir=None
) -> tuple[Dataset, Dataset]:
    """Convenience pipeline: load, subset, downsample, amplitude-prepare."""
    out = []
    for split in ("train", "test"):
        ds = load_mnist(data_dir, split)
        ds = select_subset(ds, classes)
        ds = downsample(ds, resolution)
        out.append(prepare(ds, "amplitude"))
    return out[0], out[1]


# ---------------------------------------------------------------------------
# synthetic data
# ---------------------------------------------------------------------------


def make_xor_dataset(n: int = 300, seed: int = 0, spread: float = 0.08) -> Dataset:
    """Two-class XOR blobs embedded for amplitude encoding.

    Points cluster near the four corners of [0, 1]^2; the label is the
    XOR of the corner coordinates. Each point (u, v) is embedded as
    (u, v, 1-u, 1-v), which keeps the complement information that plain
    normalization would otherwise destroy.
    """
    rng = np.random.default_rng(seed)
    corners = rng.integers(0, 2, size=(n, 2))
    centers = np.where(corners == 1, 0.85, 0.15)
    uv = np.clip(centers + rng.normal(0.0, spread, size=(n, 2)), 0.0, 1.0)
    images = np.concatenate([uv, 1.0 - uv], axis=1)
    labels = (corners[:, 0] ^ corners[:, 1]).astype(int)
    return Dataset(images, labels, {"kind": "xor", "seed": seed, "spread": spread})
