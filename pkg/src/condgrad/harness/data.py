"""Datasets: IDX (MNIST container) files, a bundled MNIST subset, synthetics."""
import gzip
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..exceptions import IdxFormatError
from ..network import Batch

IMAGE_MAGIC = 0x00000803
LABEL_MAGIC = 0x00000801

DATA_DIR = Path(__file__).resolve().parent.parent / "data"
MNIST_FILES = {
    "train_images": DATA_DIR / "mnist4k-train-images-idx3-ubyte.gz",
    "train_labels": DATA_DIR / "mnist4k-train-labels-idx1-ubyte.gz",
    "test_images": DATA_DIR / "mnist1k-test-images-idx3-ubyte.gz",
    "test_labels": DATA_DIR / "mnist1k-test-labels-idx1-ubyte.gz",
}


@dataclass
class Dataset:
    train: Batch
    test: Batch
    name: str
    normalization: dict = field(default_factory=dict)

    @property
    def n_features(self):
        return self.train.inputs.shape[1]

    @property
    def n_classes(self):
        return int(max(self.train.labels.max(), self.test.labels.max())) + 1


def _open(path):
    path = Path(path)
    return gzip.open(path, "rb") if path.suffix == ".gz" else open(path, "rb")


def read_idx(path):
    """Parse one IDX file into a uint8 array of its declared shape."""
    with _open(path) as fh:
        raw = fh.read()
    if len(raw) < 4:
        raise IdxFormatError(f"{path}: file too short for an IDX header")
    magic = struct.unpack(">I", raw[:4])[0]
    if magic not in (IMAGE_MAGIC, LABEL_MAGIC):
        raise IdxFormatError(f"{path}: bad magic number 0x{magic:08x}")
    ndim = magic & 0xFF
    header = 4 + 4 * ndim
    if len(raw) < header:
        raise IdxFormatError(f"{path}: truncated header")
    dims = struct.unpack(f">{ndim}I", raw[4:header])
    count = int(np.prod(dims))
    if len(raw) - header < count:
        raise IdxFormatError(
            f"{path}: truncated payload ({len(raw) - header} of {count} bytes)"
        )
    return np.frombuffer(raw, dtype=np.uint8, count=count, offset=header).reshape(dims)


def write_idx(path, array):
    array = np.asarray(array)
    if array.dtype != np.uint8:
        raise ValueError("IDX writer only handles uint8 payloads")
    magic = IMAGE_MAGIC if array.ndim == 3 else LABEL_MAGIC if array.ndim == 1 else None
    if magic is None:
        raise ValueError("expected a 3-d image stack or a 1-d label vector")
    payload = struct.pack(">I", magic) + struct.pack(f">{array.ndim}I", *array.shape) + array.tobytes()
    path = Path(path)
    with open(path, "wb") as fh:
        if path.suffix == ".gz":
            # no name or mtime in the header keeps gzip output byte-reproducible
            with gzip.GzipFile(filename="", fileobj=fh, mode="wb", mtime=0) as gz:
                gz.write(payload)
        else:
            fh.write(payload)


def load_idx(images_path, labels_path):
    """Load an image/label IDX pair as a :class:`Batch`.

    Pixels are scaled to ``[0, 1]`` and each image is flattened row-major.
    """
    images = read_idx(images_path)
    labels = read_idx(labels_path)
    if images.ndim != 3:
        raise IdxFormatError(f"{images_path}: expected 3-d image data, got {images.ndim}-d")
    if labels.ndim != 1:
        raise IdxFormatError(f"{labels_path}: expected 1-d label data")
    if images.shape[0] != labels.shape[0]:
        raise IdxFormatError(
            f"count mismatch: {images.shape[0]} images vs {labels.shape[0]} labels"
        )
    X = images.reshape(images.shape[0], -1).astype(np.float64) / 255.0
    return Batch(X, labels.astype(np.int64))


def load_mnist(n_train=1000, n_test=1000, seed=0, files=None):
    """Seeded subset of the bundled MNIST sample (4000 train / 1000 test pool)."""
    files = {**MNIST_FILES, **(files or {})}
    train = load_idx(files["train_images"], files["train_labels"])
    test = load_idx(files["test_images"], files["test_labels"])
    rng = np.random.default_rng(seed)
    if n_train > len(train) or n_test > len(test):
        raise ValueError(
            f"requested {n_train}/{n_test} samples, pool has {len(train)}/{len(test)}"
        )
    tr = np.sort(rng.choice(len(train), size=n_train, replace=False))
    te = np.sort(rng.choice(len(test), size=n_test, replace=False))
    return Dataset(
        train.subset(tr),
        test.subset(te),
        name=f"mnist-{n_train}",
        normalization={"method": "minmax", "shift": 0.0, "scale": 1.0 / 255.0},
    )


def _blobs(n, rng, n_classes=3, dim=2, separation=10.0):
    # centers on a circle, nearest pair `separation` std devs apart
    radius = separation / (2.0 * np.sin(np.pi / n_classes))
    angles = 2.0 * np.pi * np.arange(n_classes) / n_classes
    centers = np.zeros((n_classes, dim))
    centers[:, 0] = radius * np.cos(angles)
    centers[:, 1] = radius * np.sin(angles)
    y = np.arange(n) % n_classes
    X = centers[y] + rng.standard_normal((n, dim))
    return X, y


def _spirals(n, rng, noise=0.2, turns=1.5):
    y = np.arange(n) % 2
    t = np.sqrt(rng.uniform(0.05, 1.0, n)) * turns * 2.0 * np.pi
    r = t / (turns * 2.0 * np.pi) * 4.0
    sign = np.where(y == 0, 1.0, -1.0)
    X = np.column_stack([sign * r * np.cos(t), sign * r * np.sin(t)])
    X += noise * rng.standard_normal(X.shape)
    return X, y


def synthetic_dataset(kind, n, seed=0, **kwargs):
    """Seeded labeled dataset with an 80/20 train/test split.

    ``gaussian_blobs``: unit-variance Gaussian classes whose means sit on a
    circle, ``separation`` standard deviations apart (default 10).
    ``two_spirals``: two interleaved noisy spirals, point-symmetric about
    the origin.  Labels alternate, so class counts differ by at most one.
    Features are z-scored with train statistics.
    """
    if n < 10:
        raise ValueError("need at least 10 samples")
    rng = np.random.default_rng(seed)
    if kind == "gaussian_blobs":
        X, y = _blobs(n, rng, **kwargs)
    elif kind == "two_spirals":
        X, y = _spirals(n, rng, **kwargs)
    else:
        raise ValueError(f"unknown synthetic dataset {kind!r}")
    perm = rng.permutation(n)
    n_train = int(round(0.8 * n))
    tr, te = perm[:n_train], perm[n_train:]
    mean = X[tr].mean(axis=0)
    std = X[tr].std(axis=0)
    std[std == 0] = 1.0
    X = (X - mean) / std
    return Dataset(
        Batch(X[tr], y[tr]),
        Batch(X[te], y[te]),
        name=kind,
        normalization={"method": "zscore", "shift": mean.tolist(), "scale": (1.0 / std).tolist()},
    )
