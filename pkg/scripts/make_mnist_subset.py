"""Regenerate the bundled MNIST IDX files from mlxtend's 5000-sample MNIST extract.

    pip install --no-deps mlxtend
    python scripts/make_mnist_subset.py

Writes a 4000-image train pool and a 1000-image test pool (seeded split)
into src/condgrad/data/.
"""
import numpy as np
from mlxtend.data import mnist_data

from condgrad.harness.data import MNIST_FILES, write_idx


def main():
    X, y = mnist_data()
    perm = np.random.default_rng(0).permutation(len(y))
    X = X[perm].astype(np.uint8).reshape(-1, 28, 28)
    y = y[perm].astype(np.uint8)
    write_idx(MNIST_FILES["train_images"], X[:4000])
    write_idx(MNIST_FILES["train_labels"], y[:4000])
    write_idx(MNIST_FILES["test_images"], X[4000:])
    write_idx(MNIST_FILES["test_labels"], y[4000:])


if __name__ == "__main__":
    main()
