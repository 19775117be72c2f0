#!/usr/bin/env python3
"""Build the desk-scale MNIST split used by the acceptance suite.

Input is the 5,000-image MNIST subset shipped with mlxtend
(mlxtend/data/data/mnist_5k.csv.gz: 784 pixel columns then the label).
Writes a class-stratified 2,000 train / 1,000 test split as IDX files.
"""
import argparse
import gzip
import struct
from pathlib import Path

import numpy as np


def write_idx(images, labels, img_path, lab_path):
    with open(img_path, "wb") as f:
        f.write(struct.pack(">IIII", 0x803, len(images), 28, 28))
        f.write(images.astype(np.uint8).tobytes())
    with open(lab_path, "wb") as f:
        f.write(struct.pack(">II", 0x801, len(labels)))
        f.write(labels.astype(np.uint8).tobytes())


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("csv", type=Path, help="mnist_5k.csv.gz")
    ap.add_argument("--out", type=Path, default=Path("data"))
    ap.add_argument("--train-per-class", type=int, default=200)
    ap.add_argument("--test-per-class", type=int, default=100)
    ap.add_argument("--seed", type=int, default=2019)
    args = ap.parse_args()

    with gzip.open(args.csv, "rt") as f:
        raw = np.loadtxt(f, delimiter=",", dtype=np.int64)
    pixels, labels = raw[:, :-1], raw[:, -1]

    rng = np.random.default_rng(args.seed)
    train, test = [], []
    for c in range(10):
        idx = rng.permutation(np.flatnonzero(labels == c))
        train.extend(idx[: args.train_per_class])
        test.extend(idx[args.train_per_class : args.train_per_class + args.test_per_class])
    train = rng.permutation(train)
    test = rng.permutation(test)

    args.out.mkdir(parents=True, exist_ok=True)
    write_idx(pixels[train], labels[train], args.out / "mnist-train-images.idx", args.out / "mnist-train-labels.idx")
    write_idx(pixels[test], labels[test], args.out / "mnist-test-images.idx", args.out / "mnist-test-labels.idx")
    print(f"train {len(train)}  test {len(test)}  -> {args.out}")


if __name__ == "__main__":
    main()
