#!/usr/bin/env python3
"""Convert the digit JSON files of the `mnist` npm package into IDX train/test files.

    npm pack mnist && tar xzf mnist-*.tgz
    python3 tools/make_mnist_subset.py package/src/digits --out data/mnist --test 1000
"""
import argparse
import json
import struct
from pathlib import Path

import numpy as np


def write_idx(path_images, path_labels, images, labels):
    with open(path_images, "wb") as f:
        f.write(struct.pack(">IIII", 2051, len(images), 28, 28))
        f.write(images.astype(np.uint8).tobytes())
    with open(path_labels, "wb") as f:
        f.write(struct.pack(">II", 2049, len(labels)))
        f.write(labels.astype(np.uint8).tobytes())


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("digits", type=Path, help="directory holding 0.json .. 9.json")
    ap.add_argument("--out", type=Path, required=True)
    ap.add_argument("--test", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--skip-train", action="store_true")
    args = ap.parse_args()

    images, labels = [], []
    for d in range(10):
        data = np.asarray(json.loads((args.digits / f"{d}.json").read_text())["data"], dtype=np.float64)
        block = data.reshape(-1, 784)
        images.append(np.rint(block * 255.0).clip(0, 255))
        labels.append(np.full(len(block), d))
    images = np.concatenate(images)
    labels = np.concatenate(labels)
    order = np.random.default_rng(args.seed).permutation(len(labels))
    images, labels = images[order], labels[order]

    args.out.mkdir(parents=True, exist_ok=True)
    n = args.test
    write_idx(args.out / "test-images.idx3-ubyte", args.out / "test-labels.idx1-ubyte", images[:n], labels[:n])
    if not args.skip_train:
        write_idx(args.out / "train-images.idx3-ubyte", args.out / "train-labels.idx1-ubyte", images[n:], labels[n:])
    print(f"{len(labels)} digits: {n} test, {len(labels) - n} train")


if __name__ == "__main__":
    main()
