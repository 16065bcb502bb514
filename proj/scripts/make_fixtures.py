#!/usr/bin/env python3
"""Regenerate the committed image and MNIST fixtures under data/.

Images: public-domain / CC0 samples shipped with scikit-image, resized to
128x128 8-bit grayscale and written as binary PGM (P5).

MNIST: the 5000-sample MNIST subset bundled with mlxtend (pip). The first
subset is sorted by class (500 per digit); a seeded shuffle assigns 400 of
each digit to the training split and 100 to the test split, both written in
the original IDX format.
"""
import argparse
import gzip
import io
import pathlib
import struct
import zipfile

import numpy as np


def write_pgm(path, img):
    h, w = img.shape
    with open(path, "wb") as f:
        f.write(b"P5\n%d %d\n255\n" % (w, h))
        f.write(img.astype(np.uint8).tobytes())


def write_idx_images(path, images):
    n = images.shape[0]
    with open(path, "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, n, 28, 28))
        f.write(images.astype(np.uint8).tobytes())


def write_idx_labels(path, labels):
    with open(path, "wb") as f:
        f.write(struct.pack(">II", 0x00000801, labels.shape[0]))
        f.write(labels.astype(np.uint8).tobytes())


def make_images(out):
    from skimage import data, transform

    for name in ("camera", "coins", "moon", "brick"):
        img = getattr(data, name)()
        small = transform.resize(img, (128, 128), anti_aliasing=True, preserve_range=True)
        write_pgm(out / f"{name}.pgm", np.clip(np.rint(small), 0, 255))


def make_mnist(out, wheel):
    with zipfile.ZipFile(wheel) as z:
        raw = z.read("mlxtend/data/data/mnist_5k.csv.gz")
    table = np.genfromtxt(io.BytesIO(gzip.decompress(raw)), delimiter=",")
    images = table[:, :-1].reshape(-1, 28, 28)
    labels = table[:, -1].astype(np.uint8)
    rng = np.random.default_rng(20200720)
    train, test = [], []
    for digit in range(10):
        idx = rng.permutation(np.flatnonzero(labels == digit))
        train.extend(idx[:400])
        test.extend(idx[400:])
    train = rng.permutation(np.array(train))
    test = rng.permutation(np.array(test))
    write_idx_images(out / "train-4k-images-idx3-ubyte", images[train])
    write_idx_labels(out / "train-4k-labels-idx1-ubyte", labels[train])
    write_idx_images(out / "test-1k-images-idx3-ubyte", images[test])
    write_idx_labels(out / "test-1k-labels-idx1-ubyte", labels[test])


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--data", default=str(pathlib.Path(__file__).resolve().parent.parent / "data"))
    ap.add_argument("--mlxtend-wheel", help="path to an mlxtend wheel (pip download mlxtend)")
    args = ap.parse_args()
    root = pathlib.Path(args.data)
    make_images(root / "images")
    if args.mlxtend_wheel:
        make_mnist(root / "mnist", args.mlxtend_wheel)
