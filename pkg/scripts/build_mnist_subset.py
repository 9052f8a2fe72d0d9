"""Convert the 10,000 MNIST digits bundled in the npm ``mnist`` package into IDX files.

    npm pack mnist@1.1.0 && tar xzf mnist-1.1.0.tgz
    python scripts/build_mnist_subset.py package/src/digits data/mnist-subset

The npm package stores each digit class as a JSON list of intensities scaled
to [0, 1] with three decimals; ``round(v * 255)`` recovers the original bytes.
The digits are shuffled with a fixed seed and split 8000 / 2000 into
``train-*`` and ``t10k-*`` files named like the MNIST originals.
"""
import argparse
import json
from pathlib import Path

import numpy as np

from digitmt.imaging import save_idx_images, save_idx_labels

SPLIT_SEED = 2051
TRAIN_SIZE = 8000


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("digits_dir", type=Path)
    parser.add_argument("out_dir", type=Path)
    args = parser.parse_args()

    images, labels = [], []
    for digit in range(10):
        values = np.array(json.loads((args.digits_dir / f"{digit}.json").read_text())["data"])
        block = np.rint(values * 255).astype(np.uint8).reshape(-1, 28, 28)
        images.append(block)
        labels.append(np.full(len(block), digit, dtype=np.uint8))
    images = np.concatenate(images)
    labels = np.concatenate(labels)
    order = np.random.default_rng(SPLIT_SEED).permutation(len(labels))
    images, labels = images[order], labels[order]

    args.out_dir.mkdir(parents=True, exist_ok=True)
    save_idx_images(images[:TRAIN_SIZE], args.out_dir / "train-images-idx3-ubyte.gz")
    save_idx_labels(labels[:TRAIN_SIZE], args.out_dir / "train-labels-idx1-ubyte.gz")
    save_idx_images(images[TRAIN_SIZE:], args.out_dir / "t10k-images-idx3-ubyte.gz")
    save_idx_labels(labels[TRAIN_SIZE:], args.out_dir / "t10k-labels-idx1-ubyte.gz")
    print(f"wrote {TRAIN_SIZE} training and {len(labels) - TRAIN_SIZE} test digits to {args.out_dir}")


if __name__ == "__main__":
    main()
