#!/usr/bin/env python3
# Copyright 2026 The spikefl Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Builds the bundled MNIST subset (IDX format) from the npm `mnist` package.

The npm package ships roughly 10k MNIST digits as per-class JSON arrays of
intensities in [0,1] rounded to three decimals. This script restores the 8-bit
pixels, draws a class-balanced train/test split with a fixed seed and writes
the four standard IDX files.

    npm pack mnist && tar xzf mnist-*.tgz
    python3 tools/make_mnist_subset.py package/src/digits data/mnist
"""

import argparse
import json
import os
import random
import struct


def load_digits(digits_dir):
    per_class = []
    for label in range(10):
        with open(os.path.join(digits_dir, f"{label}.json")) as f:
            flat = json.load(f)["data"]
        assert len(flat) % 784 == 0
        images = [
            bytes(round(v * 255) for v in flat[i : i + 784])
            for i in range(0, len(flat), 784)
        ]
        per_class.append(images)
    return per_class


def write_idx_images(path, images):
    with open(path, "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, len(images), 28, 28))
        for img in images:
            f.write(img)


def write_idx_labels(path, labels):
    with open(path, "wb") as f:
        f.write(struct.pack(">II", 0x00000801, len(labels)))
        f.write(bytes(labels))


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("digits_dir")
    parser.add_argument("out_dir")
    parser.add_argument("--train-per-class", type=int, default=200)
    parser.add_argument("--test-per-class", type=int, default=100)
    parser.add_argument("--seed", type=int, default=20241016)
    args = parser.parse_args()

    rng = random.Random(args.seed)
    train, test = [], []
    for label, images in enumerate(load_digits(args.digits_dir)):
        order = list(range(len(images)))
        rng.shuffle(order)
        need = args.train_per_class + args.test_per_class
        if len(order) < need:
            raise SystemExit(f"class {label}: only {len(order)} digits")
        train += [(images[i], label) for i in order[: args.train_per_class]]
        test += [(images[i], label) for i in order[args.train_per_class : need]]
    rng.shuffle(train)
    rng.shuffle(test)

    os.makedirs(args.out_dir, exist_ok=True)
    for name, split in (("train", train), ("t10k", test)):
        write_idx_images(
            os.path.join(args.out_dir, f"{name}-images-idx3-ubyte"),
            [img for img, _ in split],
        )
        write_idx_labels(
            os.path.join(args.out_dir, f"{name}-labels-idx1-ubyte"),
            [lbl for _, lbl in split],
        )
    print(f"wrote {len(train)} train / {len(test)} test samples to {args.out_dir}")


if __name__ == "__main__":
    main()
