#!/usr/bin/env python3
# Copyright 2026 The hcnas Authors.
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
"""Builds the small MNIST IDX fixture used by the test suite.

The source is the 5000-sample MNIST extract (500 per class, sorted by class)
shipped inside the mlxtend wheel. Train takes the first 200 digits of every
class, test the next 100, interleaved class by class.

    python3 tools/make_mnist_fixture.py [--wheel mlxtend.whl] --out tests/data/mnist
"""

import argparse
import glob
import gzip
import os
import struct
import subprocess
import tempfile
import zipfile

CSV_MEMBER = "mlxtend/data/data/mnist_5k.csv.gz"


def find_wheel(explicit):
    if explicit:
        return explicit
    tmp = tempfile.mkdtemp()
    subprocess.check_call(["pip", "download", "mlxtend", "--no-deps", "-d", tmp])
    return glob.glob(os.path.join(tmp, "mlxtend-*.whl"))[0]


def write_idx(path, images, labels, prefix):
    with open(os.path.join(path, prefix + "-images-idx3-ubyte"), "wb") as f:
        f.write(struct.pack(">IIII", 0x803, len(images), 28, 28))
        for img in images:
            f.write(bytes(img))
    with open(os.path.join(path, prefix + "-labels-idx1-ubyte"), "wb") as f:
        f.write(struct.pack(">II", 0x801, len(labels)))
        f.write(bytes(labels))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--wheel")
    ap.add_argument("--out", required=True)
    ap.add_argument("--train-per-class", type=int, default=200)
    ap.add_argument("--test-per-class", type=int, default=100)
    args = ap.parse_args()

    raw = gzip.decompress(zipfile.ZipFile(find_wheel(args.wheel)).read(CSV_MEMBER))
    by_class = {c: [] for c in range(10)}
    for line in raw.decode().strip().split("\n"):
        values = [int(float(v)) for v in line.split(",")]
        by_class[values[-1]].append(values[:-1])

    def take(lo, hi):
        images, labels = [], []
        for i in range(lo, hi):
            for c in range(10):
                images.append(by_class[c][i])
                labels.append(c)
        return images, labels

    os.makedirs(args.out, exist_ok=True)
    ntr, nte = args.train_per_class, args.test_per_class
    write_idx(args.out, *take(0, ntr), "train")
    write_idx(args.out, *take(ntr, ntr + nte), "t10k")


if __name__ == "__main__":
    main()
