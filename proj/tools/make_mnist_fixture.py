#!/usr/bin/env python3
"""Write an MNIST subset as IDX files for the smoke test.

The full IDX distribution is not downloadable from the build sandbox, so the
5000-image training subset bundled with mlxtend (500 per digit, raw 0-255
pixels) is converted. Nothing is written when the package is missing.
"""

import gzip
import importlib.util
import pathlib
import struct
import sys


def find_subset():
    spec = importlib.util.find_spec("mlxtend")
    if spec is None or spec.origin is None:
        return None
    path = pathlib.Path(spec.origin).parent / "data" / "data" / "mnist_5k.csv.gz"
    return path if path.exists() else None


def main(out_dir):
    out = pathlib.Path(out_dir)
    images_path = out / "train-images-idx3-ubyte"
    labels_path = out / "train-labels-idx1-ubyte"
    if images_path.exists() and labels_path.exists():
        return 0
    source = find_subset()
    if source is None:
        print("mnist subset not available; smoke test will be skipped")
        return 0

    pixels, labels = [], []
    with gzip.open(source, "rt") as fh:
        for line in fh:
            values = [int(v) for v in line.strip().split(",")]
            if len(values) != 785:
                raise SystemExit(f"{source}: unexpected row width {len(values)}")
            pixels.append(bytes(values[:784]))
            labels.append(values[784])

    out.mkdir(parents=True, exist_ok=True)
    with open(images_path, "wb") as fh:
        fh.write(struct.pack(">IIII", 0x00000803, len(pixels), 28, 28))
        for row in pixels:
            fh.write(row)
    with open(labels_path, "wb") as fh:
        fh.write(struct.pack(">II", 0x00000801, len(labels)))
        fh.write(bytes(labels))
    print(f"wrote {len(pixels)} images to {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1] if len(sys.argv) > 1 else "mnist"))
