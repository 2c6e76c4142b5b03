"""Write the 5000-image MNIST subset bundled with mlxtend (500 per digit) as IDX files.

    pip download --no-deps -d /tmp/wheels mlxtend
    python scripts/export_mnist5k.py /tmp/wheels/mlxtend-*.whl data/
"""
import argparse
import gzip
import io
import zipfile
from pathlib import Path

import numpy as np

from nepwave.tasks import write_idx

MEMBER = "mlxtend/data/data/mnist_5k.csv.gz"


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("wheel", type=Path)
    ap.add_argument("out_dir", type=Path)
    args = ap.parse_args()

    raw = gzip.decompress(zipfile.ZipFile(args.wheel).read(MEMBER))
    table = np.loadtxt(io.BytesIO(raw), delimiter=",")
    images = table[:, :-1].reshape(-1, 28, 28).astype(np.uint8)
    labels = table[:, -1].astype(np.uint8)
    args.out_dir.mkdir(parents=True, exist_ok=True)
    write_idx(args.out_dir / "mnist5k-images-idx3-ubyte.gz", args.out_dir / "mnist5k-labels-idx1-ubyte.gz",
              images, labels)
    print(f"wrote {len(images)} images, counts per digit {np.bincount(labels).tolist()}")


if __name__ == "__main__":
    main()
