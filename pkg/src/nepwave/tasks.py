"""Benchmark construction: XOR chains, MNIST ingestion, PCA and cell tiling."""
from __future__ import annotations

import gzip
import struct
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from .dynamics import CostKind, GpeParams, Nonlinearity
from .lattice import Lattice


@dataclass(frozen=True, eq=False)
class Sample:
    x: np.ndarray
    target: np.ndarray
    label: int | None = None


@dataclass(eq=False)
class Dataset:
    """Column store of samples: X (n, d), targets (n, n_out), labels (n,) or None."""

    X: np.ndarray
    targets: np.ndarray
    labels: np.ndarray | None = None

    def __post_init__(self):
        self.X = np.atleast_2d(np.asarray(self.X, dtype=float))
        self.targets = np.atleast_2d(np.asarray(self.targets, dtype=float))
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=np.int64)
        if len(self.X) != len(self.targets) or (self.labels is not None and len(self.labels) != len(self.X)):
            raise ValueError("X, targets and labels must have the same length")
        if not (np.all(np.isfinite(self.X)) and np.all(np.isfinite(self.targets))):
            raise ValueError("dataset contains non-finite values")

    def __len__(self):
        return len(self.X)

    def __getitem__(self, i) -> Sample:
        return Sample(self.X[i], self.targets[i], None if self.labels is None else int(self.labels[i]))

    def subset(self, idx) -> "Dataset":
        idx = np.asarray(idx, dtype=np.int64)
        return Dataset(self.X[idx], self.targets[idx], None if self.labels is None else self.labels[idx])

    @classmethod
    def from_samples(cls, samples) -> "Dataset":
        samples = list(samples)
        labels = [s.label for s in samples]
        return cls(np.array([s.x for s in samples]), np.array([s.target for s in samples]),
                   None if any(l is None for l in labels) else np.array(labels))


@dataclass(eq=False)
class TaskSpec:
    name: str
    lattice: Lattice
    params: GpeParams
    cost_kind: CostKind
    train: Dataset
    val: Dataset | None = None
    test: Dataset | None = None
    w_init: np.ndarray | float = 1.0
    train_w: bool = True
    pca: "PcaModel | None" = None
    meta: dict = field(default_factory=dict)


# ---------------------------------------------------------------- XOR

class XorVariant(str, Enum):
    NINE = "nine"
    NINE_V_ONLY = "nine-v-only"
    SEVEN_ASYM = "seven-asym"


XOR_INPUTS = np.array([[0, 0], [0, 1], [1, 0], [1, 1]], dtype=float)
XOR_TARGETS = np.array([[0.0], [1.0], [1.0], [0.0]])


def xor_dataset() -> Dataset:
    return Dataset(XOR_INPUTS.copy(), XOR_TARGETS.copy(), XOR_TARGETS[:, 0].astype(int))


def build_xor_task(variant=XorVariant.NINE, g=0.1, gamma=0.1) -> TaskSpec:
    variant = XorVariant(variant)
    if variant is XorVariant.SEVEN_ASYM:
        lat = Lattice.chain(7, [1, 3], [5])
    else:
        lat = Lattice.chain(9, [2, 6], [4])
    params = GpeParams(Nonlinearity.SATURATION, g=g, gamma=gamma)
    w_init = 1.0
    train_w = True
    if variant is XorVariant.NINE_V_ONLY:
        w_init = np.array([1.0, -0.75])
        train_w = False
    return TaskSpec(f"xor-{variant.value}", lat, params, CostKind.MSE, xor_dataset(),
                    w_init=w_init, train_w=train_w)


# ---------------------------------------------------------------- IDX files

class IdxFormatError(ValueError):
    pass


class IdxTruncatedError(IdxFormatError):
    pass


class IdxCountMismatch(ValueError):
    pass


IMAGES_MAGIC = 0x00000803
LABELS_MAGIC = 0x00000801


def _read_bytes(path) -> bytes:
    path = Path(path)
    with open(path, "rb") as fh:
        head = fh.read(2)
    opener = gzip.open if head == b"\x1f\x8b" else open
    with opener(path, "rb") as fh:
        return fh.read()


def _parse_idx(raw: bytes, magic: int, ndim: int, path) -> np.ndarray:
    if len(raw) < 4 + 4 * ndim:
        raise IdxTruncatedError(f"{path}: header truncated")
    got = struct.unpack(">I", raw[:4])[0]
    if got != magic:
        raise IdxFormatError(f"{path}: bad magic number 0x{got:08x}, expected 0x{magic:08x}")
    dims = struct.unpack(f">{ndim}I", raw[4:4 + 4 * ndim])
    body = raw[4 + 4 * ndim:]
    need = int(np.prod(dims))
    if len(body) < need:
        raise IdxTruncatedError(f"{path}: expected {need} data bytes, found {len(body)}")
    return np.frombuffer(body[:need], dtype=np.uint8).reshape(dims)


def load_idx(images_path, labels_path):
    """Read an IDX image/label pair (raw or gzip). Images come back as float grids in [0, 1]."""
    images = _parse_idx(_read_bytes(images_path), IMAGES_MAGIC, 3, images_path)
    labels = _parse_idx(_read_bytes(labels_path), LABELS_MAGIC, 1, labels_path)
    if len(images) != len(labels):
        raise IdxCountMismatch(f"{len(images)} images but {len(labels)} labels")
    return images.astype(np.float64) / 255.0, labels.astype(np.int64)


def write_idx(images_path, labels_path, images, labels):
    """Write uint8 images (n, r, c) and labels (n,) as gzip-compressed IDX files."""
    images = np.asarray(images, dtype=np.uint8)
    labels = np.asarray(labels, dtype=np.uint8)
    with gzip.GzipFile(images_path, "wb", mtime=0) as fh:
        fh.write(struct.pack(">4I", IMAGES_MAGIC, *images.shape))
        fh.write(images.tobytes())
    with gzip.GzipFile(labels_path, "wb", mtime=0) as fh:
        fh.write(struct.pack(">2I", LABELS_MAGIC, len(labels)))
        fh.write(labels.tobytes())


# ---------------------------------------------------------------- PCA

class PcaRankError(ValueError):
    pass


@dataclass(eq=False)
class PcaModel:
    mean: np.ndarray
    components: np.ndarray  # (n_components, n_features), orthonormal rows
    scale_lo: np.ndarray | None = None
    scale_hi: np.ndarray | None = None
    # "maxabs": c / max|c_train| keeps the mean image at zero pump;
    # "minmax": affine map of [min, max] onto [-1, 1]
    scaling: str = "maxabs"

    @property
    def n_components(self) -> int:
        return self.components.shape[0]

    def project(self, images) -> np.ndarray:
        """Raw principal coefficients (no rescaling) of flat vectors or 2D images."""
        x = np.asarray(images, dtype=float)
        if x.shape[-1] != self.mean.size and x.ndim >= 2:
            x = x.reshape(*x.shape[:-2], -1)
        if x.shape[-1] != self.mean.size:
            raise ValueError(f"expected {self.mean.size} features, got {x.shape[-1]}")
        return (x - self.mean) @ self.components.T

    def reconstruct(self, coeffs) -> np.ndarray:
        return np.asarray(coeffs) @ self.components + self.mean

    def to_dict(self) -> dict:
        d = {"mean": self.mean.tolist(), "components": self.components.tolist(), "scaling": self.scaling}
        if self.scale_lo is not None:
            d["scale_lo"] = self.scale_lo.tolist()
            d["scale_hi"] = self.scale_hi.tolist()
        return d

    @classmethod
    def from_dict(cls, d) -> "PcaModel":
        lo = d.get("scale_lo")
        return cls(np.array(d["mean"]), np.array(d["components"]),
                   None if lo is None else np.array(lo), None if lo is None else np.array(d["scale_hi"]),
                   d.get("scaling", "maxabs"))


def pca_fit(vectors, n_components=25, rescale=True, scaling="maxabs") -> PcaModel:
    """Principal axes of mean-centred training vectors.

    Each axis is signed so its largest-magnitude entry is positive. With
    ``rescale`` the training-set coefficient range of every component is
    recorded so that ``pca_transform`` maps it into [-1, 1], either by the
    largest magnitude (zero stays zero) or affinely from [min, max].
    """
    if scaling not in ("maxabs", "minmax"):
        raise ValueError(f"unknown scaling {scaling!r}")
    X = np.asarray(vectors, dtype=float)
    X = X.reshape(len(X), -1)
    if len(X) < n_components:
        raise PcaRankError(f"{len(X)} samples for {n_components} components")
    mean = X.mean(axis=0)
    Xc = X - mean
    _, s, vt = np.linalg.svd(Xc, full_matrices=False)
    tol = s.max(initial=0.0) * max(Xc.shape) * np.finfo(float).eps
    if np.sum(s > tol) < n_components:
        raise PcaRankError(f"covariance rank {int(np.sum(s > tol))} < {n_components} components")
    comps = vt[:n_components].copy()
    flip = np.sign(comps[np.arange(n_components), np.argmax(np.abs(comps), axis=1)])
    comps *= flip[:, None]
    model = PcaModel(mean, comps, scaling=scaling)
    if rescale:
        c = model.project(X)
        model.scale_lo = c.min(axis=0)
        model.scale_hi = c.max(axis=0)
    return model


def pca_transform(model: PcaModel, images) -> np.ndarray:
    c = model.project(images)
    if model.scale_lo is None:
        return c
    if model.scaling == "maxabs":
        m = np.maximum(np.abs(model.scale_lo), np.abs(model.scale_hi))
        return c / np.where(m > 0, m, 1.0)
    span = np.where(model.scale_hi > model.scale_lo, model.scale_hi - model.scale_lo, 1.0)
    return 2.0 * (c - model.scale_lo) / span - 1.0


# ---------------------------------------------------------------- MNIST cells

class CellMappingError(ValueError):
    pass


def cell_lattice(cells: int, cell_edge: int, n_components: int, separators=True) -> Lattice:
    """Row of ``cells`` square cells, each pumped with the full input vector.

    Component c of the input drives node c (row-major) of every cell, the
    output node of cell k is its centre, and with ``separators`` one column
    of blocked nodes sits between neighbouring cells.
    """
    if cell_edge * cell_edge < n_components:
        raise CellMappingError(f"{cell_edge}x{cell_edge} cell cannot hold {n_components} components")
    gap = 1 if separators else 0
    cols = cells * cell_edge + (cells - 1) * gap
    inputs, imap, outputs, blocked = [], [], [], []
    for k in range(cells):
        c0 = k * (cell_edge + gap)
        for c in range(n_components):
            r, cc = divmod(c, cell_edge)
            inputs.append(r * cols + c0 + cc)
            imap.append(c)
        mid = cell_edge // 2
        outputs.append(mid * cols + c0 + mid)
        if gap and k < cells - 1:
            blocked.extend(r * cols + c0 + cell_edge for r in range(cell_edge))
    return Lattice((cell_edge, cols), tuple(inputs), tuple(outputs), frozenset(blocked), tuple(imap))


def balanced_split(labels, classes, n_train, n_val, n_test, seed):
    """Per-class seeded shuffle, then the first n_train / n_val / n_test of each class."""
    rng = np.random.default_rng(seed)
    parts = ([], [], [])
    for c in classes:
        idx = np.flatnonzero(labels == c)
        if len(idx) < n_train + n_val + n_test:
            raise ValueError(f"class {c} has {len(idx)} samples, {n_train + n_val + n_test} requested")
        idx = idx[rng.permutation(len(idx))]
        parts[0].append(idx[:n_train])
        parts[1].append(idx[n_train:n_train + n_val])
        parts[2].append(idx[n_train + n_val:n_train + n_val + n_test])
    return tuple(np.concatenate(p) for p in parts)


def split_counts(samples_per_digit, val_frac=0.1, test_frac=0.1):
    """Validation/test counts per class so that train is an 80/10/10-style share."""
    train_frac = 1.0 - val_frac - test_frac
    n_val = int(round(samples_per_digit * val_frac / train_frac))
    n_test = int(round(samples_per_digit * test_frac / train_frac))
    return samples_per_digit, n_val, n_test


def build_mnist_task(images, labels, digits=(0, 1, 3, 6, 9), cell_edge=5, samples_per_digit=100,
                     n_components=25, g=0.001, gamma=0.1, nonlinearity=Nonlinearity.DENSITY,
                     n_val=None, n_test=None, seed=0, separators=True, downsample=None,
                     input_scale=1.0, scaling="maxabs") -> TaskSpec:
    """Cell-tiled MNIST classifier with one cell and one centre output node per digit.

    ``samples_per_digit`` counts training samples; validation and test sizes
    default to the 10 % shares of an 80/10/10 split. Pump inputs are the PCA
    coefficients mapped to [-input_scale, input_scale] per component.
    """
    digits = tuple(int(d) for d in digits)
    cells = len(digits)
    lat = cell_lattice(cells, cell_edge, n_components, separators)
    labels = np.asarray(labels)
    _, dv, dt = split_counts(samples_per_digit)
    n_val = dv if n_val is None else n_val
    n_test = dt if n_test is None else n_test
    tr, va, te = balanced_split(labels, digits, samples_per_digit, n_val, n_test, seed)

    imgs = np.asarray(images, dtype=float)
    if downsample:
        imgs = _block_mean(imgs, downsample)
    flat = imgs.reshape(len(imgs), -1)
    pca = pca_fit(flat[tr], n_components, scaling=scaling)

    cls_of = {d: k for k, d in enumerate(digits)}

    def make(idx):
        y = np.array([cls_of[int(l)] for l in labels[idx]], dtype=np.int64)
        return Dataset(input_scale * pca_transform(pca, flat[idx]), np.eye(cells)[y], y)

    params = GpeParams(nonlinearity, g=g, gamma=gamma)
    name = f"mnist{cells}"
    return TaskSpec(name, lat, params, CostKind.CCE, make(tr), make(va), make(te), pca=pca,
                    meta={"digits": list(digits), "cell_edge": cell_edge, "seed": seed,
                          "samples_per_digit": samples_per_digit, "input_scale": input_scale, "scaling": scaling})


def _block_mean(images, factor):
    n, h, w = images.shape
    h2, w2 = h // factor, w // factor
    x = images[:, :h2 * factor, :w2 * factor].reshape(n, h2, factor, w2, factor)
    return x.mean(axis=(2, 4))


DEFAULT_MNIST_IMAGES = Path(__file__).resolve().parents[2] / "data" / "mnist5k-images-idx3-ubyte.gz"
DEFAULT_MNIST_LABELS = Path(__file__).resolve().parents[2] / "data" / "mnist5k-labels-idx1-ubyte.gz"
