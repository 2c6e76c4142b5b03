"""Costs and readout over output-region intensities."""
from __future__ import annotations

import numpy as np


def softmax(z):
    z = np.asarray(z, dtype=float)
    if z.shape[-1] == 0:
        raise ValueError("softmax of an empty vector")
    e = np.exp(z - z.max(axis=-1, keepdims=True))
    return e / e.sum(axis=-1, keepdims=True)


def log_softmax(z):
    z = np.asarray(z, dtype=float)
    if z.shape[-1] == 0:
        raise ValueError("softmax of an empty vector")
    s = z - z.max(axis=-1, keepdims=True)
    return s - np.log(np.exp(s).sum(axis=-1, keepdims=True))


def intensities(psi_out):
    return np.abs(np.asarray(psi_out)) ** 2


def _check_lengths(readout, target):
    readout = np.asarray(readout, dtype=float)
    target = np.asarray(target, dtype=float)
    if readout.shape[-1] != target.shape[-1]:
        raise ValueError(f"readout length {readout.shape[-1]} != target length {target.shape[-1]}")
    return readout, target


def mse_cost(readout, target):
    """0.5 * sum (t - I)^2 over the output region (last axis)."""
    readout, target = _check_lengths(readout, target)
    return 0.5 * np.sum((target - readout) ** 2, axis=-1)


def cce_cost(readout, onehot):
    """-sum t ln softmax(I); equals -ln softmax(I)[k] for true class k."""
    readout, onehot = _check_lengths(readout, onehot)
    if not (np.all((onehot == 0) | (onehot == 1)) and np.all(onehot.sum(axis=-1) == 1)):
        raise ValueError("target is not one-hot")
    return -np.sum(onehot * log_softmax(readout), axis=-1)


def cost(readout, target, kind):
    kind = getattr(kind, "value", kind)
    if kind == "mse":
        return mse_cost(readout, target)
    if kind == "cce":
        return cce_cost(readout, target)
    raise ValueError(f"unknown cost kind {kind!r}")


def predict(readout):
    """Argmax over intensities; np.argmax already breaks ties toward the lowest index."""
    readout = np.asarray(readout, dtype=float)
    if readout.shape[-1] == 0:
        raise ValueError("empty readout")
    return np.argmax(readout, axis=-1)


def accuracy(readouts, labels) -> float:
    labels = np.asarray(labels)
    if labels.size == 0:
        return float("nan")
    return float(np.mean(predict(readouts) == labels))
