"""Two-phase NEP training: free relaxation, nudged relaxation, local updates.

For the lattice GPE the contrast gives the cost gradients directly:

    dC/dV_i = d|psi_i|^2 / d beta
    dC/dw_k = 2 X_{m(k)} Im d psi_{site k} / d beta
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .costs import accuracy, cost, intensities, predict
from .dynamics import CostKind, GpeParams, NudgeSpec, Trainables, pump_field
from .lattice import Lattice
from .relax import IntegrationDiverged, RelaxConfig, SteadyState, relax_gpe
from .tasks import Dataset, Sample

log = logging.getLogger(__name__)


class PhaseDiverged(IntegrationDiverged):
    def __init__(self, phase, step, detail=""):
        self.phase = phase
        super().__init__(step, f"{phase} phase diverged at step {step}{': ' + detail if detail else ''}")


class NonFiniteGradient(FloatingPointError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    beta: float = 0.01
    lr_V: float = 0.1
    lr_w: float = 0.1
    batch_size: int = 4
    epochs: int = 50
    train_V: bool = True
    train_w: bool = True
    rng_seed: int = 0
    symmetric: bool = False      # +-beta central contrast (three relaxations)
    frozen_nudge: bool = False   # error factor frozen at the free state

    def __post_init__(self):
        if self.beta == 0:
            raise ValueError("beta must be non-zero")
        if (self.train_V and self.lr_V < 0) or (self.train_w and self.lr_w < 0):
            raise ValueError("learning rates must be non-negative")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")


@dataclass(eq=False)
class Contrast:
    free: SteadyState
    nudged: SteadyState
    beta_used: float
    nudged_neg: SteadyState | None = None   # only for the symmetric variant

    @property
    def dpsi_dbeta(self) -> np.ndarray:
        if self.nudged_neg is not None:
            return (self.nudged.psi - self.nudged_neg.psi) / (2 * self.beta_used)
        return (self.nudged.psi - self.free.psi) / self.beta_used

    @property
    def dintensity_dbeta(self) -> np.ndarray:
        if self.nudged_neg is not None:
            return (np.abs(self.nudged.psi) ** 2 - np.abs(self.nudged_neg.psi) ** 2) / (2 * self.beta_used)
        return (np.abs(self.nudged.psi) ** 2 - np.abs(self.free.psi) ** 2) / self.beta_used


def _relax_phase(phase, lat, params, trainables, pump, relax_config, initial=None, nudge=None):
    try:
        return relax_gpe(lat, params, trainables, pump, relax_config, initial=initial, nudge=nudge)
    except PhaseDiverged:
        raise
    except IntegrationDiverged as e:
        raise PhaseDiverged(phase, e.step, str(e)) from None


def free_phase(X, trainables, params, lat, relax_config=RelaxConfig()) -> SteadyState:
    """Inference relaxation: input pumps only, beta = 0, zero initial field."""
    return _relax_phase("free", lat, params, trainables, pump_field(X, trainables, lat), relax_config)


def run_two_phase(sample, trainables: Trainables, params: GpeParams, lat: Lattice,
                  config: TrainConfig = TrainConfig(), cost_kind=CostKind.MSE,
                  relax_config: RelaxConfig = RelaxConfig(), free: SteadyState | None = None) -> Contrast:
    """Free relaxation from zero, then nudged relaxation warm-started from the free state.

    ``sample`` is anything with ``x`` and ``target``; both may carry a leading
    batch axis, in which case every row is relaxed independently.
    """
    X = np.asarray(sample.x, dtype=float)
    target = np.asarray(sample.target, dtype=float)
    pump = pump_field(X, trainables, lat)
    if free is None:
        free = _relax_phase("free", lat, params, trainables, pump, relax_config)

    def nudged(beta, phase):
        spec = NudgeSpec(beta, cost_kind, target, free.psi if config.frozen_nudge else None)
        return _relax_phase(phase, lat, params, trainables, pump, relax_config, initial=free.psi, nudge=spec)

    plus = nudged(config.beta, "nudged")
    minus = nudged(-config.beta, "nudged(-beta)") if config.symmetric else None
    return Contrast(free, plus, config.beta, minus)


def grad_V(contrast: Contrast, lat: Lattice) -> np.ndarray:
    """Per-node potential gradient estimate; zero at blocked nodes."""
    g = contrast.dintensity_dbeta
    if lat.blocked_sites:
        g = np.where(lat.blocked_mask, 0.0, g)
    return g


def grad_w(contrast: Contrast, X, lat: Lattice) -> np.ndarray:
    """Per-input-site pump-weight gradient estimate."""
    X = np.asarray(X, dtype=float)
    d = contrast.dpsi_dbeta[..., list(lat.input_sites)]
    return 2.0 * X[..., list(lat.input_map)] * d.imag


def apply_update(trainables: Trainables, g_V, g_w, config: TrainConfig) -> Trainables:
    """Plain SGD step; gradients with a leading batch axis are averaged first."""
    g_V = np.asarray(g_V, dtype=float)
    g_w = np.asarray(g_w, dtype=float)
    if g_V.ndim > 1:
        g_V = g_V.mean(axis=0)
    if g_w.ndim > 1:
        g_w = g_w.mean(axis=0)
    new = trainables.copy()
    if config.train_V:
        if not np.all(np.isfinite(g_V)):
            raise NonFiniteGradient(f"non-finite potential gradient at nodes {np.flatnonzero(~np.isfinite(g_V)).tolist()}")
        new.V = new.V - config.lr_V * g_V
    if config.train_w:
        if not np.all(np.isfinite(g_w)):
            raise NonFiniteGradient(f"non-finite pump-weight gradient at sites {np.flatnonzero(~np.isfinite(g_w)).tolist()}")
        new.w = new.w - config.lr_w * g_w
    return new


@dataclass
class EvalResult:
    loss: float
    accuracy: float
    readouts: np.ndarray
    predictions: np.ndarray
    converged: bool
    per_sample_loss: np.ndarray = field(repr=False, default=None)


def evaluate(data: Dataset, trainables, params, lat, cost_kind=CostKind.MSE,
             relax_config=RelaxConfig(), chunk=256) -> EvalResult:
    """Inference pass (beta switched off); never modifies ``trainables``."""
    readouts, conv = [], True
    for s in range(0, len(data), chunk):
        ss = free_phase(data.X[s:s + chunk], trainables, params, lat, relax_config)
        conv &= ss.converged
        readouts.append(intensities(ss.psi[..., list(lat.output_region)]))
    readouts = np.concatenate(readouts) if readouts else np.zeros((0, len(lat.output_region)))
    losses = cost(readouts, data.targets, cost_kind)
    if CostKind(cost_kind) is CostKind.CCE:
        preds = predict(readouts)
        labels = data.labels if data.labels is not None else np.argmax(data.targets, axis=-1)
        acc = accuracy(readouts, labels)
    else:
        preds = (readouts > 0.5).astype(np.int64)
        acc = float(np.mean(np.all(np.abs(readouts - data.targets) < 0.5, axis=-1))) if len(data) else float("nan")
    return EvalResult(float(np.mean(losses)) if len(data) else float("nan"), acc, readouts, preds, conv, losses)


@dataclass
class EpochMetrics:
    epoch: int
    train_loss: float
    val_loss: float = float("nan")
    val_accuracy: float = float("nan")
    wall_time: float = 0.0
    unconverged: int = 0


class TrainingError(RuntimeError):
    def __init__(self, msg, epoch, sample_ids):
        self.epoch = epoch
        self.sample_ids = sample_ids
        super().__init__(f"{msg} (epoch {epoch}, samples {sample_ids})")


def train(data: Dataset, trainables: Trainables, params: GpeParams, lat: Lattice,
          config: TrainConfig = TrainConfig(), cost_kind=CostKind.MSE,
          relax_config: RelaxConfig = RelaxConfig(), val: Dataset | None = None,
          on_epoch=None, rng=None, start_epoch=0):
    """Mini-batch NEP training. Returns (trainables, [EpochMetrics]).

    ``train_loss`` is the mean free-phase cost seen during the epoch, i.e.
    measured before each batch's update. ``on_epoch(metrics, trainables, rng)``
    is called after every epoch.
    """
    if len(data) == 0:
        raise ValueError("empty training set")
    rng = np.random.default_rng(config.rng_seed) if rng is None else rng
    relax_config.check_budget(params.gamma)
    history = []
    t0 = time.perf_counter()
    for epoch in range(start_epoch, start_epoch + config.epochs):
        order = rng.permutation(len(data))
        losses, unconverged = [], 0
        for s in range(0, len(order), config.batch_size):
            idx = order[s:s + config.batch_size]
            batch = data.subset(idx)
            try:
                c = run_two_phase(Sample(batch.X, batch.targets), trainables, params, lat, config, cost_kind, relax_config)
            except IntegrationDiverged as e:
                raise TrainingError(str(e), epoch, idx.tolist()) from e
            unconverged += int(not c.free.converged) + int(not c.nudged.converged)
            readout = intensities(c.free.psi[..., list(lat.output_region)])
            losses.append(cost(readout, batch.targets, cost_kind))
            try:
                trainables = apply_update(trainables, grad_V(c, lat), grad_w(c, batch.X, lat), config)
            except NonFiniteGradient as e:
                raise TrainingError(str(e), epoch, idx.tolist()) from e
        m = EpochMetrics(epoch + 1, float(np.mean(np.concatenate(losses))), unconverged=unconverged)
        if val is not None and len(val):
            ev = evaluate(val, trainables, params, lat, cost_kind, relax_config)
            m.val_loss, m.val_accuracy = ev.loss, ev.accuracy
        m.wall_time = time.perf_counter() - t0
        log.info("epoch %d train_loss %.5f val_loss %.5f val_acc %.4f", m.epoch, m.train_loss,
                 m.val_loss, m.val_accuracy)
        history.append(m)
        if on_epoch is not None:
            on_epoch(m, trainables, rng)
    return trainables, history
