"""Right-hand side of the discretised driven-dissipative GPE in the rotating frame.

    kappa_i = (i/2) (L psi)_i - i (V_i + f(psi_i) - i gamma) psi_i + P_i

with hbar = m = 1 and unit grid spacing. The nudged right-hand side adds an
output-region drive  -i beta dC/dconj(psi).
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .costs import softmax
from .lattice import Lattice, laplacian

DEFAULT_V_BLOCK = 20.0


class Nonlinearity(str, Enum):
    DENSITY = "density"
    SATURATION = "saturation"


class CostKind(str, Enum):
    MSE = "mse"
    CCE = "cce"


@dataclass(frozen=True, eq=False)
class GpeParams:
    nonlinearity: Nonlinearity = Nonlinearity.SATURATION
    g: float = 0.1
    gamma: float = 0.1
    v_block: float = DEFAULT_V_BLOCK
    # frozen, non-trainable potential added to V (structural disorder)
    background: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "nonlinearity", Nonlinearity(self.nonlinearity))
        if not (np.isfinite(self.g) and np.isfinite(self.gamma)):
            raise ValueError("g and gamma must be finite")
        if self.g < 0 or self.gamma < 0:
            raise ValueError("g and gamma must be non-negative")
        if self.background is not None:
            object.__setattr__(self, "background", np.asarray(self.background, dtype=float))

    def with_(self, **kw) -> "GpeParams":
        return replace(self, **kw)


@dataclass(eq=False)
class Trainables:
    V: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        self.V = np.asarray(self.V, dtype=float)
        self.w = np.asarray(self.w, dtype=float)
        if not (np.all(np.isfinite(self.V)) and np.all(np.isfinite(self.w))):
            raise ValueError("trainables must be finite")

    @classmethod
    def initial(cls, lat: Lattice, w0=1.0) -> "Trainables":
        w = np.broadcast_to(np.asarray(w0, dtype=float), (len(lat.input_sites),)).copy()
        return cls(np.zeros(lat.size), w)

    def copy(self) -> "Trainables":
        return Trainables(self.V.copy(), self.w.copy())

    def vector(self) -> np.ndarray:
        return np.concatenate([self.V, self.w])


@dataclass(frozen=True, eq=False)
class NudgeSpec:
    beta: float
    cost_kind: CostKind
    target: np.ndarray
    # if set, the error factor is frozen at this field instead of the current state
    frozen_at: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "cost_kind", CostKind(self.cost_kind))
        object.__setattr__(self, "target", np.asarray(self.target, dtype=float))
        if not np.isfinite(self.beta):
            raise ValueError("beta must be finite")
        if self.cost_kind is CostKind.CCE:
            t = self.target
            if not (np.all((t == 0) | (t == 1)) and np.all(t.sum(axis=-1) == 1)):
                raise ValueError("CCE target must be one-hot")


def nonlinearity_value(psi, params: GpeParams):
    """Real nonlinear potential f(psi): g|psi|^2 or g/(1+|psi|^2)."""
    n = np.abs(psi) ** 2
    if params.nonlinearity is Nonlinearity.DENSITY:
        return params.g * n
    return params.g / (1.0 + n)


def effective_potential(params: GpeParams, trainables: Trainables, lat: Lattice) -> np.ndarray:
    """Trainable V plus frozen background, with blocked sites overridden by v_block."""
    V = np.asarray(trainables.V, dtype=float)
    if V.shape[-1] != lat.size:
        raise ValueError(f"V has {V.shape[-1]} entries, lattice has {lat.size} nodes")
    if params.background is not None:
        V = V + params.background
    if lat.blocked_sites:
        V = np.where(lat.blocked_mask, params.v_block, V)
    return V


def pump_field(X, trainables: Trainables, lat: Lattice) -> np.ndarray:
    """Delta-localised real pump: P at input site k equals w_k * X[m(k)]."""
    X = np.asarray(X, dtype=float)
    w = np.asarray(trainables.w, dtype=float)
    m = np.asarray(lat.input_map, dtype=np.int64)
    if w.shape[-1] != len(lat.input_sites):
        raise ValueError(f"{w.shape[-1]} pump weights for {len(lat.input_sites)} input sites")
    if m.size and X.shape[-1] <= m.max():
        raise ValueError(f"input of length {X.shape[-1]} does not cover input map (max component {m.max()})")
    batch = np.broadcast_shapes(X.shape[:-1], w.shape[:-1])
    P = np.zeros((*batch, lat.size), dtype=np.complex128)
    P[..., list(lat.input_sites)] = w * X[..., m]
    return P


def kappa_free(psi, params: GpeParams, trainables: Trainables, pump, lat: Lattice) -> np.ndarray:
    psi = lat.check_field(psi)
    pump = lat.check_field(pump)
    V = effective_potential(params, trainables, lat)
    f = nonlinearity_value(psi, params)
    return 0.5j * laplacian(psi, lat) - 1j * (V + f - 1j * params.gamma) * psi + pump


def nudge_drive(psi, spec: NudgeSpec, lat: Lattice) -> np.ndarray:
    """Output-region drive i*beta*(t - e)*psi, e = |psi|^2 (MSE) or softmax(|psi|^2) (CCE)."""
    psi = lat.check_field(psi)
    out = list(lat.output_region)
    drive = np.zeros(psi.shape, dtype=np.complex128)
    if spec.beta == 0:
        return drive
    if spec.target.shape[-1] != len(out):
        raise ValueError(f"target length {spec.target.shape[-1]} != output region size {len(out)}")
    src = psi if spec.frozen_at is None else lat.check_field(spec.frozen_at)
    y = src[..., out]
    n = np.abs(y) ** 2
    err = spec.target - (n if spec.cost_kind is CostKind.MSE else softmax(n))
    drive[..., out] = 1j * spec.beta * err * y
    return drive


def kappa_nudged(psi, params, trainables, pump, spec: NudgeSpec, lat: Lattice) -> np.ndarray:
    k = kappa_free(psi, params, trainables, pump, lat)
    if spec.beta == 0:
        return k
    return k + nudge_drive(psi, spec, lat)
