"""Fixed-step RK4 integration and relaxation to the rotating-frame steady state."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .dynamics import (CostKind, GpeParams, NudgeSpec, Nonlinearity, Trainables, effective_potential,
                       nudge_drive)
from .lattice import Lattice


class IntegrationDiverged(RuntimeError):
    def __init__(self, step, msg=None):
        self.step = step
        super().__init__(msg or f"integration produced non-finite values at step {step}")


@dataclass(frozen=True)
class RelaxConfig:
    dt: float = 0.1
    max_steps: int = 5000
    residual_tol: float = 1e-9

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.max_steps < 0 or self.residual_tol < 0:
            raise ValueError("max_steps and residual_tol must be non-negative")

    def check_budget(self, gamma: float) -> bool:
        """Warn when the time budget is shorter than ten damping times."""
        if gamma > 0 and self.dt * self.max_steps < 10.0 / gamma:
            warnings.warn(
                f"relaxation budget dt*max_steps={self.dt * self.max_steps:g} < 10/gamma={10 / gamma:g}",
                RuntimeWarning, stacklevel=2)
            return False
        return True


@dataclass
class SteadyState:
    psi: np.ndarray
    residual: float
    steps_used: int
    converged: bool


def rk4_step(psi, rhs, dt, k1=None):
    """Classical RK4 update; k1 = rhs(psi) may be supplied if already known."""
    # overflow is detected below and reported as divergence
    with np.errstate(over="ignore", invalid="ignore"):
        if k1 is None:
            k1 = rhs(psi)
        k2 = rhs(psi + 0.5 * dt * k1)
        k3 = rhs(psi + 0.5 * dt * k2)
        k4 = rhs(psi + dt * k3)
        out = psi + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    if not np.all(np.isfinite(out)):
        raise IntegrationDiverged(None, "RK4 step produced non-finite values")
    return out


def relax(initial, rhs, config: RelaxConfig = RelaxConfig()) -> SteadyState:
    """Integrate d psi/dt = rhs(psi) until max|rhs| <= tol or the step budget runs out.

    Non-convergence is reported through ``converged``, divergence raises.
    """
    psi = np.array(initial, dtype=np.complex128)
    step = 0
    while True:
        with np.errstate(over="ignore", invalid="ignore"):
            k1 = rhs(psi)
        if not np.all(np.isfinite(k1)):
            raise IntegrationDiverged(step)
        residual = float(np.max(np.abs(k1))) if k1.size else 0.0
        if residual <= config.residual_tol or step >= config.max_steps:
            break
        try:
            psi = rk4_step(psi, rhs, config.dt, k1=k1)
        except IntegrationDiverged:
            raise IntegrationDiverged(step + 1) from None
        step += 1
    return SteadyState(psi, residual, step, residual <= config.residual_tol)


def _rows(a, batch_shape, width, dtype):
    return np.ascontiguousarray(np.broadcast_to(a, (*batch_shape, width)).reshape(-1, width), dtype=dtype)


def relax_gpe(lat: Lattice, params: GpeParams, trainables: Trainables, pump,
              config: RelaxConfig = RelaxConfig(), initial=None,
              nudge: NudgeSpec | None = None) -> SteadyState:
    """Compiled relaxation of the free (nudge=None) or nudged lattice GPE.

    Same fixed point and step sequence as ``relax`` with kappa_free/kappa_nudged,
    but every batch row stops on its own residual. Leading axes of ``pump``,
    ``initial``, ``trainables.V`` and ``nudge.target`` broadcast against each other.
    """
    pump = lat.check_field(pump)
    V = effective_potential(params, trainables, lat)
    n = lat.size
    shapes = [pump.shape[:-1], V.shape[:-1]]
    if initial is not None:
        shapes.append(lat.check_field(initial).shape[:-1])
    out_idx = np.asarray(lat.output_region, dtype=np.int64)
    nudge_code = _kernels.NUDGE_NONE
    beta = 0.0
    target = np.zeros(len(out_idx))
    if nudge is not None and nudge.beta != 0:
        beta = float(nudge.beta)
        if nudge.frozen_at is not None:
            # frozen error factor is a constant drive: fold it into the pump
            pump = pump + nudge_drive(np.zeros(pump.shape, complex), nudge, lat)
            shapes.append(pump.shape[:-1])
        else:
            nudge_code = _kernels.NUDGE_MSE if nudge.cost_kind is CostKind.MSE else _kernels.NUDGE_CCE
            target = nudge.target
            shapes.append(target.shape[:-1])
    batch_shape = np.broadcast_shapes(*shapes)
    B = int(np.prod(batch_shape, dtype=np.int64))

    psi = (np.zeros((B, n), np.complex128) if initial is None
           else np.array(_rows(initial, batch_shape, n, np.complex128)))
    Vb = _rows(V, batch_shape, n, np.float64)
    Pb = _rows(pump, batch_shape, n, np.complex128)
    tb = _rows(target, batch_shape, len(out_idx), np.float64)
    nl = _kernels.NL_DENSITY if params.nonlinearity is Nonlinearity.DENSITY else _kernels.NL_SATURATION

    steps = np.zeros(B, np.int64)
    residual = np.zeros(B, np.float64)
    status = np.zeros(B, np.int64)
    _kernels.relax_batch(psi, Vb, Pb, lat.rows, lat.cols, nl,
                         float(params.g), float(params.gamma), nudge_code, beta, out_idx, tb,
                         float(config.dt), int(config.max_steps), float(config.residual_tol),
                         steps, residual, status)
    if status.any():
        b = int(np.argmax(status))
        raise IntegrationDiverged(int(steps[b]), f"relaxation of batch row {b} diverged at step {steps[b]}")
    psi = psi.reshape(*batch_shape, n)
    return SteadyState(psi, float(residual.max()) if B else 0.0, int(steps.max()) if B else 0,
                       bool(np.all(residual <= config.residual_tol)))
