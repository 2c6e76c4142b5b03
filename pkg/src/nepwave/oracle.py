"""Brute-force checks of the NEP gradient estimate.

Finite-difference cost gradients with full re-relaxation, numerically probed
Wirtinger Jacobians for the near-equilibrium conditions, and the nonlinearity
reciprocity identity. Only public operations of the other modules are used.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .costs import cost, intensities
from .dynamics import CostKind, GpeParams, Nonlinearity, NudgeSpec, Trainables, kappa_free, kappa_nudged, pump_field
from .lattice import Lattice
from .relax import RelaxConfig, SteadyState, relax_gpe
from .trainer import Contrast, TrainConfig, grad_V, grad_w, run_two_phase

ORACLE_RELAX = RelaxConfig(dt=0.1, max_steps=200_000, residual_tol=1e-11)


class OracleInvalid(RuntimeError):
    """A probe relaxation did not reach steady state, so the FD value is meaningless."""


# ---------------------------------------------------------------- steady states

def wirtinger_jacobians(fn, psi, h=1e-4):
    """A = d fn/d psi and B = d fn/d conj(psi) by central differences.

    ``fn`` maps a complex field (n,) to a complex vector (m,). Real and
    imaginary parts of every node are perturbed separately (2n directions).
    """
    psi = np.asarray(psi, dtype=np.complex128)
    n = psi.shape[-1]
    dx = np.empty((len(fn(psi)), n), complex)
    dy = np.empty_like(dx)
    for j in range(n):
        e = np.zeros(n, complex)
        e[j] = h
        dx[:, j] = (fn(psi + e) - fn(psi - e)) / (2 * h)
        e[j] = 1j * h
        dy[:, j] = (fn(psi + e) - fn(psi - e)) / (2 * h)
    return 0.5 * (dx - 1j * dy), 0.5 * (dx + 1j * dy)


def newton_steady_state(lat: Lattice, params: GpeParams, trainables: Trainables, pump,
                        initial=None, nudge: NudgeSpec | None = None, tol=1e-12, max_iter=50) -> SteadyState:
    """Root of kappa by Newton iteration on the real 2N system.

    Needed where time integration cannot settle, e.g. gamma = 0. Single sample only.
    """
    pump = np.asarray(pump, dtype=np.complex128)
    if pump.ndim != 1:
        raise ValueError("newton_steady_state solves one sample at a time")
    if nudge is None:
        def rhs(p):
            return kappa_free(p, params, trainables, pump, lat)
    else:
        def rhs(p):
            return kappa_nudged(p, params, trainables, pump, nudge, lat)
    psi = np.zeros(lat.size, complex) if initial is None else np.array(initial, dtype=np.complex128)
    n = lat.size
    for it in range(max_iter + 1):
        k = rhs(psi)
        res = float(np.max(np.abs(k)))
        if res <= tol:
            return SteadyState(psi, res, it, True)
        if it == max_iter or not np.isfinite(res):
            break
        A, B = wirtinger_jacobians(rhs, psi, h=1e-6)
        # d kappa = A dpsi + B conj(dpsi), written for (dx, dy)
        Jx, Jy = A + B, 1j * (A - B)
        J = np.block([[Jx.real, Jy.real], [Jx.imag, Jy.imag]])
        try:
            step = np.linalg.solve(J, -np.concatenate([k.real, k.imag]))
        except np.linalg.LinAlgError as e:
            raise OracleInvalid(f"singular Jacobian in Newton solve: {e}") from None
        psi = psi + step[:n] + 1j * step[n:]
    raise OracleInvalid(f"Newton solve did not converge (residual {res:.3g})")


def _solve(lat, params, trainables, pump, relax_config, solver, initial=None, nudge=None):
    if solver is not None:
        pump = np.asarray(pump)
        if pump.ndim == 1:
            return solver(lat, params, trainables, pump, initial=initial, nudge=nudge)
        flat = pump.reshape(-1, lat.size)
        V = np.broadcast_to(trainables.V, pump.shape).reshape(-1, lat.size)
        w = np.broadcast_to(trainables.w, (*pump.shape[:-1], len(lat.input_sites))).reshape(len(flat), -1)
        init = None if initial is None else np.broadcast_to(initial, pump.shape).reshape(-1, lat.size)
        tgt = None if nudge is None else np.broadcast_to(nudge.target, (*pump.shape[:-1], nudge.target.shape[-1])).reshape(len(flat), -1)
        out = []
        for b in range(len(flat)):
            nb_ = None if nudge is None else NudgeSpec(nudge.beta, nudge.cost_kind, tgt[b])
            out.append(solver(lat, params, Trainables(V[b], w[b]), flat[b],
                              initial=None if init is None else init[b], nudge=nb_))
        psi = np.stack([s.psi for s in out]).reshape(pump.shape)
        return SteadyState(psi, max(s.residual for s in out), max(s.steps_used for s in out),
                           all(s.converged for s in out))
    ss = relax_gpe(lat, params, trainables, pump, relax_config, initial=initial, nudge=nudge)
    if not ss.converged:
        raise OracleInvalid(f"probe relaxation not converged (residual {ss.residual:.3g} after {ss.steps_used} steps)")
    return ss


# ---------------------------------------------------------------- finite differences

def _param_list(lat: Lattice, include=("V", "w")):
    out = []
    if "V" in include:
        out += [("V", i) for i in range(lat.size) if i not in lat.blocked_sites]
    if "w" in include:
        out += [("w", k) for k in range(len(lat.input_sites))]
    return out


def _mean_cost(psi, sample, lat, cost_kind):
    readout = intensities(psi[..., list(lat.output_region)])
    return cost(readout, np.asarray(sample.target, dtype=float), cost_kind).mean(axis=-1)


def fd_gradients(trainables: Trainables, sample, params: GpeParams, lat: Lattice, which,
                 eps=1e-4, cost_kind=CostKind.MSE, relax_config=ORACLE_RELAX, solver=None) -> np.ndarray:
    """Central-difference dC/dtheta for every (kind, index) in ``which``.

    C is the mean cost over the rows of ``sample`` at beta = 0. All probes are
    relaxed together as one batch.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    which = list(which)
    P = len(which)
    V = np.repeat(trainables.V[None], 2 * P, axis=0)
    w = np.repeat(np.asarray(trainables.w, float)[None], 2 * P, axis=0)
    for p, (kind, idx) in enumerate(which):
        arr = V if kind == "V" else w
        arr[2 * p, idx] += eps
        arr[2 * p + 1, idx] -= eps
    X = np.atleast_2d(np.asarray(sample.x, dtype=float))
    probes = Trainables(V[:, None, :], w[:, None, :])
    pump = pump_field(X[None], probes, lat)
    ss = _solve(lat, params, probes, pump, relax_config, solver)
    c = _mean_cost(ss.psi, sample, lat, cost_kind)
    return (c[0::2] - c[1::2]) / (2 * eps)


def fd_grad(trainables: Trainables, sample, params: GpeParams, lat: Lattice, which,
            eps=1e-4, cost_kind=CostKind.MSE, relax_config=ORACLE_RELAX, solver=None) -> float:
    """Central difference of the cost with respect to one parameter, e.g. ("V", 3) or ("w", 0)."""
    return float(fd_gradients(trainables, sample, params, lat, [which], eps, cost_kind, relax_config, solver)[0])


def nep_gradients(trainables: Trainables, sample, params: GpeParams, lat: Lattice, which,
                  beta=1e-4, cost_kind=CostKind.MSE, relax_config=ORACLE_RELAX, solver=None,
                  symmetric=False) -> np.ndarray:
    """The NEP update vector (batch-averaged) restricted to ``which``."""
    X = np.asarray(sample.x, dtype=float)
    cfg = TrainConfig(beta=beta, symmetric=symmetric)
    if solver is None:
        c = run_two_phase(sample, trainables, params, lat, cfg, cost_kind, relax_config)
        for s in (c.free, c.nudged, c.nudged_neg):
            if s is not None and not s.converged:
                raise OracleInvalid(f"NEP phase not converged (residual {s.residual:.3g})")
    else:
        pump = pump_field(X, trainables, lat)
        target = np.asarray(sample.target, dtype=float)
        free = _solve(lat, params, trainables, pump, relax_config, solver)
        nudged = [_solve(lat, params, trainables, pump, relax_config, solver, initial=free.psi,
                         nudge=NudgeSpec(b, cost_kind, target)) for b in ((beta, -beta) if symmetric else (beta,))]
        c = Contrast(free, nudged[0], beta, nudged[1] if symmetric else None)
    gV = np.asarray(grad_V(c, lat))
    gw = np.asarray(grad_w(c, X, lat))
    if gV.ndim > 1:
        gV, gw = gV.mean(axis=0), gw.mean(axis=0)
    return np.array([gV[i] if kind == "V" else gw[i] for kind, i in which])


# ---------------------------------------------------------------- comparison

@dataclass
class OracleReport:
    cosine_similarity: float
    max_abs_err: float
    rel_err_l2: float
    table: list = field(default_factory=list)   # (name, nep_grad, fd_grad)

    def format(self) -> str:
        lines = [f"{'param':>8} {'nep':>14} {'fd':>14}"]
        lines += [f"{name:>8} {a:14.6e} {b:14.6e}" for name, a, b in self.table]
        lines.append(f"cosine {self.cosine_similarity:.6f}  max_abs_err {self.max_abs_err:.3e}  "
                     f"rel_err_l2 {self.rel_err_l2:.3e}")
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {"cosine_similarity": self.cosine_similarity, "max_abs_err": self.max_abs_err,
                "rel_err_l2": self.rel_err_l2,
                "table": [{"param": n, "nep": a, "fd": b} for n, a, b in self.table]}


def cosine(a, b) -> float:
    a, b = np.ravel(a), np.ravel(b)
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        return 1.0 if na == nb else 0.0
    return float(np.clip(a @ b / (na * nb), -1.0, 1.0))


def compare_nep_to_oracle(lat: Lattice, params: GpeParams, trainables: Trainables, sample,
                          cost_kind=CostKind.MSE, beta=1e-4, eps=1e-4, relax_config=ORACLE_RELAX,
                          solver=None, include=("V", "w"), max_params=None, rng=None) -> OracleReport:
    """NEP estimate against central differences over all (or a random subset of) parameters."""
    which = _param_list(lat, include)
    if max_params is not None and len(which) > max_params:
        rng = np.random.default_rng(0) if rng is None else rng
        which = [which[i] for i in sorted(rng.choice(len(which), max_params, replace=False))]
    nep = nep_gradients(trainables, sample, params, lat, which, beta, cost_kind, relax_config, solver)
    fd = fd_gradients(trainables, sample, params, lat, which, eps, cost_kind, relax_config, solver)
    err = nep - fd
    nf = np.linalg.norm(fd)
    return OracleReport(cosine(nep, fd), float(np.max(np.abs(err))) if err.size else 0.0,
                        float(np.linalg.norm(err) / nf) if nf > 0 else float(np.linalg.norm(err)),
                        [(f"{k}[{i}]", float(a), float(b)) for (k, i), a, b in zip(which, nep, fd)])


# ---------------------------------------------------------------- near-equilibrium conditions

def jacobian_condition_residual(psi, params: GpeParams, trainables: Trainables, lat: Lattice,
                                pump=None, h=1e-4):
    """(max|B - B^T|, max|A + A^H|) for A = d kappa/d psi, B = d kappa/d conj(psi).

    The first vanishes structurally for the lattice GPE; the second equals
    2*gamma on the diagonal when V is real.
    """
    psi = lat.check_field(psi)
    if not np.all(np.isfinite(psi)):
        raise ValueError("psi must be finite")
    pump = np.zeros(lat.size, complex) if pump is None else pump
    A, B = wirtinger_jacobians(lambda p: kappa_free(p, params, trainables, pump, lat), psi, h)
    return float(np.max(np.abs(B - B.T))), float(np.max(np.abs(A + A.conj().T)))


def _nonlinearity_fn(kind, g):
    if callable(kind) and not isinstance(kind, Nonlinearity):
        return lambda p: kind(p, g)
    kind = Nonlinearity(kind)
    if kind is Nonlinearity.DENSITY:
        return lambda p: g * np.abs(p) ** 2
    return lambda p: g / (1.0 + np.abs(p) ** 2)


def nonlinearity_reciprocity_check(kind, g, samples, h=1e-5) -> float:
    """max |(f + psi df/dpsi) - (conj f + conj(psi) d conj(f)/d conj(psi))| over the samples.

    ``kind`` is a Nonlinearity or a callable f(psi, g); Wirtinger derivatives
    come from central differences.
    """
    f = _nonlinearity_fn(kind, g)
    z = np.asarray(samples, dtype=np.complex128).ravel()
    if z.size == 0:
        return 0.0
    fx = (f(z + h) - f(z - h)) / (2 * h)
    fy = (f(z + 1j * h) - f(z - 1j * h)) / (2 * h)
    df = 0.5 * (fx - 1j * fy)
    # d conj(f) / d conj(psi) = conj(df/dpsi)
    lhs = f(z) + z * df
    rhs = np.conj(f(z)) + np.conj(z) * np.conj(df)
    return float(np.max(np.abs(lhs - rhs)))
