"""Compiled RK4 relaxation of the lattice GPE (per-sample, in place).

Mirrors dynamics.kappa_free / kappa_nudged; tests compare both paths.
"""
import numba as nb
import numpy as np

NL_DENSITY = 0
NL_SATURATION = 1
NUDGE_NONE = 0
NUDGE_MSE = 1
NUDGE_CCE = 2

# no 'nnan'/'ninf': the divergence check relies on isfinite
_FASTMATH = {"nsz", "arcp", "contract", "afn", "reassoc"}


@nb.njit(cache=True, fastmath=_FASTMATH)
def _kappa(xr, xi, outr, outi, V, pr, pi, rows, cols, nl, g, gamma, nudge, beta, out_idx, target, sm):
    n = xr.shape[0]
    deg = 2.0 if rows == 1 else 4.0
    for i in range(n):
        r = i // cols
        c = i - r * cols
        ar = -deg * xr[i]
        ai = -deg * xi[i]
        if c > 0:
            ar += xr[i - 1]
            ai += xi[i - 1]
        if c < cols - 1:
            ar += xr[i + 1]
            ai += xi[i + 1]
        if r > 0:
            ar += xr[i - cols]
            ai += xi[i - cols]
        if r < rows - 1:
            ar += xr[i + cols]
            ai += xi[i + cols]
        a2 = xr[i] * xr[i] + xi[i] * xi[i]
        if nl == NL_DENSITY:
            u = V[i] + g * a2
        else:
            u = V[i] + g / (1.0 + a2)
        # (i/2) lap - i u psi - gamma psi + P
        outr[i] = -0.5 * ai + u * xi[i] - gamma * xr[i] + pr[i]
        outi[i] = 0.5 * ar - u * xr[i] - gamma * xi[i] + pi[i]
    if nudge == NUDGE_MSE:
        for q in range(out_idx.shape[0]):
            i = out_idx[q]
            e = beta * (target[q] - (xr[i] * xr[i] + xi[i] * xi[i]))
            outr[i] -= e * xi[i]
            outi[i] += e * xr[i]
    elif nudge == NUDGE_CCE:
        m = -np.inf
        for q in range(out_idx.shape[0]):
            i = out_idx[q]
            sm[q] = xr[i] * xr[i] + xi[i] * xi[i]
            if sm[q] > m:
                m = sm[q]
        s = 0.0
        for q in range(out_idx.shape[0]):
            sm[q] = np.exp(sm[q] - m)
            s += sm[q]
        for q in range(out_idx.shape[0]):
            i = out_idx[q]
            e = beta * (target[q] - sm[q] / s)
            outr[i] -= e * xi[i]
            outi[i] += e * xr[i]


@nb.njit(cache=True, fastmath=_FASTMATH)
def relax_batch(psi, V, pump, rows, cols, nl, g, gamma, nudge, beta, out_idx, target,
                dt, max_steps, tol, steps, residual, status):
    """Relax every row of psi independently; status: 0 ok, 1 diverged (steps holds the step)."""
    B, n = psi.shape
    xr = np.empty(n)
    xi = np.empty(n)
    tr = np.empty(n)
    ti = np.empty(n)
    k1r = np.empty(n)
    k1i = np.empty(n)
    kr = np.empty(n)
    ki = np.empty(n)
    accr = np.empty(n)
    acci = np.empty(n)
    pr = np.empty(n)
    pi = np.empty(n)
    sm = np.empty(out_idx.shape[0])
    h = 0.5 * dt
    for b in range(B):
        for i in range(n):
            xr[i] = psi[b, i].real
            xi[i] = psi[b, i].imag
            pr[i] = pump[b, i].real
            pi[i] = pump[b, i].imag
        Vb = V[b]
        tb = target[b]
        status[b] = 0
        step = 0
        r = 0.0
        while True:
            _kappa(xr, xi, k1r, k1i, Vb, pr, pi, rows, cols, nl, g, gamma, nudge, beta, out_idx, tb, sm)
            r = 0.0
            finite = True
            for i in range(n):
                a = np.sqrt(k1r[i] * k1r[i] + k1i[i] * k1i[i])
                if not np.isfinite(a):
                    finite = False
                if a > r:
                    r = a
            if not finite:
                status[b] = 1
                break
            if r <= tol or step >= max_steps:
                break
            # k2
            for i in range(n):
                accr[i] = k1r[i]
                acci[i] = k1i[i]
                tr[i] = xr[i] + h * k1r[i]
                ti[i] = xi[i] + h * k1i[i]
            _kappa(tr, ti, kr, ki, Vb, pr, pi, rows, cols, nl, g, gamma, nudge, beta, out_idx, tb, sm)
            # k3
            for i in range(n):
                accr[i] += 2.0 * kr[i]
                acci[i] += 2.0 * ki[i]
                tr[i] = xr[i] + h * kr[i]
                ti[i] = xi[i] + h * ki[i]
            _kappa(tr, ti, kr, ki, Vb, pr, pi, rows, cols, nl, g, gamma, nudge, beta, out_idx, tb, sm)
            # k4
            for i in range(n):
                accr[i] += 2.0 * kr[i]
                acci[i] += 2.0 * ki[i]
                tr[i] = xr[i] + dt * kr[i]
                ti[i] = xi[i] + dt * ki[i]
            _kappa(tr, ti, kr, ki, Vb, pr, pi, rows, cols, nl, g, gamma, nudge, beta, out_idx, tb, sm)
            for i in range(n):
                xr[i] += (dt / 6.0) * (accr[i] + kr[i])
                xi[i] += (dt / 6.0) * (acci[i] + ki[i])
            step += 1
        for i in range(n):
            psi[b, i] = complex(xr[i], xi[i])
        steps[b] = step
        residual[b] = r
