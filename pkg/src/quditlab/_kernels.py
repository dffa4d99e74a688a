"""Hot loops with a numba implementation and a pure-numpy twin.

Both variants consume identical inputs (including pre-drawn random numbers)
and return identical outputs, so switching backends never changes results.
Set QUDITLAB_JIT=0 to force the numpy path.
"""

import math

import numpy as np

from .config import jit_enabled

NORMAL_SWITCH = 1000.0


# ---------------------------------------------------------------- numpy path

def poisson_numpy(means, uniforms, normals):
    """Poisson deviates by inverse transform (mean < 1e3) or normal approx."""
    means = np.asarray(means, dtype=float).ravel()
    out = np.zeros(means.size, dtype=np.int64)
    for i in range(means.size):
        out[i] = _poisson_one(means[i], uniforms[i], normals[i])
    return out


def _poisson_one(lam, u, z):
    if lam <= 0.0:
        return 0
    if lam >= NORMAL_SWITCH:
        k = math.floor(lam + math.sqrt(lam) * z + 0.5)
        return k if k > 0 else 0
    logp = -lam
    loglam = math.log(lam)
    c = math.exp(logp)
    k = 0
    cap = int(lam + 60.0 * math.sqrt(lam) + 60.0)
    while u > c and k < cap:
        k += 1
        logp += loglam - math.log(k)
        c += math.exp(logp)
    return k


def compile_numpy(amps, plan_cross, plan_keep, plan_ps_first, plan_ps_lo, plan_ps_hi):
    """Batch mesh compilation (see circuit.triangular_phases).

    amps: (n, D) complex. Plan arrays have one entry per MZI, in firing order.
    Returns thetas (n, D-1), input phases (n, D), degenerate flags (n,).
    """
    amps = np.array(amps, dtype=complex, copy=True)
    n, D = amps.shape
    thetas = np.zeros((n, D - 1))
    phis = np.zeros((n, D))
    degenerate = np.zeros(n, dtype=np.bool_)
    for j in range(plan_cross.size):
        cross, keep = plan_cross[j], plan_keep[j]
        ps_is_cross = plan_ps_first[j]
        ps = cross if ps_is_cross else keep
        nops = keep if ps_is_cross else cross
        u = amps[:, nops]
        w = amps[:, ps]
        au, aw = np.abs(u), np.abs(w)
        both_zero = (au < 1e-300) & (aw < 1e-300)
        degenerate |= both_zero
        if ps_is_cross:
            theta = 2.0 * np.arctan2(au, aw)
            phi = np.angle(u) - np.angle(w)
        else:
            theta = 2.0 * np.arctan2(aw, au)
            phi = np.angle(u) - np.angle(w) + np.pi
        theta = np.where(both_zero, 0.0, theta)
        phi = np.where(both_zero, 0.0, phi)
        thetas[:, j] = theta
        phis[:, plan_ps_lo[j]:plan_ps_hi[j]] += phi[:, None]
        w = w * np.exp(1j * phi)
        s, c = np.sin(theta / 2), np.cos(theta / 2)
        g = np.exp(1j * (theta + np.pi) / 2)
        new_u = g * (s * u + c * w)
        new_w = g * (c * u - s * w)
        amps[:, nops] = new_u
        amps[:, ps] = new_w
        amps[:, cross] = 0.0
    return thetas, np.mod(phis, 2 * np.pi), degenerate


def lhv_max_numpy(weights):
    """Max of sum_{x,y} W[a_x, b_y, x, y] over all deterministic assignments."""
    d, _, ma, mb = weights.shape
    best = -np.inf
    n_alice = d ** ma
    n_bob = d ** mb
    for ia in range(n_alice):
        a = [(ia // d ** x) % d for x in range(ma)]
        for ib in range(n_bob):
            total = 0.0
            for y in range(mb):
                b = (ib // d ** y) % d
                for x in range(ma):
                    total += weights[a[x], b, x, y]
            if total > best:
                best = total
    return best


# ---------------------------------------------------------------- numba path

_JIT_CACHE = {}


def _build_jit():
    import numba

    @numba.njit(cache=True)
    def poisson_one(lam, u, z):
        if lam <= 0.0:
            return 0
        if lam >= 1000.0:
            k = math.floor(lam + math.sqrt(lam) * z + 0.5)
            return k if k > 0 else 0
        logp = -lam
        loglam = math.log(lam)
        c = math.exp(logp)
        k = 0
        cap = int(lam + 60.0 * math.sqrt(lam) + 60.0)
        while u > c and k < cap:
            k += 1
            logp += loglam - math.log(k)
            c += math.exp(logp)
        return k

    @numba.njit(cache=True)
    def poisson(means, uniforms, normals):
        out = np.zeros(means.size, dtype=np.int64)
        for i in range(means.size):
            out[i] = poisson_one(means[i], uniforms[i], normals[i])
        return out

    @numba.njit(cache=True)
    def compile_batch(amps_in, plan_cross, plan_keep, plan_ps_first, plan_ps_lo, plan_ps_hi):
        amps = amps_in.copy()
        n, D = amps.shape
        thetas = np.zeros((n, D - 1))
        phis = np.zeros((n, D))
        degenerate = np.zeros(n, dtype=np.bool_)
        for r in range(n):
            for j in range(plan_cross.size):
                cross = plan_cross[j]
                keep = plan_keep[j]
                ps_is_cross = plan_ps_first[j]
                ps = cross if ps_is_cross else keep
                nops = keep if ps_is_cross else cross
                u = amps[r, nops]
                w = amps[r, ps]
                au = abs(u)
                aw = abs(w)
                theta = 0.0
                phi = 0.0
                if au < 1e-300 and aw < 1e-300:
                    degenerate[r] = True
                elif ps_is_cross:
                    theta = 2.0 * math.atan2(au, aw)
                    phi = math.atan2(u.imag, u.real) - math.atan2(w.imag, w.real)
                else:
                    theta = 2.0 * math.atan2(aw, au)
                    phi = math.atan2(u.imag, u.real) - math.atan2(w.imag, w.real) + math.pi
                thetas[r, j] = theta
                for m in range(plan_ps_lo[j], plan_ps_hi[j]):
                    phis[r, m] += phi
                w = w * np.exp(1j * phi)
                s = math.sin(theta / 2)
                c = math.cos(theta / 2)
                g = np.exp(1j * (theta + math.pi) / 2)
                amps[r, nops] = g * (s * u + c * w)
                amps[r, ps] = g * (c * u - s * w)
                amps[r, cross] = 0.0
        return thetas, np.mod(phis, 2 * np.pi), degenerate

    @numba.njit(cache=True)
    def lhv_max(weights):
        d = weights.shape[0]
        ma = weights.shape[2]
        mb = weights.shape[3]
        best = -np.inf
        n_alice = d ** ma
        n_bob = d ** mb
        a = np.zeros(ma, dtype=np.int64)
        for ia in range(n_alice):
            for x in range(ma):
                a[x] = (ia // d ** x) % d
            for ib in range(n_bob):
                total = 0.0
                for y in range(mb):
                    b = (ib // d ** y) % d
                    for x in range(ma):
                        total += weights[a[x], b, x, y]
                if total > best:
                    best = total
        return best

    return {"poisson": poisson, "compile": compile_batch, "lhv_max": lhv_max}


_NUMPY = {"poisson": poisson_numpy, "compile": compile_numpy, "lhv_max": lhv_max_numpy}


def kernel(name, use_jit=None):
    """Return the backend implementation of `name`."""
    if use_jit is None:
        use_jit = jit_enabled()
    if not use_jit:
        return _NUMPY[name]
    if not _JIT_CACHE:
        _JIT_CACHE.update(_build_jit())
    return _JIT_CACHE[name]
