"""Numba kernels for the stochastic engines.

Both kernels consume per-step arrays already multiplied by the inverse
temperature: cj = beta * B(s)/2, ch = beta * B(s)/2 * g, and for the
path-integral engine kk = -0.5 * ln tanh(beta * Gamma / P) (the replica
coupling in action units).  The RNG is an inline xorshift64* stream so that
a single 64-bit seed fixes the whole trajectory identically on every worker
and platform; uniforms use the top 53 bits.  Moves with action cost above
_REJECT_CUT are rejected without drawing: acceptance would need the uniform
to fall below exp(-36.75) < 2^-53, under the draw resolution.
"""

import numpy as np
from numba import njit

_INV53 = 1.0 / 9007199254740992.0  # 2^-53
_REJECT_CUT = 36.75


@njit(inline="always")
def _next(state):
    x = state[0]
    x ^= x >> np.uint64(12)
    x = (x ^ (x << np.uint64(25))) & np.uint64(0xFFFFFFFFFFFFFFFF)
    x ^= x >> np.uint64(27)
    state[0] = x
    return (x * np.uint64(2685821657736338717)) >> np.uint64(11)


@njit(inline="always")
def _uniform(state):
    return np.float64(_next(state)) * _INV53


@njit(inline="always")
def _seed_state(seed):
    state = np.empty(1, np.uint64)
    state[0] = np.uint64(seed) ^ np.uint64(0x9E3779B97F4A7C15)
    if state[0] == np.uint64(0):
        state[0] = np.uint64(0x106689D45497FDB5)
    return state


@njit(nogil=True, cache=True)
def metropolis_run(indptr, nbr, ej, h, cj, ch, sweeps, seed):
    """Sequential single-spin-flip Metropolis through the discretized schedule.

    Returns the final +-1 configuration as float64.
    """
    state = _seed_state(seed)
    n = h.shape[0]
    s = np.empty(n, np.float64)
    for i in range(n):
        s[i] = 1.0 if (_next(state) & np.uint64(1)) else -1.0
    for step in range(cj.shape[0]):
        a = cj[step]
        b = ch[step]
        for _ in range(sweeps[step]):
            for i in range(n):
                acc = 0.0
                for k in range(indptr[i], indptr[i + 1]):
                    acc += ej[k] * s[nbr[k]]
                d = -2.0 * s[i] * (a * acc + b * h[i])
                if d <= 0.0:
                    s[i] = -s[i]
                elif d <= _REJECT_CUT and _uniform(state) < np.exp(-d):
                    s[i] = -s[i]
    return s


@njit(nogil=True, cache=True)
def piqmc_run(indptr, nbr, ej, h, cj, ch, kk, sweeps, trotter, seed,
              readout_random):
    """Path-integral Monte Carlo over P imaginary-time replicas.

    One sweep = a local Metropolis pass over every (replica, site) pair plus
    a global pass flipping a site simultaneously in all replicas; the global
    move keeps the chain ergodic when the replica coupling diverges (the
    classical limit Gamma -> 0).  Readout projects one replica: a uniformly
    drawn one when readout_random, else the per-site replica majority.
    """
    state = _seed_state(seed)
    n = h.shape[0]
    p_n = trotter
    s = np.empty((p_n, n), np.float64)
    for p in range(p_n):
        for i in range(n):
            s[p, i] = 1.0 if (_next(state) & np.uint64(1)) else -1.0
    inv_p = 1.0 / p_n
    for step in range(cj.shape[0]):
        a = cj[step] * inv_p
        b = ch[step] * inv_p
        kap = kk[step]
        for _ in range(sweeps[step]):
            for p in range(p_n):
                pm = p - 1 if p > 0 else p_n - 1
                pp = p + 1 if p < p_n - 1 else 0
                for i in range(n):
                    acc = 0.0
                    for k in range(indptr[i], indptr[i + 1]):
                        acc += ej[k] * s[p, nbr[k]]
                    d = -2.0 * s[p, i] * (a * acc + b * h[i]) + 2.0 * kap * s[
                        p, i
                    ] * (s[pm, i] + s[pp, i])
                    if d <= 0.0:
                        s[p, i] = -s[p, i]
                    elif d <= _REJECT_CUT and _uniform(state) < np.exp(-d):
                        s[p, i] = -s[p, i]
            for i in range(n):
                d = 0.0
                for p in range(p_n):
                    acc = 0.0
                    for k in range(indptr[i], indptr[i + 1]):
                        acc += ej[k] * s[p, nbr[k]]
                    d += -2.0 * s[p, i] * (a * acc + b * h[i])
                ok = False
                if d <= 0.0:
                    ok = True
                elif d <= _REJECT_CUT and _uniform(state) < np.exp(-d):
                    ok = True
                if ok:
                    for p in range(p_n):
                        s[p, i] = -s[p, i]
    if readout_random:
        p = int(_uniform(state) * p_n)
        if p >= p_n:
            p = p_n - 1
        return s[p].copy()
    out = np.empty(n, np.float64)
    for i in range(n):
        tot = 0.0
        for p in range(p_n):
            tot += s[p, i]
        out[i] = 1.0 if tot >= 0.0 else -1.0
    return out
