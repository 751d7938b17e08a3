"""Compiled inner loops: the memory recurrence, its adjoint, and the fused annealing sweep."""
import math

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def memory_scan(u, v, update_first):
    n, m = u.shape
    z = np.zeros((n, m))
    prev = np.zeros(m)
    for t in range(n):
        if t > 0 or update_first:
            for i in range(m):
                prev[i] = (1.0 - u[t, i]) * (1.0 - v[t, i]) * prev[i] + u[t, i]
        z[t] = prev
    return z


@njit(cache=True, nogil=True)
def memory_scan_adjoint(u, v, z, dz, update_first):
    """Backpropagate ``dz`` (direct loss gradient on each z_t) through the recurrence.

    Returns gradients with respect to u and v.
    """
    n, m = u.shape
    du = np.zeros((n, m))
    dv = np.zeros((n, m))
    carry = np.zeros(m)
    for t in range(n - 1, -1, -1):
        if t == 0 and not update_first:
            break
        for i in range(m):
            g = dz[t, i] + carry[i]
            zp = z[t - 1, i] if t > 0 else 0.0
            du[t, i] = g * (1.0 - (1.0 - v[t, i]) * zp)
            dv[t, i] = -g * (1.0 - u[t, i]) * zp
            carry[i] = g * (1.0 - u[t, i]) * (1.0 - v[t, i])
    return du, dv


@njit(cache=True, nogil=True)
def _act(a, beta):
    # beta < 0 selects the hard threshold (1 when a < 0.5).
    if beta < 0.0:
        return 1.0 if a < 0.5 else 0.0
    return 1.0 / (1.0 + math.exp(min(beta * (a - 0.5), 700.0)))


@njit(cache=True, nogil=True)
def sequence_loss(theta, X, T, n_in, m, n_out, beta, gamma, update_first):
    """Loss of flat quantized parameters ``theta`` = [W1, W2, b1, b2] on one sequence."""
    nw1 = 2 * m * n_in
    nw2 = n_out * m
    b1o = nw1 + nw2
    b2o = b1o + 2 * m
    z = np.zeros(m)
    h = np.zeros(2 * m)
    total = 0.0
    for t in range(X.shape[0]):
        if t > 0 or update_first:
            for r in range(2 * m):
                a = theta[b1o + r]
                for c in range(n_in):
                    a += theta[r * n_in + c] * X[t, c]
                h[r] = _act(a, beta)
            for i in range(m):
                z[i] = (1.0 - h[i]) * (1.0 - h[m + i]) * z[i] + h[i]
        for k in range(n_out):
            a = theta[b2o + k]
            for i in range(m):
                a += theta[nw1 + k * m + i] * z[i]
            d = abs(T[t, k] - _act(a, beta))
            total += d if gamma == 1 else d ** gamma
    return total


@njit(cache=True, nogil=True)
def anneal_chunk(cur, best, X, T, n_in, m, n_out, gamma, update_first,
                 betas, pos, draws, accept_u, beta_ref, stuck_limit, metropolis,
                 tied_bias, n_weights, stats, trace):
    """Run ``len(betas)`` annealing iterations in place.

    ``stats`` = [cur_soft, best_hard, best_ref, stuck, restarts, evaluations];
    ``trace[k]`` receives (current soft loss, best hard loss) after iteration k.
    ``draws`` are uniform variates choosing the replacement value.
    """
    cand = cur.copy()
    for k in range(betas.shape[0]):
        beta = betas[k]
        cur_soft = sequence_loss(cur, X, T, n_in, m, n_out, beta, gamma, update_first)
        cand[:] = cur
        p = pos[k]
        old = cur[p]
        if p < n_weights:
            # uniform over the two admissible weights other than the current one
            j = int(draws[k] * 2.0)
            new = -1.0 + j
            if new >= old:
                new += 1.0
        else:
            j = int(draws[k] * 5.0)
            new = float(j)
            if new >= old:
                new += 1.0
        cand[p] = new
        if tied_bias and p < n_weights:
            _tie_biases(cand, n_in, m, n_out)
        cand_soft = sequence_loss(cand, X, T, n_in, m, n_out, beta, gamma, update_first)
        hard = sequence_loss(cand, X, T, n_in, m, n_out, -1.0, gamma, update_first)
        stats[5] += 1.0
        improved = False
        if hard < stats[1]:
            improved = True
        elif hard == stats[1]:
            ref = sequence_loss(cand, X, T, n_in, m, n_out, beta_ref, gamma, update_first)
            if ref < stats[2]:
                improved = True
        if improved:
            best[:] = cand
            stats[1] = hard
            stats[2] = sequence_loss(cand, X, T, n_in, m, n_out, beta_ref, gamma, update_first)
            stats[3] = 0.0
        else:
            stats[3] += 1.0
        delta = cand_soft - cur_soft
        if delta <= 0.0:
            accept = True
        elif metropolis:
            accept = accept_u[k] < math.exp(-max(beta, 1.0) * delta)
        else:
            accept = False
        if accept:
            cur[:] = cand
            cur_soft = cand_soft
        if stats[3] >= stuck_limit:
            cur[:] = best
            cur_soft = sequence_loss(cur, X, T, n_in, m, n_out, beta, gamma, update_first)
            stats[3] = 0.0
            stats[4] += 1.0
        stats[0] = cur_soft
        trace[k, 0] = cur_soft
        trace[k, 1] = stats[1]


@njit(cache=True, nogil=True)
def _tie_biases(theta, n_in, m, n_out):
    nw1 = 2 * m * n_in
    nw2 = n_out * m
    for r in range(2 * m):
        c = 0.0
        for j in range(n_in):
            if theta[r * n_in + j] == -1.0:
                c += 1.0
        theta[nw1 + nw2 + r] = min(c, 5.0)
    for k in range(n_out):
        c = 0.0
        for i in range(m):
            if theta[nw1 + k * m + i] == -1.0:
                c += 1.0
        theta[nw1 + nw2 + 2 * m + k] = min(c, 5.0)
