"""Numba kernels for basis reduction and short-vector enumeration.

Hot loops only; all validation and error reporting lives in lattices.py.
Row convention throughout: the lattice is Z^n @ B.
"""

import numpy as np
from numba import njit

ENUM_BUFFER = 20000


@njit(cache=True)
def _gso_into(B, bstar, mu, nsq):
    n = B.shape[0]
    for i in range(n):
        for col in range(n):
            bstar[i, col] = B[i, col]
        for j in range(i):
            dot = 0.0
            for col in range(n):
                dot += B[i, col] * bstar[j, col]
            mu[i, j] = dot / nsq[j]
            for col in range(n):
                bstar[i, col] -= mu[i, j] * bstar[j, col]
        s = 0.0
        for col in range(n):
            s += bstar[i, col] * bstar[i, col]
        nsq[i] = s


@njit(cache=True)
def lll_inplace(B, U, delta, max_iter):
    """LLL-reduce rows of B in place, tracking the integer transform U.

    Returns the iteration count, or -1 if max_iter was hit (numeric
    degeneracy; caller reports the condition number).
    """
    n = B.shape[0]
    bstar = np.empty_like(B)
    mu = np.zeros((n, n))
    nsq = np.zeros(n)
    _gso_into(B, bstar, mu, nsq)
    k = 1
    it = 0
    while k < n:
        it += 1
        if it > max_iter:
            return -1
        for j in range(k - 1, -1, -1):
            q = np.round(mu[k, j])
            if q != 0.0:
                qi = np.int64(q)
                for col in range(n):
                    B[k, col] -= q * B[j, col]
                    U[k, col] -= qi * U[j, col]
                for jj in range(j):
                    mu[k, jj] -= q * mu[j, jj]
                mu[k, j] -= q
        if nsq[k] >= (delta - mu[k, k - 1] * mu[k, k - 1]) * nsq[k - 1]:
            k += 1
        else:
            for col in range(n):
                tmp = B[k, col]
                B[k, col] = B[k - 1, col]
                B[k - 1, col] = tmp
                tmpi = U[k, col]
                U[k, col] = U[k - 1, col]
                U[k - 1, col] = tmpi
            _gso_into(B, bstar, mu, nsq)
            k = 1 if k == 1 else k - 1
    return it


@njit(cache=True)
def gauss_reduce_2d(B, U, max_iter):
    """Exact Lagrange-Gauss reduction for d = 2; rows end up with
    |b0| <= |b1| and |<b0, b1>| <= |b0|^2 / 2."""
    it = 0
    while True:
        it += 1
        if it > max_iter:
            return -1
        n0 = B[0, 0] * B[0, 0] + B[0, 1] * B[0, 1]
        n1 = B[1, 0] * B[1, 0] + B[1, 1] * B[1, 1]
        if n1 < n0:
            for col in range(2):
                tmp = B[0, col]
                B[0, col] = B[1, col]
                B[1, col] = tmp
                tmpi = U[0, col]
                U[0, col] = U[1, col]
                U[1, col] = tmpi
            n0 = n1
        q = np.round((B[0, 0] * B[1, 0] + B[0, 1] * B[1, 1]) / n0)
        if q == 0.0:
            return it
        qi = np.int64(q)
        for col in range(2):
            B[1, col] -= q * B[0, col]
            U[1, col] -= qi * U[0, col]


@njit(cache=True)
def enum_dfs(mu, nsq, bound, mode, r2, coeffs):
    """Depth-first Fincke-Pohst enumeration over the GSO (mu, nsq).

    mode 0: return (min nonzero norm^2, _, _) with initial bound `bound`.
    mode 1: count nonzero vectors with norm^2 < r2 (strict); bound >= r2.
    mode 2: collect coefficient vectors with 0 < norm^2 <= r2 into `coeffs`;
            returns the number collected, or -1 on buffer overflow.
    """
    n = nsq.shape[0]
    x = np.zeros(n, np.int64)
    hi = np.zeros(n, np.int64)
    c = np.zeros(n)
    part = np.zeros(n + 1)
    best = bound
    count = np.int64(0)
    ncol = np.int64(0)
    i = n - 1
    entered = True
    while True:
        if entered:
            s = 0.0
            for j in range(i + 1, n):
                s += x[j] * mu[j, i]
            c[i] = s
            rem = best - part[i + 1]
            if rem < 0.0:
                rem = 0.0
            rad = np.sqrt(rem / nsq[i])
            x[i] = np.int64(np.ceil(-s - rad)) - 1
            hi[i] = np.int64(np.floor(-s + rad))
            entered = False
        x[i] += 1
        if x[i] > hi[i]:
            i += 1
            if i >= n:
                break
            continue
        t = x[i] + c[i]
        cost = part[i + 1] + t * t * nsq[i]
        if cost > best:
            continue
        if i == 0:
            nonzero = False
            for j in range(n):
                if x[j] != 0:
                    nonzero = True
                    break
            if not nonzero:
                continue
            if mode == 0:
                if cost < best:
                    best = cost
            elif mode == 1:
                if cost < r2:
                    count += 1
            else:
                if cost <= r2:
                    if ncol >= coeffs.shape[0]:
                        return best, count, np.int64(-1)
                    for j in range(n):
                        coeffs[ncol, j] = x[j]
                    ncol += 1
        else:
            part[i] = cost
            i -= 1
            entered = True
    return best, count, ncol


@njit(cache=True)
def shortest_normsq(B):
    """Exact lambda_1^2 of an LLL-reduced basis B via enumeration."""
    n = B.shape[0]
    bstar = np.empty_like(B)
    mu = np.zeros((n, n))
    nsq = np.zeros(n)
    _gso_into(B, bstar, mu, nsq)
    bound = 1e300
    for i in range(n):
        s = 0.0
        for col in range(n):
            s += B[i, col] * B[i, col]
        if s < bound:
            bound = s
    dummy = np.zeros((1, n), np.int64)
    best, _, _ = enum_dfs(mu, nsq, bound * (1.0 + 1e-12), 0, 0.0, dummy)
    return best


@njit(cache=True)
def count_inside(B, radius):
    """Number of nonzero lattice vectors with norm strictly below radius."""
    n = B.shape[0]
    bstar = np.empty_like(B)
    mu = np.zeros((n, n))
    nsq = np.zeros(n)
    _gso_into(B, bstar, mu, nsq)
    r2 = radius * radius
    dummy = np.zeros((1, n), np.int64)
    _, cnt, _ = enum_dfs(mu, nsq, r2, 1, r2, dummy)
    return cnt


@njit(cache=True)
def collect_upto(B, r2, coeffs):
    n = B.shape[0]
    bstar = np.empty_like(B)
    mu = np.zeros((n, n))
    nsq = np.zeros(n)
    _gso_into(B, bstar, mu, nsq)
    _, _, ncol = enum_dfs(mu, nsq, r2 * (1.0 + 1e-12), 2, r2 * (1.0 + 1e-12), coeffs)
    return ncol


@njit(cache=True)
def shortest_batch(Bs, delta, max_iter):
    """lambda_1 for a batch of bases; NaN flags a reduction failure."""
    m = Bs.shape[0]
    n = Bs.shape[1]
    out = np.empty(m)
    for idx in range(m):
        B = Bs[idx].copy()
        U = np.eye(n).astype(np.int64)
        if n == 2:
            ok = gauss_reduce_2d(B, U, max_iter)
            if ok < 0:
                out[idx] = np.nan
                continue
            out[idx] = np.sqrt(B[0, 0] * B[0, 0] + B[0, 1] * B[0, 1])
        else:
            ok = lll_inplace(B, U, delta, max_iter)
            if ok < 0:
                out[idx] = np.nan
                continue
            out[idx] = np.sqrt(shortest_normsq(B))
    return out


@njit(cache=True)
def second_minimum_single(B, delta, max_iter):
    """lambda_2: shortest vector linearly independent from a lambda_1 witness."""
    n = B.shape[0]
    Bred = B.copy()
    U = np.eye(n).astype(np.int64)
    if n == 2:
        ok = gauss_reduce_2d(Bred, U, max_iter)
        if ok < 0:
            return np.nan
        return np.sqrt(Bred[1, 0] * Bred[1, 0] + Bred[1, 1] * Bred[1, 1])
    ok = lll_inplace(Bred, U, delta, max_iter)
    if ok < 0:
        return np.nan
    r2 = 0.0
    for i in range(2):
        s = 0.0
        for col in range(n):
            s += Bred[i, col] * Bred[i, col]
        if s > r2:
            r2 = s
    coeffs = np.zeros((ENUM_BUFFER, n), np.int64)
    ncol = collect_upto(Bred, r2, coeffs)
    if ncol < 0:
        return np.nan
    norms = np.empty(ncol)
    for k in range(ncol):
        s = 0.0
        for col in range(n):
            v = 0.0
            for j in range(n):
                v += coeffs[k, j] * Bred[j, col]
            s += v * v
        norms[k] = s
    imin = np.argmin(norms)
    best = np.inf
    for k in range(ncol):
        indep = False
        for a in range(n):
            for b in range(a + 1, n):
                if coeffs[k, a] * coeffs[imin, b] != coeffs[k, b] * coeffs[imin, a]:
                    indep = True
                    break
            if indep:
                break
        if indep and norms[k] < best:
            best = norms[k]
    return np.sqrt(best)


@njit(cache=True)
def second_minimum_batch(Bs, delta, max_iter):
    m = Bs.shape[0]
    out = np.empty(m)
    for idx in range(m):
        out[idx] = second_minimum_single(Bs[idx], delta, max_iter)
    return out


@njit(cache=True)
def ball_count_batch(Bs, radius, delta, max_iter):
    m = Bs.shape[0]
    n = Bs.shape[1]
    out = np.empty(m, np.int64)
    for idx in range(m):
        B = Bs[idx].copy()
        U = np.eye(n).astype(np.int64)
        if n == 2:
            ok = gauss_reduce_2d(B, U, max_iter)
        else:
            ok = lll_inplace(B, U, delta, max_iter)
        if ok < 0:
            out[idx] = -1
            continue
        out[idx] = count_inside(B, radius)
    return out


@njit(cache=True)
def fundamental_batch_d2(Bs, max_iter):
    """Shape points (x, y) of unimodular planar lattices from the reduced Gram."""
    m = Bs.shape[0]
    xs = np.empty(m)
    ys = np.empty(m)
    for idx in range(m):
        B = Bs[idx].copy()
        U = np.eye(2).astype(np.int64)
        ok = gauss_reduce_2d(B, U, max_iter)
        if ok < 0:
            xs[idx] = np.nan
            ys[idx] = np.nan
            continue
        g11 = B[0, 0] * B[0, 0] + B[0, 1] * B[0, 1]
        g12 = B[0, 0] * B[1, 0] + B[0, 1] * B[1, 1]
        g22 = B[1, 0] * B[1, 0] + B[1, 1] * B[1, 1]
        det = g11 * g22 - g12 * g12
        x = g12 / g11
        y = np.sqrt(det) / g11
        # canonical fundamental-domain representative at the boundary
        if x < -0.5 + 1e-12:
            x = -x  # x = -1/2 is glued to x = +1/2
        if x * x + y * y < 1.0 + 1e-12 and x < 0.0:
            x = -x  # the arc |z| = 1, x < 0 is glued to x > 0
        xs[idx] = x
        ys[idx] = y
    return xs, ys
