"""Independent brute-force oracles used to freeze expected values.

These deliberately avoid the library's computational paths: spectral norms
come from a dense eigendecomposition, scalar roots from plain bisection, and
prox maps from grid refinement / support enumeration on the defining
objectives.
"""

from itertools import combinations

import numpy as np


def eig_spectral_norm(A):
    return float(np.max(np.abs(np.linalg.eigvalsh(np.asarray(A, dtype=float)))))


def bisect_root(f, lo, hi, iters=200):
    flo = f(lo)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def fd_gradient(func, x, h=1e-6):
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (func(x + e) - func(x - e)) / (2.0 * h)
    return g


def grid_minimize(obj, d, radius, center=None, rounds=12, pts=15):
    """Iteratively refined grid search; ``obj`` must accept (n, d) batches."""
    center = np.zeros(d) if center is None else np.asarray(center, dtype=float)
    r = float(radius)
    best_x, best_f = center.copy(), float(obj(center[None])[0])
    for _ in range(rounds):
        axes = [np.linspace(center[i] - r, center[i] + r, pts) for i in range(d)]
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
        vals = np.asarray(obj(grid))
        i = int(np.argmin(vals))
        if vals[i] < best_f:
            best_f, best_x = float(vals[i]), grid[i].copy()
        center = grid[i]
        r = 4.0 * r / (pts - 1)  # window of ~2 grid cells around the best point
    return best_x, best_f


def l1_prox_objective(p, lam_theta):
    p = np.asarray(p, dtype=float)

    def obj(u):
        u = np.atleast_2d(u)
        sq = np.sum(u * u, axis=1)
        return (lam_theta * np.sum(np.abs(u), axis=1) + u @ p
                + 0.25 * sq * sq + 0.5 * sq)

    return obj


def l0_prox_objective(p):
    p = np.asarray(p, dtype=float)

    def obj(u):
        u = np.atleast_2d(u)
        sq = np.sum(u * u, axis=1)
        return u @ p + 0.25 * sq * sq + 0.5 * sq

    return obj


def grid_prox_l1(p, lam_theta, rounds=14, pts=15):
    p = np.asarray(p, dtype=float)
    radius = 1.0 + np.cbrt(np.linalg.norm(p))
    x, _ = grid_minimize(l1_prox_objective(p, lam_theta), p.size, radius,
                         rounds=rounds, pts=pts)
    return x


def enum_prox_l0(p, s, rounds=14, pts=15):
    """Enumerate all supports of size <= s; grid-refine each restricted problem."""
    p = np.asarray(p, dtype=float)
    d = p.size
    best_x, best_f = np.zeros(d), 0.0  # u = 0 is always feasible
    for size in range(1, s + 1):
        for S in combinations(range(d), size):
            S = list(S)
            pS = p[S]

            def obj(u):
                u = np.atleast_2d(u)
                sq = np.sum(u * u, axis=1)
                return u @ pS + 0.25 * sq * sq + 0.5 * sq

            radius = 1.0 + np.cbrt(np.linalg.norm(pS))
            uS, f = grid_minimize(obj, size, radius, rounds=rounds, pts=pts)
            if f < best_f:
                best_f = f
                best_x = np.zeros(d)
                best_x[S] = uS
    return best_x


def enum_truncation_max(a, s):
    """Exhaustive support enumeration for max <a, z> over sparse unit vectors."""
    a = np.asarray(a, dtype=float)
    best = -np.inf
    for S in combinations(range(a.size), s):
        v = float(np.linalg.norm(a[list(S)]))
        best = max(best, v)
    return best
