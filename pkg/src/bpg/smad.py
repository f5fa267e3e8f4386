"""Smooth-adaptability certificates and sampled descent-lemma verification.

For a smooth g and kernel h, an adaptability constant L makes both L*h - g and
L*h + g convex, which is equivalent to the two-sided bound

    |g(x) - g(y) - <grad g(y), x - y>|  <=  L * D_h(x, y).

This module provides the analytic constant for quartic measurement objectives
(sum over measurements of 3*||A_i||^2 + ||A_i||*|b_i|, with ||.|| the spectral
norm), a dependency-free spectral norm, and a sampling-based checker for the
bound itself.
"""

from dataclasses import dataclass

import numpy as np

ANALYTIC_QIP = "analytic-qip"
USER_SUPPLIED = "user-supplied"

_SYMMETRY_TOL = 1e-10


@dataclass(frozen=True)
class SmadCertificate:
    """An adaptability constant L > 0 together with its provenance."""

    L: float
    source: str = USER_SUPPLIED

    def __post_init__(self):
        if not (self.L > 0 and np.isfinite(self.L)):
            raise ValueError(f"adaptability constant must be positive and finite, got {self.L}")


def spectral_norm(A, tol=1e-12, max_iters=500, restarts=3):
    """Largest absolute eigenvalue of a symmetric matrix via power iteration.

    Iterates on A @ A so the dominant eigenvalue is nonnegative regardless of
    the sign spectrum of A.  Deterministic: restart vectors come from a fixed
    seed.  Stops a restart when successive Rayleigh quotients agree to ``tol``
    relative; the best value over ``restarts`` independent starts is kept.
    """
    A = np.asarray(A, dtype=float)
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    d = A.shape[0]
    if not np.any(A):
        return 0.0
    B = A @ A
    rng = np.random.default_rng(0x5EED)
    best = 0.0
    for _ in range(restarts):
        v = rng.standard_normal(d)
        v /= np.linalg.norm(v)
        ray = 0.0
        for _ in range(max_iters):
            w = B @ v
            nw = np.linalg.norm(w)
            if nw == 0.0:
                break
            v = w / nw
            ray_new = float(v @ (B @ v))
            if abs(ray_new - ray) <= tol * max(1.0, abs(ray_new)):
                ray = ray_new
                break
            ray = ray_new
        best = max(best, ray)
    return float(np.sqrt(max(best, 0.0)))


def check_symmetric(A, tol=_SYMMETRY_TOL):
    A = np.asarray(A, dtype=float)
    gap = float(np.max(np.abs(A - A.T))) if A.size else 0.0
    if gap > tol:
        raise ValueError(f"matrix is not symmetric: max |A - A^T| = {gap:.3e} > {tol:.1e}")
    return A


def qip_smad_constant(matrices, b):
    """Analytic adaptability constant for a quadratic-measurement objective.

    L = sum_i ( 3*||A_i||^2 + ||A_i|| * |b_i| ), spectral norms throughout.
    """
    matrices = [check_symmetric(A) for A in matrices]
    if len(matrices) == 0:
        raise ValueError("need at least one measurement matrix")
    b = np.asarray(b, dtype=float)
    if b.shape != (len(matrices),):
        raise ValueError(f"b has shape {b.shape}, expected ({len(matrices)},)")
    norms = np.array([spectral_norm(A) for A in matrices])
    L = float(np.sum(3.0 * norms**2 + norms * np.abs(b)))
    return SmadCertificate(L=L, source=ANALYTIC_QIP)


@dataclass
class DescentReport:
    """Outcome of a sampled check of |D_g| <= L * D_h.

    ``margins`` holds L*D_h - |D_g| per sample pair; a pair counts as a
    violation when its margin is below ``-slack`` for the pair's
    magnitude-scaled slack.  A failed check is an outcome, not an error.
    """

    margins: np.ndarray
    n_violations: int
    worst_margin: float
    passed: bool


def check_descent_lemma(g_value, g_gradient, kernel, L, xs, ys, rel_slack=1e-9):
    """Verify the extended descent bound on sampled point pairs.

    ``g_value`` and ``g_gradient`` must accept batched input of shape (n, d).
    Returns a :class:`DescentReport`; it never raises on a failed bound.
    """
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    ys = np.atleast_2d(np.asarray(ys, dtype=float))
    if xs.shape != ys.shape:
        raise ValueError(f"sample arrays differ in shape: {xs.shape} vs {ys.shape}")
    dh = np.atleast_1d(kernel.bregman(xs, ys))
    dg = np.atleast_1d(
        g_value(xs) - g_value(ys) - np.sum(g_gradient(ys) * (xs - ys), axis=-1)
    )
    margins = L * dh - np.abs(dg)
    slack = rel_slack * (1.0 + np.abs(dg) + L * dh)
    bad = margins < -slack
    return DescentReport(
        margins=margins,
        n_violations=int(np.count_nonzero(bad)),
        worst_margin=float(np.min(margins)) if margins.size else 0.0,
        passed=not bool(np.any(bad)),
    )
