"""Sparse quadratic inverse problems and their closed-form Bregman prox maps.

The smooth data term is g(x) = 1/4 * sum_i (x^T A_i x - b_i)^2 for symmetric
measurement matrices A_i.  Paired with the quartic-plus-quadratic kernel, the
Bregman proximal step has an explicit solution for both an l1 penalty and an
l0-ball (sparsity) constraint; each reduces to a thresholding operation plus a
scalar cubic root.
"""

from dataclasses import dataclass

import numpy as np

from .kernels import ENERGY, QUARTIC_PLUS_QUADRATIC, Kernel
from .smad import SmadCertificate, ANALYTIC_QIP, check_symmetric, spectral_norm
from .solver import Problem


@dataclass(frozen=True)
class L1:
    """l1-norm penalty theta * ||x||_1 with weight theta > 0."""

    theta: float

    def __post_init__(self):
        if not (self.theta > 0 and np.isfinite(self.theta)):
            raise ValueError(f"l1 weight must be positive and finite, got {self.theta}")


@dataclass(frozen=True)
class L0Ball:
    """Constraint ||x||_0 <= s for a positive integer s < d."""

    s: int

    def __post_init__(self):
        if int(self.s) != self.s or self.s < 1:
            raise ValueError(f"sparsity level must be a positive integer, got {self.s}")


class QipInstance:
    """A quadratic-measurement instance: matrices A_i, data b, regularizer.

    Matrices are stored either dense-symmetric with shape (m, d, d), or as
    rank-one factors with shape (m, d) so that A_i = a_i a_i^T (the phase
    retrieval case), which enables O(m*d) objective/gradient evaluation.
    """

    def __init__(self, b, regularizer, matrices=None, factors=None):
        if (matrices is None) == (factors is None):
            raise ValueError("provide exactly one of matrices= or factors=")
        self.b = np.asarray(b, dtype=float)
        if self.b.ndim != 1 or self.b.size < 1:
            raise ValueError(f"b must be a nonempty vector, got shape {self.b.shape}")
        if matrices is not None:
            matrices = np.asarray(matrices, dtype=float)
            if matrices.ndim != 3 or matrices.shape[1] != matrices.shape[2]:
                raise ValueError(f"matrices must have shape (m, d, d), got {matrices.shape}")
            for A in matrices:
                check_symmetric(A)
            self.matrices = matrices
            self.factors = None
            m, d = matrices.shape[0], matrices.shape[1]
        else:
            factors = np.asarray(factors, dtype=float)
            if factors.ndim != 2:
                raise ValueError(f"factors must have shape (m, d), got {factors.shape}")
            self.matrices = None
            self.factors = factors
            m, d = factors.shape
        if self.b.shape != (m,):
            raise ValueError(f"b has shape {self.b.shape}, expected ({m},)")
        if not isinstance(regularizer, (L1, L0Ball)):
            raise TypeError(f"regularizer must be L1 or L0Ball, got {type(regularizer).__name__}")
        if isinstance(regularizer, L0Ball) and not (1 <= regularizer.s < d):
            raise ValueError(f"l0 sparsity level must satisfy 1 <= s < d, got s={regularizer.s}, d={d}")
        self.regularizer = regularizer
        self.d = d
        self.m = m

    def dense_matrices(self):
        """The measurement matrices as a dense (m, d, d) array."""
        if self.matrices is not None:
            return self.matrices
        return np.einsum("mi,mj->mij", self.factors, self.factors)

    def matrix_norms(self):
        """Spectral norm of each A_i; exact for rank-one factors."""
        if self.factors is not None:
            return np.sum(self.factors**2, axis=1)
        return np.array([spectral_norm(A) for A in self.matrices])

    def smad_certificate(self):
        norms = self.matrix_norms()
        L = float(np.sum(3.0 * norms**2 + norms * np.abs(self.b)))
        if not L > 0:
            raise ValueError("instance has only zero measurement matrices")
        return SmadCertificate(L=L, source=ANALYTIC_QIP)


def _check_point(inst, x):
    x = np.asarray(x, dtype=float)
    if x.shape[-1:] != (inst.d,):
        raise ValueError(f"point has trailing dimension {x.shape[-1:]}, instance expects ({inst.d},)")
    return x


def _residuals(inst, x):
    # quadratic forms x^T A_i x, batched over leading axes of x
    if inst.factors is not None:
        ax = x @ inst.factors.T
        quad = ax * ax
    else:
        quad = np.einsum("...i,mij,...j->...m", x, inst.matrices, x)
    return quad - inst.b


def qip_value(inst, x):
    """The smooth data-fit value g(x) = 1/4 sum_i (x^T A_i x - b_i)^2."""
    x = _check_point(inst, x)
    r = _residuals(inst, x)
    return 0.25 * np.sum(r * r, axis=-1)


def qip_gradient(inst, x):
    """Analytic gradient sum_i (x^T A_i x - b_i) A_i x."""
    x = _check_point(inst, x)
    if inst.factors is not None:
        ax = x @ inst.factors.T
        r = ax * ax - inst.b
        return (r * ax) @ inst.factors
    Ax = np.einsum("mij,...j->...mi", inst.matrices, x)
    quad = np.einsum("...mi,...i->...m", Ax, x)
    return np.einsum("...m,...mi->...i", quad - inst.b, Ax)


def p_lambda(inst, kernel, lam, x):
    """The prox driver vector p = lam * grad g(x) - grad h(x)."""
    if not lam > 0:
        raise ValueError(f"step size must be positive, got {lam}")
    x = _check_point(inst, x)
    return lam * qip_gradient(inst, x) - kernel.gradient(x)


def soft_threshold(y, tau):
    """Componentwise shrinkage max(|y| - tau, 0) * sgn(y)."""
    if tau < 0:
        raise ValueError(f"threshold must be nonnegative, got {tau}")
    y = np.asarray(y, dtype=float)
    return np.sign(y) * np.maximum(np.abs(y) - tau, 0.0)


def hard_threshold(y, s):
    """Keep the s largest-magnitude entries of y, zero the rest.

    Ties are broken toward the lowest index so the selection is deterministic.
    """
    y = np.asarray(y, dtype=float)
    if y.ndim != 1:
        raise ValueError("hard_threshold expects a single vector")
    if not 1 <= s <= y.size:
        raise ValueError(f"sparsity level must satisfy 1 <= s <= {y.size}, got {s}")
    order = np.argsort(-np.abs(y), kind="stable")
    out = np.zeros_like(y)
    keep = order[:s]
    out[keep] = y[keep]
    return out


def truncation_max(a, s):
    """Maximize <a, z> over unit vectors with at most s nonzeros.

    Returns (value, argmax); the value is the norm of the hard-thresholded
    vector and the argmax is that vector normalized.
    """
    a = np.asarray(a, dtype=float)
    if not np.any(a):
        raise ValueError("truncation_max is undefined for the zero vector")
    if not 1 <= s < a.size:
        raise ValueError(f"require 1 <= s < d, got s={s}, d={a.size}")
    q = hard_threshold(a, s)
    n = float(np.linalg.norm(q))
    return n, q / n


def _safeguarded_newton(coeff, f, fprime, lo, hi, t0, tol_scale, max_iters=80):
    """Vectorized Newton with bisection fallback on a per-element bracket.

    ``f``/``fprime`` take (coeff, t) arrays; the root is assumed unique in
    [lo, hi] with f(lo) <= 0 <= f(hi) and fprime >= 1.
    """
    t = t0.copy()
    lo = lo.copy()
    hi = hi.copy()
    for _ in range(max_iters):
        r = f(coeff, t)
        if np.all(np.abs(r) <= tol_scale):
            break
        lo = np.where(r < 0, t, lo)
        hi = np.where(r > 0, t, hi)
        step = r / fprime(coeff, t)
        cand = t - step
        bad = ~np.isfinite(cand) | (cand <= lo) | (cand >= hi)
        t = np.where(bad, 0.5 * (lo + hi), cand)
    return t


def cubic_root_l1(v_norm_sq):
    """Unique positive root t in (0, 1] of a*t^3 + t - 1 = 0, a = ||v||^2.

    Accepts a scalar or an array of coefficients.  Safeguarded Newton inside
    the analytic bracket [0, 1]; no closed-form cubic formula is used, to
    avoid cancellation for extreme coefficients.
    """
    a = np.asarray(v_norm_sq, dtype=float)
    scalar = a.ndim == 0
    a = np.atleast_1d(a)
    if not np.all(np.isfinite(a)) or np.any(a < 0):
        raise ValueError("coefficient must be finite and nonnegative")
    t0 = 1.0 / (1.0 + np.cbrt(a))
    t = _safeguarded_newton(
        a,
        lambda a, t: a * t * t * t + t - 1.0,
        lambda a, t: 3.0 * a * t * t + 1.0,
        lo=np.zeros_like(a),
        hi=np.ones_like(a),
        t0=t0,
        tol_scale=1e-15 * (1.0 + a),
    )
    return float(t[0]) if scalar else t


def cubic_root_l0(c):
    """Unique nonnegative root eta of eta^3 + eta - c = 0 for c >= 0."""
    c = np.asarray(c, dtype=float)
    scalar = c.ndim == 0
    c = np.atleast_1d(c)
    if not np.all(np.isfinite(c)) or np.any(c < 0):
        raise ValueError("coefficient must be finite and nonnegative")
    t0 = np.minimum(c, np.cbrt(c))
    t = _safeguarded_newton(
        c,
        lambda c, t: t * t * t + t - c,
        lambda c, t: 3.0 * t * t + 1.0,
        lo=np.zeros_like(c),
        hi=np.cbrt(c) + 1.0,
        t0=t0,
        tol_scale=1e-15 * (1.0 + c),
    )
    return float(t[0]) if scalar else t


def prox_l1(p, lam_theta):
    """Bregman proximal step for the l1 penalty under the quartic kernel.

    Given the driver p = lam*grad g(x) - grad h(x) and the effective weight
    lam*theta, the exact global minimizer of

        lam*theta*||u||_1 + <p, u> + 1/4 ||u||^4 + 1/2 ||u||^2

    is -t* * S(p), with S the soft threshold at lam*theta and t* the positive
    root of t^3 ||S(p)||^2 + t - 1 = 0.
    """
    if lam_theta < 0:
        raise ValueError(f"threshold must be nonnegative, got {lam_theta}")
    p = np.asarray(p, dtype=float)
    v = soft_threshold(p, lam_theta)
    t = cubic_root_l1(float(v @ v))
    return -t * v


def prox_l0(p, s):
    """Bregman proximal step for the l0-ball constraint under the quartic kernel.

    Globally minimizes <p, u> + 1/4 ||u||^4 + 1/2 ||u||^2 over ||u||_0 <= s.
    The minimizer points along -H_s(p) (the linear term is minimized opposite
    p), with magnitude eta* solving eta^3 + eta = ||H_s(p)||.
    """
    p = np.asarray(p, dtype=float)
    if not 1 <= s < p.size:
        raise ValueError(f"require 1 <= s < d, got s={s}, d={p.size}")
    q = hard_threshold(p, s)
    nq = float(np.linalg.norm(q))
    if nq == 0.0:
        return np.zeros_like(p)
    eta = cubic_root_l0(nq)
    return -(eta / nq) * q


def _f_value(inst):
    reg = inst.regularizer
    if isinstance(reg, L1):
        theta = reg.theta
        return lambda x: theta * float(np.sum(np.abs(x)))
    s = reg.s
    return lambda x: 0.0 if np.count_nonzero(x) <= s else np.inf


def make_problem(inst, kernel, L=None, allow_uncertified=False):
    """Bind a QIP instance and a kernel into a solver-ready Problem.

    The quartic kernel is the certified pairing: the adaptability constant is
    computed analytically unless a user L is supplied.  The energy kernel
    yields the classical proximal gradient maps (plain soft/hard threshold of
    the forward step) but carries no certificate here, so it is accepted only
    with an explicit user L and ``allow_uncertified=True``.
    """
    if kernel.dimension != inst.d:
        raise ValueError(f"kernel dimension {kernel.dimension} != instance dimension {inst.d}")
    reg = inst.regularizer

    if kernel.kind == QUARTIC_PLUS_QUADRATIC:
        cert = SmadCertificate(L=float(L), source="user-supplied") if L is not None \
            else inst.smad_certificate()
        if isinstance(reg, L1):
            def prox_map(x, lam):
                return prox_l1(p_lambda(inst, kernel, lam, x), lam * reg.theta)
        else:
            def prox_map(x, lam):
                return prox_l0(p_lambda(inst, kernel, lam, x), reg.s)
    elif kernel.kind == ENERGY:
        if L is None or not allow_uncertified:
            raise ValueError(
                "energy kernel is uncertified for quadratic measurements; "
                "pass a user L and allow_uncertified=True to override"
            )
        cert = SmadCertificate(L=float(L), source="user-supplied")
        if isinstance(reg, L1):
            def prox_map(x, lam):
                return soft_threshold(x - lam * qip_gradient(inst, x), lam * reg.theta)
        else:
            def prox_map(x, lam):
                return hard_threshold(x - lam * qip_gradient(inst, x), reg.s)
    else:
        raise ValueError(f"unsupported kernel kind {kernel.kind!r}")

    return Problem(
        g_value=lambda x: qip_value(inst, x),
        g_gradient=lambda x: qip_gradient(inst, x),
        prox_map=prox_map,
        f_value=_f_value(inst),
        kernel=kernel,
        smad=cert,
        psi_lower_bound=0.0,
    )
