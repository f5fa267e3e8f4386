"""Bregman proximal gradient iteration engine with guarantee monitoring.

The iteration is x_{k+1} = prox_map(x_k, lam) with a constant step satisfying
0 < lam * L < 1.  Every step is checked against the sufficient-decrease
inequality

    lam * Psi(x+) <= lam * Psi(x) - (1 - lam*L) * D_h(x+, x),

a violation of which signals a wrong adaptability constant, a wrong prox map,
or numerical breakdown, and aborts the run.  A full per-iteration trace is
recorded: objective value, Bregman gap, step norm, and the norm of an explicit
subgradient witness certifying stationarity.
"""

import csv
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

DIVERGENCE_NORM = 1e12
DECREASE_SLACK = 1e-8

STEP_TOLERANCE = "step_tolerance"
RESIDUAL_TOLERANCE = "residual_tolerance"
MAX_ITERS = "max_iters"


class DecreaseViolationError(RuntimeError):
    """The sufficient-decrease inequality failed beyond tolerance."""


class DivergenceError(RuntimeError):
    """An iterate became non-finite or exceeded the divergence guard."""


@dataclass
class Problem:
    """A composite instance: smooth part, prox map, nonsmooth value, geometry.

    ``prox_map(x, lam)`` must return one (deterministic) selection of the
    Bregman proximal gradient map, finite-valued and feasible, i.e.
    ``f_value`` is finite at its output.  ``psi_lower_bound`` is a known lower
    bound on the optimal value, used in the summability/min-gap bounds.
    """

    g_value: Callable
    g_gradient: Callable
    prox_map: Callable
    f_value: Callable
    kernel: object
    smad: object
    psi_lower_bound: float = 0.0

    def psi(self, x):
        return float(self.f_value(x)) + float(self.g_value(x))


@dataclass
class BpgConfig:
    """Run parameters.  ``lam=None`` selects the default step 0.99 / L.

    The stopping rule is relative: stop once the step norm falls below
    ``tol_step * (1 + ||x_k||)``, or when the witness norm falls below
    ``tol_residual`` if one is given, or at ``max_iters``.
    """

    x0: np.ndarray
    lam: Optional[float] = None
    max_iters: int = 100_000
    tol_step: float = 1e-9
    tol_residual: Optional[float] = None
    keep_iterates: bool = False

    def __post_init__(self):
        self.x0 = np.asarray(self.x0, dtype=float)
        if not np.all(np.isfinite(self.x0)):
            raise ValueError("starting point must be finite")
        if self.max_iters < 0:
            raise ValueError(f"max_iters must be nonnegative, got {self.max_iters}")
        if self.tol_step < 0:
            raise ValueError(f"tol_step must be nonnegative, got {self.tol_step}")


def resolve_step(config_lam, L):
    """Return the actual step size, enforcing 0 < lam * L < 1."""
    lam = 0.99 / L if config_lam is None else float(config_lam)
    if not (lam > 0 and lam * L < 1):
        raise ValueError(f"step size must satisfy 0 < lam*L < 1; got lam={lam}, L={L}, lam*L={lam * L}")
    return lam


class IterateTrace:
    """Per-iteration solve record.

    Row k holds Psi(x_k), D_h(x_k, x_{k-1}), ||x_k - x_{k-1}||, the witness
    norm ||w_k||, and elapsed wall-clock seconds.  Row 0 describes the start:
    gaps are zero and the witness norm is NaN (undefined before a step).
    """

    COLUMNS = ("k", "psi", "dh_gap", "step_norm", "witness_norm", "elapsed_s")

    def __init__(self):
        self._rows = []

    def append(self, k, psi, dh_gap, step_norm, witness_norm, elapsed_s):
        self._rows.append((int(k), float(psi), float(dh_gap), float(step_norm),
                           float(witness_norm), float(elapsed_s)))

    def __len__(self):
        return len(self._rows)

    def column(self, name):
        i = self.COLUMNS.index(name)
        return np.array([row[i] for row in self._rows])

    @property
    def psi(self):
        return self.column("psi")

    @property
    def dh_gap(self):
        return self.column("dh_gap")

    @property
    def step_norm(self):
        return self.column("step_norm")

    @property
    def witness_norm(self):
        return self.column("witness_norm")

    @property
    def elapsed_s(self):
        return self.column("elapsed_s")

    def to_csv(self, path, deterministic=False):
        """Write the trace as CSV.

        ``deterministic=True`` zeroes the wall-clock column so identical runs
        produce byte-identical files (the in-memory timings are unaffected).
        """
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(self.COLUMNS)
            for row in self._rows:
                k, psi, dh, step, wit, elapsed = row
                if deterministic:
                    elapsed = 0.0
                writer.writerow([k, repr(psi), repr(dh), repr(step), repr(wit), repr(elapsed)])


@dataclass
class SolveResult:
    x: np.ndarray
    trace: IterateTrace
    reason: str
    iterates: Optional[np.ndarray] = None

    @property
    def iterations(self):
        return len(self.trace) - 1

    @property
    def final_psi(self):
        return self.trace.psi[-1]

    @property
    def final_witness_norm(self):
        return self.trace.witness_norm[-1]

    def summary(self):
        return {
            "termination": self.reason,
            "iterations": int(self.iterations),
            "final_psi": float(self.final_psi),
            "final_witness_norm": float(self.final_witness_norm),
        }


def _check_decrease(lam, L, psi_x, psi_new, dh):
    if not math.isfinite(psi_x):
        return  # infeasible start: the inequality is vacuous
    slack = DECREASE_SLACK * (1.0 + abs(psi_x))
    if lam * psi_new > lam * psi_x - (1.0 - lam * L) * dh + slack:
        raise DecreaseViolationError(
            f"sufficient decrease violated: lam*Psi(x+)={lam * psi_new:.6e} > "
            f"lam*Psi(x)-(1-lam*L)*D_h={lam * psi_x - (1.0 - lam * L) * dh:.6e} "
            f"(lam={lam}, L={L}); check the adaptability constant and the prox map"
        )


def _guard_iterate(x):
    if not np.all(np.isfinite(x)):
        raise DivergenceError("iterate has non-finite entries")
    n = float(np.linalg.norm(x))
    if n > DIVERGENCE_NORM:
        raise DivergenceError(f"iterate norm {n:.3e} exceeds divergence guard {DIVERGENCE_NORM:.0e}")
    return n


def bpg_step(problem, lam, x):
    """One Bregman proximal gradient step with the decrease inequality enforced."""
    if not lam > 0:
        raise ValueError(f"step size must be positive, got {lam}")
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("current point must be finite")
    x_new = np.asarray(problem.prox_map(x, lam), dtype=float)
    _guard_iterate(x_new)
    dh = float(problem.kernel.bregman(x_new, x))
    _check_decrease(lam, problem.smad.L, problem.psi(x), problem.psi(x_new), dh)
    return x_new


def subgradient_witness(problem, lam, x_prev, x_next):
    """An explicit subgradient of Psi at x_next, valid when x_next = T_lam(x_prev).

    w = grad g(x_next) - grad g(x_prev) + (grad h(x_prev) - grad h(x_next)) / lam.
    Its norm is the stationarity residual of the step.
    """
    x_prev = np.asarray(x_prev, dtype=float)
    x_next = np.asarray(x_next, dtype=float)
    gh = problem.kernel.gradient
    return (np.asarray(problem.g_gradient(x_next)) - np.asarray(problem.g_gradient(x_prev))
            + (gh(x_prev) - gh(x_next)) / lam)


def run_bpg(problem, config):
    """Iterate the method until a stopping rule fires; returns a SolveResult.

    Raises :class:`DecreaseViolationError` / :class:`DivergenceError` on
    diagnostics; reaching ``max_iters`` is a reported reason, not an error.
    """
    lam = resolve_step(config.lam, problem.smad.L)
    L = problem.smad.L
    kernel = problem.kernel
    x = config.x0.copy()
    psi = problem.psi(x)
    if math.isfinite(psi) and psi < problem.psi_lower_bound - DECREASE_SLACK * (1.0 + abs(problem.psi_lower_bound)):
        raise ValueError(
            f"Psi(x0)={psi:.6e} is below the declared lower bound {problem.psi_lower_bound:.6e}"
        )
    grad = np.asarray(problem.g_gradient(x), dtype=float)

    trace = IterateTrace()
    trace.append(0, psi, 0.0, 0.0, math.nan, 0.0)
    iterates = [x.copy()] if config.keep_iterates else None
    t0 = time.perf_counter()
    reason = MAX_ITERS

    for k in range(1, config.max_iters + 1):
        x_new = np.asarray(problem.prox_map(x, lam), dtype=float)
        x_new_norm = _guard_iterate(x_new)
        psi_new = problem.psi(x_new)
        if psi_new < problem.psi_lower_bound - DECREASE_SLACK * (1.0 + abs(problem.psi_lower_bound)):
            raise ValueError(
                f"Psi(x^{k})={psi_new:.6e} fell below the declared lower bound "
                f"{problem.psi_lower_bound:.6e}; the bound or the problem data is wrong"
            )
        dh = float(kernel.bregman(x_new, x))
        _check_decrease(lam, L, psi, psi_new, dh)
        grad_new = np.asarray(problem.g_gradient(x_new), dtype=float)
        w = grad_new - grad + (kernel.gradient(x) - kernel.gradient(x_new)) / lam
        wnorm = float(np.linalg.norm(w))
        step = float(np.linalg.norm(x_new - x))
        trace.append(k, psi_new, dh, step, wnorm, time.perf_counter() - t0)
        if iterates is not None:
            iterates.append(x_new.copy())
        x, psi, grad = x_new, psi_new, grad_new
        if step <= config.tol_step * (1.0 + x_new_norm):
            reason = STEP_TOLERANCE
            break
        if config.tol_residual is not None and wnorm <= config.tol_residual:
            reason = RESIDUAL_TOLERANCE
            break

    return SolveResult(
        x=x,
        trace=trace,
        reason=reason,
        iterates=np.array(iterates) if iterates is not None else None,
    )


def min_gap_bound(trace, lam, L, psi_lower_bound, n=None):
    """Observed min Bregman gap over the first n steps vs. its theoretical bound.

    The bound is lam * (Psi(x0) - psi_lower_bound) / (n * (1 - lam*L)); using
    any valid lower bound in place of the optimal value only loosens it.
    """
    if len(trace) < 2:
        raise ValueError("trace has no completed iterations")
    gaps = trace.dh_gap[1:]
    if n is None:
        n = len(gaps)
    if not 1 <= n <= len(gaps):
        raise ValueError(f"n must be in [1, {len(gaps)}], got {n}")
    observed = float(np.min(gaps[:n]))
    bound = lam * (trace.psi[0] - psi_lower_bound) / (n * (1.0 - lam * L))
    return observed, float(bound)


@dataclass
class RateReport:
    """Descriptive regime fit of the step-norm decay; not a guarantee."""

    regime: str  # "geometric" or "sublinear"
    tau: float  # per-iteration contraction factor of the geometric fit
    exponent: float  # slope of the log-log (sublinear) fit
    r2_geometric: float
    r2_sublinear: float
    n_points: int


def _r2(x, y):
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_res = float(np.sum(resid**2))
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    r2 = 1.0 if ss_tot == 0.0 and ss_res == 0.0 else 1.0 - ss_res / max(ss_tot, 1e-300)
    return slope, r2


def rate_fit(trace, transient_fraction=0.25, min_points=20):
    """Least-squares regime fit of log step norms against k and against log k.

    Reports whichever of the geometric (log-linear in k) or sublinear
    (log-log) models fits better past an estimated transient.  Purely
    descriptive.  Raises ValueError when fewer than ``min_points`` positive
    step norms remain.
    """
    steps = trace.step_norm[1:]
    k = np.arange(1, steps.size + 1, dtype=float)
    start = int(steps.size * transient_fraction)
    steps, k = steps[start:], k[start:]
    mask = np.isfinite(steps) & (steps > 0)
    steps, k = steps[mask], k[mask]
    if steps.size < min_points:
        raise ValueError(
            f"insufficient data for a rate fit: {steps.size} usable points, need {min_points}"
        )
    logy = np.log(steps)
    slope_geo, r2_geo = _r2(k, logy)
    slope_sub, r2_sub = _r2(np.log(k), logy)
    regime = "geometric" if r2_geo >= r2_sub else "sublinear"
    return RateReport(
        regime=regime,
        tau=float(np.exp(slope_geo)),
        exponent=float(slope_sub),
        r2_geometric=float(r2_geo),
        r2_sublinear=float(r2_sub),
        n_points=int(steps.size),
    )
