"""Batch front-end: instance generation, solve orchestration, descent checks.

Verbs:

* ``bpg generate`` -- write a synthetic instance file.
* ``bpg solve``    -- run (multi-start) solves on an instance, emitting one
  trace CSV and one summary per start plus a best-of report.
* ``bpg check``    -- sampled verification of the descent certificate.

Worker count for concurrent starts can be overridden with the ``BPG_WORKERS``
environment variable.  Trace CSVs are written with the wall-clock column
zeroed so identical seeds produce byte-identical artifacts.
"""

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import instances
from .kernels import Kernel
from .qip import L0Ball, L1, hard_threshold, make_problem, qip_value, qip_gradient
from .smad import check_descent_lemma
from .solver import (
    BpgConfig,
    DecreaseViolationError,
    DivergenceError,
    resolve_step,
    run_bpg,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DIAGNOSTIC = 3
EXIT_CHECK_FAILED = 4

START_RADII = (0.1, 1.0, 10.0)


@dataclass
class RunSpec:
    """A fully resolved solve request."""

    instance: Path
    out: Path
    lam: Optional[float] = None  # None means auto (0.99 / L)
    max_iters: int = 100_000
    tol_step: float = 1e-9
    tol_residual: Optional[float] = None
    seed: int = 0
    starts: int = 1
    reg: Optional[str] = None  # optional override: "l1" or "l0"
    theta: Optional[float] = None
    s: Optional[int] = None


def _workers(starts):
    env = os.environ.get("BPG_WORKERS")
    if env:
        return max(1, int(env))
    return max(1, min(starts, os.cpu_count() or 1))


def _override_regularizer(inst, spec):
    if spec.reg is None:
        return inst
    if spec.reg == "l1":
        if spec.theta is None:
            raise ValueError("--reg l1 requires --theta")
        reg = L1(theta=spec.theta)
    else:
        if spec.s is None:
            raise ValueError("--reg l0 requires --s")
        reg = L0Ball(s=spec.s)
    if inst.factors is not None:
        return instances.QipInstance(b=inst.b, regularizer=reg, factors=inst.factors)
    return instances.QipInstance(b=inst.b, regularizer=reg, matrices=inst.matrices)


def draw_starts(d, starts, seed, regularizer):
    """Deterministic multi-start points: r * u with u uniform on the sphere
    and r cycling through a small/natural/large radius schedule.  For l0
    instances the draw is hard-thresholded so the start is feasible."""
    rng = np.random.default_rng(seed)
    points = []
    for i in range(starts):
        u = rng.standard_normal(d)
        u /= np.linalg.norm(u)
        x0 = START_RADII[i % len(START_RADII)] * u
        if isinstance(regularizer, L0Ball):
            x0 = hard_threshold(x0, regularizer.s)
        points.append(x0)
    return points


def run_from_spec(spec):
    """Execute a RunSpec; writes artifacts under ``spec.out``.

    Returns the process exit code: 0 on clean termination of every start,
    2 on validation failure, 3 when any start hit a solver diagnostic.
    """
    try:
        inst, _ = instances.load_instance(spec.instance)
        inst = _override_regularizer(inst, spec)
        kernel = Kernel.quartic(inst.d)
        problem = make_problem(inst, kernel)
        lam = resolve_step(spec.lam, problem.smad.L)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    out = Path(spec.out)
    out.mkdir(parents=True, exist_ok=True)
    x0s = draw_starts(inst.d, spec.starts, spec.seed, inst.regularizer)

    def one_start(idx):
        config = BpgConfig(
            x0=x0s[idx],
            lam=lam,
            max_iters=spec.max_iters,
            tol_step=spec.tol_step,
            tol_residual=spec.tol_residual,
        )
        try:
            return idx, run_bpg(problem, config), None
        except (DecreaseViolationError, DivergenceError) as exc:
            return idx, None, exc

    with ThreadPoolExecutor(max_workers=_workers(spec.starts)) as pool:
        results = sorted(pool.map(one_start, range(spec.starts)))

    failed = False
    best = None
    for idx, result, err in results:
        if err is not None:
            failed = True
            summary = {"start": idx, "error": type(err).__name__, "message": str(err)}
        else:
            result.trace.to_csv(out / f"trace_{idx:03d}.csv", deterministic=True)
            summary = {"start": idx, **result.summary(),
                       "x": [float(v).hex() for v in result.x]}
            if best is None or result.final_psi < best[1]:
                best = (idx, result.final_psi, result)
        with open(out / f"summary_{idx:03d}.json", "w") as fh:
            json.dump(summary, fh, sort_keys=True, indent=1)
            fh.write("\n")
        tag = "FAIL" if err is not None else result.reason
        line = f"start {idx}: {tag}"
        if err is None:
            line += f", iters={result.iterations}, psi={result.final_psi:.6e}, |w|={result.final_witness_norm:.3e}"
        print(line)

    if best is not None:
        idx, psi, result = best
        report = {"best_start": idx, **result.summary(),
                  "x": [float(v).hex() for v in result.x],
                  "lam": lam, "L": problem.smad.L}
        with open(out / "best.json", "w") as fh:
            json.dump(report, fh, sort_keys=True, indent=1)
            fh.write("\n")
        print(f"best: start {idx}, psi={psi:.6e}")
    return EXIT_DIAGNOSTIC if failed else EXIT_OK


def _cmd_generate(args):
    reg = None
    if args.reg == "l1":
        if args.theta is None:
            print("error: --reg l1 requires --theta", file=sys.stderr)
            return EXIT_USAGE
        reg = L1(theta=args.theta)
    try:
        payload, _, _ = instances.generate_instance(
            d=args.d, m=args.m, s_true=args.s_true, noise=args.noise,
            seed=args.seed, kind=args.kind, regularizer=reg,
        )
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    instances.save_instance(payload, args.out)
    print(f"wrote {args.out} (d={args.d}, m={args.m}, kind={args.kind})")
    return EXIT_OK


def _cmd_solve(args):
    lam = None if args.lam == "auto" else _parse_lambda(args.lam)
    if lam is False:
        return EXIT_USAGE
    spec = RunSpec(
        instance=Path(args.instance), out=Path(args.out), lam=lam,
        max_iters=args.max_iters, tol_step=args.tol_step,
        tol_residual=args.tol_residual, seed=args.seed, starts=args.starts,
        reg=args.reg, theta=args.theta, s=args.s,
    )
    try:
        return run_from_spec(spec)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def _parse_lambda(text):
    try:
        lam = float(text)
    except ValueError:
        print(f"error: --lambda must be 'auto' or a number, got {text!r}", file=sys.stderr)
        return False
    return lam


def _cmd_check(args):
    try:
        inst, _ = instances.load_instance(args.instance)
        cert = inst.smad_certificate()
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    kernel = Kernel.quartic(inst.d)
    rng = np.random.default_rng(args.seed)
    # uniform in the radius-R ball
    def ball(n):
        u = rng.standard_normal((n, inst.d))
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        r = args.radius * rng.random(n) ** (1.0 / inst.d)
        return u * r[:, None]

    report = check_descent_lemma(
        lambda x: qip_value(inst, x),
        lambda x: qip_gradient(inst, x),
        kernel, cert.L, ball(args.samples), ball(args.samples),
    )
    status = "PASS" if report.passed else "FAIL"
    print(f"{status}: L={cert.L:.6e}, samples={args.samples}, radius={args.radius}, "
          f"violations={report.n_violations}, worst margin={report.worst_margin:.3e}")
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


def build_parser():
    parser = argparse.ArgumentParser(prog="bpg", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a synthetic instance file")
    gen.add_argument("--d", type=int, required=True)
    gen.add_argument("--m", type=int, required=True)
    gen.add_argument("--s-true", dest="s_true", type=int, required=True)
    gen.add_argument("--noise", type=float, default=0.0)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--kind", choices=[instances.RANK_ONE, instances.DENSE_SYMMETRIC],
                     default=instances.RANK_ONE)
    gen.add_argument("--reg", choices=["l1", "l0"], default="l0",
                     help="regularizer stored in the file (l0 uses s = s-true)")
    gen.add_argument("--theta", type=float, default=None)
    gen.add_argument("--out", required=True)
    gen.set_defaults(func=_cmd_generate)

    sol = sub.add_parser("solve", help="run (multi-start) solves on an instance")
    sol.add_argument("--instance", required=True)
    sol.add_argument("--reg", choices=["l1", "l0"], default=None,
                     help="override the instance's stored regularizer")
    sol.add_argument("--theta", type=float, default=None)
    sol.add_argument("--s", type=int, default=None)
    sol.add_argument("--lambda", dest="lam", default="auto",
                     help="step size: 'auto' (0.99/L) or a number")
    sol.add_argument("--max-iters", dest="max_iters", type=int, default=100_000)
    sol.add_argument("--tol-step", dest="tol_step", type=float, default=1e-9)
    sol.add_argument("--tol-residual", dest="tol_residual", type=float, default=None)
    sol.add_argument("--starts", type=int, default=1)
    sol.add_argument("--seed", type=int, default=0)
    sol.add_argument("--out", required=True)
    sol.set_defaults(func=_cmd_solve)

    chk = sub.add_parser("check", help="sampled descent-certificate verification")
    chk.add_argument("--instance", required=True)
    chk.add_argument("--samples", type=int, default=10_000)
    chk.add_argument("--radius", type=float, default=10.0)
    chk.add_argument("--seed", type=int, default=0)
    chk.set_defaults(func=_cmd_check)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
