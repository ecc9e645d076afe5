"""Command line interface.

Exit codes: 0 success, 2 input error, 3 theorem-precondition violation,
4 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .design import d_optimal_design, design_weights_csv
from .errors import InputError, NumericalError, PreconditionError
from .harness import (
    ExperimentConfig,
    FixedAdversary,
    PeriodicAdversary,
    ScheduleAdversary,
    ball_directions,
    emit_trace,
    run_experiment,
    unit_vector_adversary,
)
from .kernels import ExplicitVector, KernelSpec, RankOne, make_explicit, make_rank_one
from .proxy import (
    approximation_sup_error,
    build_proxy,
    effective_dimension,
    fit_eigendecay,
)
from .quadratic import QuadraticObjective, chain_autocorrelation, quad_ew_sample
from .rng import component_rng

__all__ = ["main"]


def parse_kernel(text: str) -> KernelSpec:
    parts = text.split(":")
    name = parts[0].lower()
    if name == "linear":
        G = float(parts[1]) if len(parts) > 1 else 1.0
        return KernelSpec.linear(G)
    if name == "quadratic":
        G = float(parts[1]) if len(parts) > 1 else 2.0
        return KernelSpec.quadratic(G)
    if name == "gaussian":
        if len(parts) < 2:
            raise InputError("gaussian kernel needs a sigma: gaussian:<sigma>[:G]")
        G = float(parts[2]) if len(parts) > 2 else 1.0
        return KernelSpec.gaussian(float(parts[1]), G)
    if name in ("poly", "polynomial"):
        if len(parts) < 3:
            raise InputError("polynomial kernel: poly:<degree>:<offset>[:G]")
        degree, offset = int(parts[1]), float(parts[2])
        G = float(parts[3]) if len(parts) > 3 else (offset + 1.0) ** (degree / 2.0)
        return KernelSpec.polynomial(degree, offset, G)
    raise InputError(f"unknown kernel {text!r}")


def parse_actions(text: str) -> np.ndarray:
    if text.startswith("ball:"):
        return ball_directions(int(text.split(":")[1]))
    points = np.loadtxt(text, delimiter=",", ndmin=2)
    return points


def parse_adversary(text: str, kernel: KernelSpec, d: int):
    parts = text.split(":")
    name = parts[0].lower()
    if name == "zero":
        if kernel.variant == "gaussian":
            raise InputError("zero adversary needs an explicit feature space")
        from .kernels import feature_dim

        return FixedAdversary(ExplicitVector(np.zeros(feature_dim(kernel, d))))
    if name == "fixed":
        w = np.array([float(v) for v in parts[1].split(",")])
        return FixedAdversary(make_explicit(kernel, w))
    if name == "fixed-point":
        y = np.array([float(v) for v in parts[1].split(",")])
        return FixedAdversary(make_rank_one(kernel, y))
    if name == "iid-unit":
        return unit_vector_adversary(d)
    if name == "periodic":
        pts = np.loadtxt(parts[1], delimiter=",", ndmin=2)
        return PeriodicAdversary(tuple(RankOne(p) for p in pts))
    if name == "schedule":
        pts = np.loadtxt(parts[1], delimiter=",", ndmin=2)
        return ScheduleAdversary(tuple(RankOne(p) for p in pts))
    raise InputError(f"unknown adversary {text!r}")


def _cmd_run(args) -> int:
    if args.config:
        raw = json.loads(Path(args.config).read_text())
        for key, value in raw.items():
            setattr(args, key, value)
    kernel = parse_kernel(args.kernel)
    actions = parse_actions(args.actions)
    adversary = parse_adversary(args.adversary, kernel, actions.shape[1])
    params = "paper" if args.params == "paper" else json.loads(args.params)
    seeds = tuple(int(s) for s in str(args.seeds).split(","))
    covering = None
    if str(args.actions).startswith("ball:"):
        k = int(str(args.actions).split(":")[1])
        covering = 2.0 * np.sin(np.pi / (2 * k))
    config = ExperimentConfig(
        algo=args.algo, kernel=kernel, actions=actions, adversary=adversary,
        n=int(args.n), seeds=seeds, params=params,
        proxy_p=args.proxy_p, proxy_m=args.proxy_m, covering_radius=covering,
    )
    result = run_experiment(config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    echo = {"algo": args.algo, "kernel": args.kernel, "n": int(args.n),
            "actions": str(args.actions), "adversary": args.adversary}
    for seed, trace in zip(seeds, result.traces):
        emit_trace(trace, out / f"trace_{seed}.csv", config_echo={**echo, "seed": seed})
    summary = {
        "mean_final_regret": result.mean_final_regret,
        "stderr_final_regret": result.stderr_final_regret,
        "seeds": list(seeds),
        "discretization_error": result.discretization_error,
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    print(json.dumps(summary))
    return 0


def _cmd_proxy_check(args) -> int:
    kernel = parse_kernel(args.kernel)
    grid = np.linspace(0.0, 1.0, args.grid)[:, None] if args.dim == 1 else None
    if grid is None:
        side = np.linspace(0.0, 1.0, args.grid)
        mesh = np.meshgrid(*([side] * args.dim))
        grid = np.column_stack([m.ravel() for m in mesh])
    rng = component_rng(args.seed, "proxy")
    m = args.m
    if m == 0:
        probe = build_proxy(kernel, grid, m=None, p=args.p, rng=rng)
        profile = fit_eigendecay(probe, args.decay, grid)
        m = effective_dimension(profile, args.eps)
    rng2 = component_rng(args.seed, "proxy-final")
    basis = build_proxy(kernel, grid, m=m, p=args.p, rng=rng2)
    sup_err = approximation_sup_error(kernel, basis, grid)
    report = {"m": int(basis.m), "p": args.p, "eps": args.eps,
              "sup_error": sup_err, "certified": bool(sup_err <= args.eps)}
    print(json.dumps(report))
    return 0


def _cmd_design(args) -> int:
    features = np.loadtxt(args.features, delimiter=",", ndmin=2)
    design = d_optimal_design(features, tol=args.tol)
    text = design_weights_csv(design)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_sample_quad(args) -> int:
    B = np.loadtxt(args.B, delimiter=",", ndmin=2)
    b = np.loadtxt(args.b, delimiter=",", ndmin=1)
    obj = QuadraticObjective(B, b)
    rng = component_rng(args.seed, "quad-sampler")
    samples = quad_ew_sample(obj, count=args.count, burn_in=args.burn_in, rng=rng)
    lines = [",".join(f"{v:.17g}" for v in row) for row in samples]
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    print(f"# lag-1 autocorrelation: {chain_autocorrelation(samples):.4f}",
          file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kernelbandits",
        description="Adversarial online learning with kernel losses",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment over seeds")
    run.add_argument("--algo", choices=["bandit_ew", "fullinfo_ew", "cg"],
                     required=True)
    run.add_argument("--kernel", default="linear")
    run.add_argument("--actions", required=True,
                     help="CSV file of points or ball:<K> directions")
    run.add_argument("--adversary", default="iid-unit")
    run.add_argument("--n", type=int, required=True)
    run.add_argument("--seeds", default="0")
    run.add_argument("--params", default="paper", help="'paper' or JSON dict")
    run.add_argument("--proxy-p", type=int, default=None, dest="proxy_p")
    run.add_argument("--proxy-m", type=int, default=None, dest="proxy_m")
    run.add_argument("--out", required=True)
    run.add_argument("--config", default=None, help="JSON file overriding flags")
    run.set_defaults(func=_cmd_run)

    pc = sub.add_parser("proxy-check", help="certify a proxy approximation level")
    pc.add_argument("--kernel", required=True)
    pc.add_argument("--p", type=int, required=True)
    pc.add_argument("--m", type=int, default=0, help="0 = from fitted eigendecay")
    pc.add_argument("--eps", type=float, required=True)
    pc.add_argument("--grid", type=int, default=50)
    pc.add_argument("--dim", type=int, default=1)
    pc.add_argument("--decay", choices=["polynomial", "exponential"],
                    default="exponential")
    pc.add_argument("--seed", type=int, default=0)
    pc.set_defaults(func=_cmd_proxy_check)

    de = sub.add_parser("design", help="D-optimal design over feature rows")
    de.add_argument("--features", required=True)
    de.add_argument("--tol", type=float, default=1e-6)
    de.add_argument("--out", default=None)
    de.set_defaults(func=_cmd_design)

    sq = sub.add_parser("sample-quad", help="sample exp(a^T B a + a^T b) on the ball")
    sq.add_argument("--B", required=True)
    sq.add_argument("--b", required=True)
    sq.add_argument("--count", type=int, required=True)
    sq.add_argument("--burn-in", type=int, default=None, dest="burn_in")
    sq.add_argument("--seed", type=int, default=0)
    sq.add_argument("--out", default=None)
    sq.set_defaults(func=_cmd_sample_quad)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except PreconditionError as exc:
        print(f"precondition violated: {exc}", file=sys.stderr)
        return 3
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 4
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
