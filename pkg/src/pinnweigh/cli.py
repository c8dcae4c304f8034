"""Command-line entry points.

Subcommands:
  fdm       run a reference solver and write its fields + convergence record
  train     train one PINN, write checkpoint, predicted fields, and metrics
  sweep     run a full experiment sweep from a JSON config
  gradcheck audit analytic gradients against central differences
"""

import argparse
import json
import os
import sys

from .diffengine import fd_gradient_check
from .estimator import PinnSolver
from .grid import make_grid, write_field_csv
from .harness import (
    ExperimentConfig,
    compute_reference,
    evaluate_mse,
    run_sweep,
)
from .network import Architecture, init_params, save_checkpoint
from .problems import ProblemSpec, make_objective


def _add_problem_args(p):
    p.add_argument("--problem", required=True,
                   choices=["conduction", "convdiff", "cavity"])
    p.add_argument("--n", required=True, type=int, help="nodes per axis")
    p.add_argument("--pe", type=float, help="cell Peclet number (convdiff)")
    p.add_argument("--re", type=float, help="Reynolds number (cavity)")


def _param_for(args):
    if args.problem == "convdiff":
        if args.pe is None:
            raise SystemExit("--pe is required for convdiff")
        return args.pe
    if args.problem == "cavity":
        if args.re is None:
            raise SystemExit("--re is required for cavity")
        return args.re
    return None


def cmd_fdm(args):
    param = _param_for(args)
    ref = compute_reference(args.problem, args.n, param)
    grid = make_grid(args.n)
    os.makedirs(args.out, exist_ok=True)
    tag = f"{args.problem}_n{args.n}" + ("" if param is None else f"_{param:g}")
    for name, fld in ref.fields.items():
        write_field_csv(os.path.join(args.out, f"{tag}_{name}.csv"), fld, grid)
    with open(os.path.join(args.out, f"{tag}_convergence.json"), "w") as fh:
        json.dump(ref.to_json_record(), fh, indent=2)
    print(f"{tag}: converged={ref.converged} iterations={ref.iterations} "
          f"final_residual={ref.residual:.3e}")
    return 0 if ref.converged else 1


def cmd_train(args):
    param = _param_for(args)
    solver = PinnSolver(problem=args.problem, scheme=args.scheme, n=args.n,
                        pe=args.pe if args.problem == "convdiff" else None,
                        re=args.re if args.problem == "cavity" else None,
                        max_iters=args.iters, lr0=args.lr0, seed=args.seed)
    solver.fit()
    os.makedirs(args.out, exist_ok=True)
    tag = (f"{args.problem}_{args.scheme}_n{args.n}"
           + ("" if param is None else f"_{param:g}") + f"_seed{args.seed}")
    save_checkpoint(os.path.join(args.out, f"{tag}.ckpt"), solver.params_)
    fields = solver.predict_fields()
    for name, fld in fields.items():
        write_field_csv(os.path.join(args.out, f"{tag}_{name}.csv"), fld,
                        solver.grid_)

    metrics = {"diverged": solver.diverged_,
               "iterations": int(solver.history_.iterations),
               "final_loss": float(solver.history_.loss[-1]),
               "loss_components": solver.loss_components_}
    if not args.no_reference and not solver.diverged_:
        ref = compute_reference(args.problem, args.n, param)
        metrics.update(evaluate_mse(fields, ref, solver.spec_, solver.grid_))
    with open(os.path.join(args.out, f"{tag}_metrics.json"), "w") as fh:
        json.dump(metrics, fh, indent=2)
    status = "DIVERGED" if solver.diverged_ else "ok"
    mse = metrics.get("mse")
    print(f"{tag}: {status} final_loss={metrics['final_loss']:.6e}"
          + (f" mse={mse:.6e}" if mse is not None else ""))
    return 0


def cmd_sweep(args):
    config = ExperimentConfig.from_json(args.config)
    if args.workers is not None:
        config.workers = args.workers

    def progress(row):
        state = "DIVERGED" if row.diverged else "ok"
        print(f"  {row.problem} {row.scheme} n={row.n} param={row.param} "
              f"seed={row.seed}: {state} mse={row.mse:.4e} "
              f"({row.wall_seconds:.1f}s)", flush=True)

    rows, failures = run_sweep(config, args.out, progress=progress)
    with open(os.path.join(args.out, "table.txt")) as fh:
        print(fh.read())
    print(f"{len(rows)} runs, {failures} failures -> {args.out}/report.csv")
    return 0 if failures == 0 else 1


GRADCHECK_CASES = [
    ("conduction", dict(), (4,), 1),
    ("convdiff", dict(pe=100.0), (6,), 1),
    ("cavity", dict(re=100.0), (8,), 3),
]


def cmd_gradcheck(args):
    grid = make_grid(args.n)
    worst_overall = 0.0
    ok = True
    for kind, kwargs, hidden, out_dim in GRADCHECK_CASES:
        spec = ProblemSpec(kind=kind, **kwargs)
        arch = Architecture(hidden_widths=hidden, output_dim=out_dim)
        params = init_params(arch, seed=args.seed)
        worst = 0.0
        for scheme in ("equal", "nm", "nm2"):
            objective = make_objective(spec, scheme, grid)
            err = fd_gradient_check(params, objective, eps=args.eps)
            worst = max(worst, err)
        passed = worst < args.tol
        ok = ok and passed
        worst_overall = max(worst_overall, worst)
        print(f"{kind:>10}: max relative error {worst:.3e} "
              f"{'PASS' if passed else 'FAIL'}")
    print(f"overall worst {worst_overall:.3e} (tolerance {args.tol:g})")
    return 0 if ok else 1


def build_parser():
    parser = argparse.ArgumentParser(
        prog="pinnweigh",
        description="Grid-sampled PINNs with finite-difference losses and "
                    "benchmark reference solvers.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fdm", help="run a reference solver")
    _add_problem_args(p)
    p.add_argument("--out", default="out", help="output directory")
    p.set_defaults(func=cmd_fdm)

    p = sub.add_parser("train", help="train one PINN")
    _add_problem_args(p)
    p.add_argument("--scheme", required=True, choices=["equal", "nm", "nm2"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--iters", type=int, help="override the iteration budget")
    p.add_argument("--lr0", type=float, help="override the initial learning rate")
    p.add_argument("--no-reference", action="store_true",
                   help="skip the benchmark comparison")
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("sweep", help="run an experiment sweep from JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default="out")
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("gradcheck", help="finite-difference gradient audit")
    p.add_argument("--n", type=int, default=5)
    p.add_argument("--eps", type=float, default=1e-5)
    p.add_argument("--tol", type=float, default=1e-5)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_gradcheck)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
