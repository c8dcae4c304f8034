"""Experiment orchestration: references, metrics, sweeps, and reports.

A sweep enumerates (scheme, grid size, parameter, seed) combinations for one
problem, reuses cached finite-difference references, trains each entry in a
worker pool, and emits a deterministic report.csv plus per-run field CSVs
and a rendered median table. Row order and float formatting are fixed so
identical configurations reproduce identical reports (wall-clock aside).
"""

import csv
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from statistics import median

import numpy as np

from .estimator import PinnSolver, default_architecture
from .fdm import (
    CavityConfig,
    FdmSolution,
    solve_cavity_projection,
    solve_conduction_gs,
    solve_convdiff_direct,
)
from .grid import gradient_central, make_grid, write_field_csv
from .network import MlpParams, save_checkpoint
from .problems import ProblemSpec, make_boundary

FLAG_MSE = 5e-2   # table marker for entries that disagree with the benchmark


def pressure_gradient_post(p_values, grid):
    """Central-difference pressure gradients on interior nodes (gauge-free)."""
    return (gradient_central(p_values, grid, "x"),
            gradient_central(p_values, grid, "y"))


def _values(f):
    return f.values if hasattr(f, "values") else np.asarray(f)


def evaluate_mse(pred_fields, reference, spec, grid, interior_only=False):
    """MSE of the prediction against the reference solution.

    Scalar problems compare temperature over all nodes (interior only with
    the flag). The cavity compares the speed field sqrt(u^2 + v^2) per its
    benchmark convention and adds per-component velocity MSEs plus an
    offset-free pressure-gradient MSE for diagnosis.
    """
    if not reference.converged:
        raise ValueError("reference solution did not converge; no benchmark available")
    sel = (slice(1, -1), slice(1, -1)) if interior_only else (slice(None), slice(None))
    if spec.kind in ("conduction", "convdiff"):
        t_hat = _values(pred_fields["t"])
        t_ref = _values(reference.fields["t"])
        return {"mse": float(np.mean((t_hat[sel] - t_ref[sel]) ** 2))}

    u_hat, v_hat, p_hat = (_values(pred_fields[k]) for k in ("u", "v", "p"))
    u_ref, v_ref, p_ref = (_values(reference.fields[k]) for k in ("u", "v", "p"))
    speed_hat = np.sqrt(u_hat ** 2 + v_hat ** 2)
    speed_ref = np.sqrt(u_ref ** 2 + v_ref ** 2)
    px_hat, _ = pressure_gradient_post(p_hat, grid)
    px_ref, _ = pressure_gradient_post(p_ref, grid)
    return {
        "mse": float(np.mean((speed_hat[sel] - speed_ref[sel]) ** 2)),
        "mse_u": float(np.mean((u_hat[sel] - u_ref[sel]) ** 2)),
        "mse_v": float(np.mean((v_hat[sel] - v_ref[sel]) ** 2)),
        "mse_px": float(np.mean((px_hat - px_ref) ** 2)),
    }


# ---------------------------------------------------------------------------
# Reference solutions, cached by (problem, n, parameter).

class FdmCache:
    """Computes each reference at most once per sweep; counts solver calls."""

    def __init__(self):
        self._store = {}
        self.solver_calls = 0

    def get(self, problem, n, param=None, cavity_overrides=None):
        key = (problem, n, param)
        if key not in self._store:
            self.solver_calls += 1
            self._store[key] = compute_reference(problem, n, param,
                                                 cavity_overrides=cavity_overrides)
        return self._store[key]


def compute_reference(problem, n, param=None, cavity_overrides=None):
    """Reference solver per problem: Gauss-Seidel, direct solve, or projection."""
    grid = make_grid(n)
    if problem == "conduction":
        spec = ProblemSpec(kind="conduction")
        return solve_conduction_gs(grid, make_boundary(spec, grid))
    if problem == "convdiff":
        spec = ProblemSpec(kind="convdiff", pe=param)
        fld = solve_convdiff_direct(grid, param, make_boundary(spec, grid))
        return FdmSolution(fields={"t": fld}, iterations=1, converged=True,
                           residual=0.0, meta={"solver": "direct"})
    if problem == "cavity":
        cfg = CavityConfig(re=param, **(cavity_overrides or {}))
        return solve_cavity_projection(grid, cfg)
    raise ValueError(f"unknown problem {problem!r}")


# ---------------------------------------------------------------------------
# Sweep configuration and rows.

@dataclass
class ExperimentConfig:
    problem: str
    schemes: list = field(default_factory=lambda: ["equal", "nm", "nm2"])
    ns: list = field(default_factory=lambda: [11, 31, 51])
    pe: list = None
    re: list = None
    seeds: list = field(default_factory=lambda: [0, 1, 2])
    max_iters: int = None
    lr0: float = None
    workers: int = None
    interior_only: bool = False
    component_mse: bool = False

    def __post_init__(self):
        if not self.seeds:
            raise ValueError("seeds must be non-empty")
        if self.problem == "convdiff" and not self.pe:
            raise ValueError("convdiff sweep needs pe values")
        if self.problem == "cavity" and not self.re:
            raise ValueError("cavity sweep needs re values")

    @property
    def params(self):
        if self.problem == "convdiff":
            return [float(p) for p in np.atleast_1d(self.pe)]
        if self.problem == "cavity":
            return [float(r) for r in np.atleast_1d(self.re)]
        return [None]

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            raw = json.load(fh)
        known = {k: raw[k] for k in cls.__dataclass_fields__ if k in raw}
        unknown = set(raw) - set(known)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**known)


@dataclass
class ReportRow:
    problem: str
    scheme: str
    n: int
    h: float
    param: float
    seed: int
    mse: float
    mse_u: float = None
    mse_v: float = None
    mse_px: float = None
    diverged: bool = False
    error: str = ""
    wall_seconds: float = 0.0


REPORT_COLUMNS = ["problem", "scheme", "n", "h", "param", "seed", "mse",
                  "mse_u", "mse_v", "mse_px", "diverged", "error", "wall_seconds"]


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def write_report_csv(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(REPORT_COLUMNS)
        for r in rows:
            w.writerow([_fmt(getattr(r, c)) for c in REPORT_COLUMNS])


def read_report_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


# ---------------------------------------------------------------------------
# One sweep entry, runnable in a worker process.

def _run_entry(task):
    (problem, scheme, n, param, seed, max_iters, lr0, interior_only,
     ref_fields) = task
    t0 = time.perf_counter()
    solver = PinnSolver(
        problem=problem, scheme=scheme, n=n,
        pe=param if problem == "convdiff" else None,
        re=param if problem == "cavity" else None,
        max_iters=max_iters, lr0=lr0, seed=seed,
    )
    solver.fit()
    wall = time.perf_counter() - t0
    fields = solver.predict_fields()
    reference = FdmSolution(fields=ref_fields, iterations=1, converged=True,
                            residual=0.0)
    metrics = {"mse": float("nan")}
    all_finite = all(np.all(np.isfinite(_values(f))) for f in fields.values())
    if all_finite:
        metrics = evaluate_mse(fields, reference, solver.spec_, solver.grid_,
                               interior_only=interior_only)
    row = ReportRow(
        problem=problem, scheme=scheme, n=n, h=1.0 / (n - 1),
        param=param, seed=seed,
        mse=metrics.get("mse", float("nan")),
        mse_u=metrics.get("mse_u"), mse_v=metrics.get("mse_v"),
        mse_px=metrics.get("mse_px"),
        diverged=bool(solver.diverged_), wall_seconds=wall,
    )
    flat = solver.params_.to_flat()
    field_values = {name: _values(f) for name, f in fields.items()}
    if not all_finite:
        field_values = None
    return row, field_values, flat


def _entry_name(row):
    param = "" if row.param is None else f"_{row.param:g}"
    return f"{row.problem}_{row.scheme}_n{row.n}{param}_seed{row.seed}"


def run_sweep(config, out_dir, progress=None):
    """Run every configured combination; returns the report rows in order.

    References are computed (and cached) up front in the parent process;
    training entries run in a process pool. Outputs: report.csv, table.txt,
    reference/ and fields/ CSVs, and a checkpoint per run.
    """
    os.makedirs(out_dir, exist_ok=True)
    fields_dir = os.path.join(out_dir, "fields")
    ref_dir = os.path.join(out_dir, "reference")
    ckpt_dir = os.path.join(out_dir, "checkpoints")
    for d in (fields_dir, ref_dir, ckpt_dir):
        os.makedirs(d, exist_ok=True)

    cache = FdmCache()
    for n in config.ns:
        for param in config.params:
            ref = cache.get(config.problem, n, param)
            grid = make_grid(n)
            tag = f"{config.problem}_n{n}" + ("" if param is None else f"_{param:g}")
            for name, fld in ref.fields.items():
                write_field_csv(os.path.join(ref_dir, f"{tag}_{name}.csv"), fld, grid)
            with open(os.path.join(ref_dir, f"{tag}_convergence.json"), "w") as fh:
                json.dump(ref.to_json_record(), fh, indent=2)

    tasks = []
    for scheme in config.schemes:
        for n in config.ns:
            for param in config.params:
                ref = cache.get(config.problem, n, param)
                for seed in config.seeds:
                    tasks.append((config.problem, scheme, n, param, seed,
                                  config.max_iters, config.lr0,
                                  config.interior_only, ref.fields))

    workers = config.workers or min(len(tasks), os.cpu_count() or 1)
    rows = [None] * len(tasks)
    failures = 0
    pool = None
    if workers <= 1:
        getters = [partial(_run_entry, t) for t in tasks]
    else:
        pool = ProcessPoolExecutor(max_workers=workers)
        getters = [pool.submit(_run_entry, t).result for t in tasks]

    for i, get in enumerate(getters):
        task = tasks[i]
        try:
            row, field_values, flat = get()
        except Exception as exc:   # failure is recorded, sweep continues
            failures += 1
            row = ReportRow(problem=task[0], scheme=task[1], n=task[2],
                            h=1.0 / (task[2] - 1), param=task[3], seed=task[4],
                            mse=float("nan"), diverged=True,
                            error=f"{type(exc).__name__}: {exc}")
            field_values, flat = None, None
        rows[i] = row
        name = _entry_name(row)
        grid = make_grid(row.n)
        if field_values is not None:
            for fname, values in field_values.items():
                write_field_csv(os.path.join(fields_dir, f"{name}_{fname}.csv"),
                                values, grid)
        if flat is not None:
            arch = default_architecture(row.problem)
            save_checkpoint(os.path.join(ckpt_dir, f"{name}.ckpt"),
                            MlpParams.from_flat(flat, arch))
        if progress is not None:
            progress(row)
    if pool is not None:
        pool.shutdown()

    write_report_csv(os.path.join(out_dir, "report.csv"), rows)
    with open(os.path.join(out_dir, "table.txt"), "w") as fh:
        fh.write(render_table(rows, component_mse=config.component_mse))
    return rows, failures


def median_mse(rows, scheme, n, param=None):
    """Median MSE over seeds for one (scheme, grid, parameter) cell."""
    vals = [r.mse for r in rows
            if r.scheme == scheme and r.n == n and r.param == param]
    if not vals:
        raise ValueError(f"no rows for scheme={scheme} n={n} param={param}")
    return median(vals)


def render_table(rows, component_mse=False):
    """Median-over-seeds comparison table; entries above 5e-2 or with any
    diverged seed are marked."""
    if not rows:
        return "(no rows)\n"
    problem = rows[0].problem
    cells = {}
    for r in rows:
        cells.setdefault((r.n, r.param), {}).setdefault(r.scheme, []).append(r)
    schemes = sorted({r.scheme for r in rows})
    lines = [f"problem: {problem}   (median MSE over seeds; * marks MSE > "
             f"{FLAG_MSE:g} or diverged seeds)"]
    header = f"{'n':>4} {'param':>8} " + " ".join(f"{s:>14}" for s in schemes)
    lines.append(header)
    for (n, param), per_scheme in sorted(cells.items(),
                                         key=lambda kv: (kv[0][0], kv[0][1] or 0)):
        label = "" if param is None else f"{param:g}"
        out = [f"{n:>4} {label:>8}"]
        for s in schemes:
            rs = per_scheme.get(s, [])
            if not rs:
                out.append(f"{'-':>14}")
                continue
            med = median(r.mse for r in rs)
            mark = "*" if (not np.isfinite(med) or med > FLAG_MSE
                           or any(r.diverged for r in rs)) else " "
            out.append(f"{med:>13.4e}{mark}")
            if component_mse and problem == "cavity":
                med_u = median(r.mse_u for r in rs if r.mse_u is not None)
                med_v = median(r.mse_v for r in rs if r.mse_v is not None)
                out.append(f"[u {med_u:.3e} v {med_v:.3e}]")
        lines.append(" ".join(out))
    return "\n".join(lines) + "\n"
