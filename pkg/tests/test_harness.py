import json

import numpy as np
import pytest

from pinnweigh.fdm import FdmSolution
from pinnweigh.grid import Field, make_grid
from pinnweigh.harness import (
    ExperimentConfig,
    FdmCache,
    compute_reference,
    evaluate_mse,
    median_mse,
    pressure_gradient_post,
    read_report_csv,
    render_table,
    run_sweep,
)
from pinnweigh.problems import ProblemSpec


def scalar_reference(values):
    return FdmSolution(fields={"t": Field(values)}, iterations=1,
                       converged=True, residual=0.0)


def test_evaluate_mse_identity_and_offset():
    grid = make_grid(7)
    spec = ProblemSpec(kind="conduction")
    t = np.random.default_rng(0).uniform(0, 1, size=(7, 7))
    ref = scalar_reference(t)
    assert evaluate_mse({"t": Field(t)}, ref, spec, grid)["mse"] == 0.0
    off = evaluate_mse({"t": Field(t + 0.1)}, ref, spec, grid)["mse"]
    assert off == pytest.approx(0.01, rel=1e-12)


def test_evaluate_mse_requires_converged_reference():
    grid = make_grid(5)
    ref = FdmSolution(fields={"t": Field(np.zeros((5, 5)))}, iterations=3,
                      converged=False, residual=1.0)
    with pytest.raises(ValueError):
        evaluate_mse({"t": Field(np.zeros((5, 5)))}, ref,
                     ProblemSpec(kind="conduction"), grid)


def test_evaluate_mse_cavity_speed_metric():
    grid = make_grid(6)
    spec = ProblemSpec(kind="cavity", re=10.0)
    rng = np.random.default_rng(1)
    u, v, p = (rng.uniform(-1, 1, size=(6, 6)) for _ in range(3))
    ref = FdmSolution(fields={"u": Field(u), "v": Field(v), "p": Field(p)},
                      iterations=1, converged=True, residual=0.0)
    pred = {"u": Field(u), "v": Field(v), "p": Field(p + 5.0)}
    out = evaluate_mse(pred, ref, spec, grid)
    assert out["mse"] == 0.0
    assert out["mse_u"] == 0.0 and out["mse_v"] == 0.0
    assert out["mse_px"] == pytest.approx(0.0, abs=1e-24)   # gauge-free


def test_pressure_gradient_post_examples():
    grid = make_grid(9)
    xs = grid.coords()
    p = np.broadcast_to(xs[:, None], (9, 9)).astype(float)
    px, py = pressure_gradient_post(p, grid)
    assert np.allclose(px, 1.0, atol=1e-13)
    assert np.allclose(py, 0.0, atol=1e-13)
    px_const, _ = pressure_gradient_post(np.full((9, 9), 3.3), grid)
    assert np.allclose(px_const, 0.0)
    # gauge invariance
    px_shift, _ = pressure_gradient_post(p + 17.0, grid)
    assert np.allclose(px, px_shift, atol=1e-12)


def test_fdm_cache_counts_invocations():
    cache = FdmCache()
    a = cache.get("conduction", 9)
    b = cache.get("conduction", 9)
    assert a is b
    assert cache.solver_calls == 1
    cache.get("conduction", 11)
    assert cache.solver_calls == 2


def test_compute_reference_kinds():
    ref = compute_reference("convdiff", 9, 10.0)
    assert ref.converged
    assert ref.meta["solver"] == "direct"
    with pytest.raises(ValueError):
        compute_reference("nosuch", 9)


def test_experiment_config_validation(tmp_path):
    with pytest.raises(ValueError):
        ExperimentConfig(problem="convdiff", pe=None)
    with pytest.raises(ValueError):
        ExperimentConfig(problem="conduction", seeds=[])
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"problem": "conduction", "ns": [5],
                                "schemes": ["nm"], "seeds": [0],
                                "max_iters": 3}))
    cfg = ExperimentConfig.from_json(path)
    assert cfg.ns == [5] and cfg.max_iters == 3
    path.write_text(json.dumps({"problem": "conduction", "bogus_key": 1}))
    with pytest.raises(ValueError):
        ExperimentConfig.from_json(path)


def sweep_config(**kw):
    base = dict(problem="conduction", schemes=["equal", "nm", "nm2"],
                ns=[5], seeds=[0], max_iters=5, workers=1)
    base.update(kw)
    return ExperimentConfig(**base)


def test_run_sweep_cardinality_and_outputs(tmp_path):
    out = tmp_path / "sweep"
    rows, failures = run_sweep(sweep_config(ns=[5, 7]), out)
    assert failures == 0
    assert len(rows) == 6          # 3 schemes x 2 grids x 1 seed
    raw = read_report_csv(out / "report.csv")
    assert len(raw) == 7           # header + rows
    assert (out / "table.txt").exists()
    assert (out / "reference" / "conduction_n5_t.csv").exists()
    assert (out / "reference" / "conduction_n5_convergence.json").exists()
    assert (out / "fields" / "conduction_nm_n5_seed0_t.csv").exists()
    assert (out / "checkpoints" / "conduction_nm_n5_seed0.ckpt").exists()
    # every configured combination appears exactly once
    keys = [(r.scheme, r.n, r.seed) for r in rows]
    assert len(set(keys)) == len(keys) == 6


def test_run_sweep_reference_cached_within_sweep(tmp_path, monkeypatch):
    import pinnweigh.harness as harness
    calls = []
    original = harness.compute_reference

    def counting(problem, n, param=None, cavity_overrides=None):
        calls.append((problem, n, param))
        return original(problem, n, param, cavity_overrides)

    monkeypatch.setattr(harness, "compute_reference", counting)
    run_sweep(sweep_config(seeds=[0, 1]), tmp_path / "s")
    assert calls == [("conduction", 5, None)]   # one reference, many runs


def test_run_sweep_deterministic_reports(tmp_path):
    cfg = sweep_config(seeds=[0, 1], max_iters=8)
    run_sweep(cfg, tmp_path / "a")
    run_sweep(cfg, tmp_path / "b")
    ra = read_report_csv(tmp_path / "a" / "report.csv")
    rb = read_report_csv(tmp_path / "b" / "report.csv")
    wall_col = ra[0].index("wall_seconds")
    stripped_a = [row[:wall_col] + row[wall_col + 1:] for row in ra]
    stripped_b = [row[:wall_col] + row[wall_col + 1:] for row in rb]
    assert stripped_a == stripped_b


def test_median_mse_and_table(tmp_path):
    rows, _ = run_sweep(sweep_config(seeds=[0, 1, 2]), tmp_path / "m")
    med = median_mse(rows, "nm", 5)
    per_seed = sorted(r.mse for r in rows if r.scheme == "nm")
    assert med == per_seed[1]
    table = render_table(rows)
    assert "conduction" in table and "nm" in table
