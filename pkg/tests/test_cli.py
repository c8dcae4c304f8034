import json

import pytest

from pinnweigh.cli import main


def test_gradcheck_command(capsys):
    assert main(["gradcheck", "--n", "5"]) == 0
    out = capsys.readouterr().out
    assert "conduction" in out and "PASS" in out


def test_fdm_command_writes_outputs(tmp_path, capsys):
    code = main(["fdm", "--problem", "conduction", "--n", "9",
                 "--out", str(tmp_path)])
    assert code == 0
    assert (tmp_path / "conduction_n9_t.csv").exists()
    rec = json.loads((tmp_path / "conduction_n9_convergence.json").read_text())
    assert rec["converged"] is True


def test_fdm_command_requires_parameter(tmp_path):
    with pytest.raises(SystemExit):
        main(["fdm", "--problem", "convdiff", "--n", "9", "--out", str(tmp_path)])


def test_train_command(tmp_path, capsys):
    code = main(["train", "--problem", "conduction", "--scheme", "nm",
                 "--n", "5", "--seed", "0", "--iters", "20",
                 "--out", str(tmp_path)])
    assert code == 0
    assert (tmp_path / "conduction_nm_n5_seed0.ckpt").exists()
    metrics = json.loads((tmp_path / "conduction_nm_n5_seed0_metrics.json")
                         .read_text())
    assert metrics["iterations"] == 20
    assert "mse" in metrics


def test_sweep_command(tmp_path):
    cfg = {"problem": "conduction", "schemes": ["nm"], "ns": [5],
           "seeds": [0], "max_iters": 5, "workers": 1}
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(cfg))
    out = tmp_path / "out"
    assert main(["sweep", "--config", str(cfg_path), "--out", str(out)]) == 0
    assert (out / "report.csv").exists()
