import numpy as np
import pytest

from pinnweigh.network import (
    Architecture,
    MlpParams,
    forward_batch,
    init_params,
    load_checkpoint,
    save_checkpoint,
)


def test_architecture_validation():
    with pytest.raises(ValueError):
        Architecture(hidden_widths=())
    with pytest.raises(ValueError):
        Architecture(hidden_widths=(4, 0))


def test_param_count_table_architecture():
    # (x,y)-64-64-64-64-(T): 2*64+64 + 3*(64*64+64) + 64*1+1
    arch = Architecture(hidden_widths=(64, 64, 64, 64), output_dim=1)
    assert arch.n_params == 12737
    assert init_params(arch, seed=0).n_params == 12737


def test_init_deterministic_and_zero_bias():
    arch = Architecture(hidden_widths=(8, 8), output_dim=2)
    p1 = init_params(arch, seed=42)
    p2 = init_params(arch, seed=42)
    assert all(np.array_equal(a, b) for a, b in zip(p1.weights, p2.weights))
    assert all(np.array_equal(a, b) for a, b in zip(p1.biases, p2.biases))
    assert all(np.all(b == 0.0) for b in p1.biases)
    p3 = init_params(arch, seed=43)
    assert not np.array_equal(p1.weights[0], p3.weights[0])


def test_init_fan_in_bounds():
    arch = Architecture(hidden_widths=(16,), output_dim=1)
    p = init_params(arch, seed=1)
    for w, fan_in in zip(p.weights, (2, 16)):
        lim = np.sqrt(6.0 / fan_in)
        assert np.all(np.abs(w) <= lim)


def test_forward_zero_params_gives_zero():
    arch = Architecture(hidden_widths=(5, 5), output_dim=2)
    p = MlpParams(weights=[np.zeros((2, 5)), np.zeros((5, 5)), np.zeros((5, 2))],
                  biases=[np.zeros(5), np.zeros(5), np.zeros(2)])
    y = forward_batch(p, [[0.3, 0.9], [1.0, 0.0]])
    assert np.array_equal(y, np.zeros((2, 2)))


def test_forward_hand_computed_neuron():
    # single hidden neuron: weights (pi/2 on x, 0 on y), output weight 1
    p = MlpParams(weights=[np.array([[np.pi / 2.0], [0.0]]), np.array([[1.0]])],
                  biases=[np.zeros(1), np.zeros(1)])
    y = forward_batch(p, [[1.0, 0.0]])
    assert y[0, 0] == pytest.approx(1.0, rel=1e-15)


def test_forward_batch_matches_pointwise():
    # batching only changes BLAS kernel dispatch, so values agree to rounding;
    # repeated evaluation of the same batch is bit-identical
    arch = Architecture(hidden_widths=(7, 3), output_dim=2)
    p = init_params(arch, seed=9)
    pts = np.random.default_rng(0).uniform(0, 1, size=(13, 2))
    batch = forward_batch(p, pts)
    single = np.vstack([forward_batch(p, pts[k:k + 1]) for k in range(13)])
    assert np.allclose(batch, single, rtol=1e-14, atol=1e-15)
    assert np.array_equal(batch, forward_batch(p, pts))


def test_forward_rejects_nonfinite():
    p = init_params(Architecture(hidden_widths=(4,), output_dim=1), seed=0)
    with pytest.raises(ValueError):
        forward_batch(p, [[np.nan, 0.0]])


def test_output_bound_from_sine_range():
    arch = Architecture(hidden_widths=(6, 6), output_dim=1)
    p = init_params(arch, seed=4)
    pts = np.random.default_rng(1).uniform(-3, 3, size=(200, 2))
    y = forward_batch(p, pts)
    bound = np.sum(np.abs(p.weights[-1])) + np.abs(p.biases[-1][0])
    assert np.all(np.abs(y) <= bound + 1e-12)


def test_flat_round_trip():
    arch = Architecture(hidden_widths=(5, 4), output_dim=3)
    p = init_params(arch, seed=7)
    flat = p.to_flat()
    assert flat.size == arch.n_params
    q = MlpParams.from_flat(flat, arch)
    assert all(np.array_equal(a, b) for a, b in zip(p.weights, q.weights))
    assert all(np.array_equal(a, b) for a, b in zip(p.biases, q.biases))


def test_checkpoint_round_trip(tmp_path):
    import json
    arch = Architecture(hidden_widths=(6, 5), output_dim=3)
    p = init_params(arch, seed=3)
    path = tmp_path / "net.ckpt"
    save_checkpoint(path, p)
    with open(path, "rb") as fh:
        header = json.loads(fh.readline())
    assert header["hidden_widths"] == [6, 5]
    assert header["output_dim"] == 3
    q = load_checkpoint(path)
    assert np.array_equal(p.to_flat(), q.to_flat())


def test_params_shape_validation():
    with pytest.raises(ValueError):
        MlpParams(weights=[np.zeros((2, 4)), np.zeros((5, 1))],
                  biases=[np.zeros(4), np.zeros(1)])
    with pytest.raises(ValueError):
        MlpParams(weights=[np.full((2, 3), np.nan)], biases=[np.zeros(3)])
