import numpy as np
import pytest

from pinnweigh.grid import make_grid
from pinnweigh.problems import (
    ProblemSpec,
    WeightVector,
    cavity_components,
    compute_weights,
    conduction_components,
    convdiff_components,
    convdiff_residual,
    make_boundary,
    total_loss,
)


def grid_xy(grid):
    xs = grid.coords()
    return xs[:, None], xs[None, :]


def test_problem_spec_validation():
    with pytest.raises(ValueError):
        ProblemSpec(kind="unknown")
    with pytest.raises(ValueError):
        ProblemSpec(kind="convdiff")            # missing pe
    with pytest.raises(ValueError):
        ProblemSpec(kind="cavity", re=-1.0)
    with pytest.raises(ValueError):
        ProblemSpec(kind="conduction", pe=5.0)  # stray parameter


def test_boundary_hot_counts():
    g = make_grid(11)
    bc = make_boundary(ProblemSpec(kind="conduction"), g)
    m = g.boundary_mask()
    assert bc.g[m].sum() == 11            # one hot wall, lid corners included
    bc = make_boundary(ProblemSpec(kind="convdiff", pe=1.0), g)
    assert bc.g[m].sum() == 21            # two hot walls sharing one corner
    bc = make_boundary(ProblemSpec(kind="cavity", re=1.0), g)
    assert bc.g_u[m].sum() == 11
    assert bc.g_v[m].sum() == 0


def test_conduction_components_zero_field():
    g = make_grid(11)
    bc = make_boundary(ProblemSpec(kind="conduction"), g)
    comps = conduction_components(np.zeros((11, 11)), g, bc)
    assert comps["de"] == 0.0
    # N hot boundary nodes out of 4(N-1): 11/40
    assert comps["dbc"] == pytest.approx(0.275, rel=1e-15)


def test_conduction_components_bilinear_harmonic():
    g = make_grid(9)
    x, y = grid_xy(g)
    bc = make_boundary(ProblemSpec(kind="conduction"), g)
    comps = conduction_components(x * y, g, bc)
    assert comps["de"] < 1e-28


def test_convdiff_components_constant_field():
    g = make_grid(9)
    spec = ProblemSpec(kind="convdiff", pe=37.0)
    bc = make_boundary(spec, g)
    comps = convdiff_components(np.full((9, 9), 0.42), g, spec, bc)
    assert comps["de"] == 0.0


def test_convdiff_residual_pe_zero_reduces_to_laplacian():
    from pinnweigh.grid import laplacian_cds
    g = make_grid(8)
    f = np.random.default_rng(2).standard_normal((8, 8))
    r = convdiff_residual(f, g, 0.0)
    assert np.array_equal(r, laplacian_cds(f, g))


def test_cavity_components_zero_fields():
    g = make_grid(11)
    spec = ProblemSpec(kind="cavity", re=100.0)
    bc = make_boundary(spec, g)
    z = np.zeros((11, 11))
    comps = cavity_components(z, z, z, g, spec, bc)
    assert comps["nsx"] == comps["nsy"] == comps["c"] == comps["nbc"] == 0.0
    assert comps["dbc"] == pytest.approx(0.275, rel=1e-15)


def test_cavity_components_rigid_rotation():
    # u = y, v = -x: divergence-free; the x-momentum residual reduces to
    # v * du/dy = -x, the y-momentum residual to u * dv/dx = -y (stencil-exact)
    g = make_grid(9)
    x, y = grid_xy(g)
    spec = ProblemSpec(kind="cavity", re=1e12)
    bc = make_boundary(spec, g)
    u = np.broadcast_to(y, (9, 9)).copy()
    v = np.broadcast_to(-x, (9, 9)).copy()
    comps = cavity_components(u, v, np.zeros((9, 9)), g, spec, bc)
    assert comps["c"] < 1e-28
    xi = g.coords()[1:-1]
    assert comps["nsx"] == pytest.approx(np.mean(np.broadcast_to(
        xi[:, None], (7, 7)) ** 2), rel=1e-12)
    assert comps["nsy"] == pytest.approx(np.mean(np.broadcast_to(
        xi[None, :], (7, 7)) ** 2), rel=1e-12)


def test_compute_weights_contract_values():
    g10, g30 = make_grid(11), make_grid(31)
    w = compute_weights(ProblemSpec(kind="conduction"), "nm", g10)
    assert w["de"] == pytest.approx(0.01, rel=1e-14)
    assert w["dbc"] == 1.0
    w = compute_weights(ProblemSpec(kind="convdiff", pe=100.0), "nm", g30)
    assert w["de"] == pytest.approx((1 / 100) * (1 / 900), rel=1e-14)
    w = compute_weights(ProblemSpec(kind="cavity", re=100.0), "nm", g10)
    assert [w[k] for k in ("nsx", "nsy", "c", "dbc", "nbc")] == pytest.approx(
        [1.0, 1.0, 0.1, 1.0, 1.0], rel=1e-14)
    w = compute_weights(ProblemSpec(kind="cavity", re=100.0), "nm2", g10)
    assert [w[k] for k in ("nsx", "nsy", "c", "dbc", "nbc")] == pytest.approx(
        [1.0, 1.0, 0.01, 1.0, 1.0], rel=1e-14)


def test_compute_weights_rejects_unknown_scheme():
    with pytest.raises(ValueError):
        compute_weights(ProblemSpec(kind="conduction"), "bogus", make_grid(5))


def test_weights_halving_h_exact():
    # h -> h/2 divides the de weight by exactly 4 (nm) and 16 (nm2)
    g1, g2 = make_grid(11), make_grid(21)
    assert g2.h == g1.h / 2
    spec = ProblemSpec(kind="conduction")
    assert compute_weights(spec, "nm", g2)["de"] == \
        compute_weights(spec, "nm", g1)["de"] / 4
    assert compute_weights(spec, "nm2", g2)["de"] == \
        compute_weights(spec, "nm2", g1)["de"] / 16


def test_convdiff_nm2_is_square_of_nm_ratio():
    for n in (11, 31, 51):
        g = make_grid(n)
        for pe in (10.0, 100.0):
            spec = ProblemSpec(kind="convdiff", pe=pe)
            nm = compute_weights(spec, "nm", g)["de"]
            nm2 = compute_weights(spec, "nm2", g)["de"]
            assert nm2 == pytest.approx(nm ** 2, rel=1e-14)


def test_total_loss_examples():
    w = WeightVector(scheme="equal", values={"de": 1.0, "dbc": 1.0})
    assert total_loss({"de": 2.0, "dbc": 3.0}, w) == 5.0
    assert total_loss({"de": 0.0, "dbc": 0.0}, w) == 0.0
    g = make_grid(11)
    w = compute_weights(ProblemSpec(kind="conduction"), "nm", g)
    assert total_loss({"de": 4.0, "dbc": 0.5}, w) == pytest.approx(0.54, rel=1e-14)
    with pytest.raises(ValueError):
        total_loss({"de": 1.0}, w)


def test_weight_vector_rejects_nonpositive():
    with pytest.raises(ValueError):
        WeightVector(scheme="equal", values={"de": 0.0, "dbc": 1.0})
