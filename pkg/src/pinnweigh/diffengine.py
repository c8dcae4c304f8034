"""Exact loss gradients by reverse accumulation, plus a finite-difference audit.

Differentiation is with respect to network parameters only; the spatial
derivatives inside the loss are always the fixed central-difference stencils.
The chain is: parameters -> batch forward over all grid nodes -> nodal fields
-> stencil residuals -> weighted component means. Every link has a closed-form
adjoint (the stencils are linear, the convection terms quadratic), so the
gradient carries no truncation error.
"""

from dataclasses import dataclass

import numpy as np

from .network import forward_batch, forward_with_cache


@dataclass
class LossGradient:
    """Total loss, per-component values, and the flat parameter gradient.

    When the loss comes back non-finite the run is flagged diverged and no
    gradient is produced.
    """

    loss: float
    components: dict
    grad: np.ndarray = None
    diverged: bool = False


def _fields_from_outputs(y, grid, n_outputs):
    n = grid.n
    return [np.ascontiguousarray(y[:, k].reshape(n, n)) for k in range(n_outputs)]


def loss_value(params, objective, dtype=None):
    """Total weighted loss at the current parameters (no gradient)."""
    y = forward_batch(params, objective.grid.points(), dtype=dtype)
    with np.errstate(over="ignore", invalid="ignore"):
        comps = objective.components(_fields_from_outputs(y, objective.grid,
                                                          objective.n_outputs))
        return objective.total(comps)


def loss_and_gradient(params, objective):
    """Loss plus d(loss)/d(theta) as one flat vector (layer order, W then b)."""
    y, layer_inputs, cos_pre = forward_with_cache(params, objective.grid.points())
    fields = _fields_from_outputs(y, objective.grid, objective.n_outputs)
    # overflow here is the documented divergence path, flagged just below
    with np.errstate(over="ignore", invalid="ignore"):
        comps = objective.components(fields)
        total = objective.total(comps)
    if not np.isfinite(total):
        return LossGradient(loss=total, components=comps, diverged=True)

    dfields = objective.field_adjoints(fields)
    dy = np.stack([d.ravel() for d in dfields], axis=1)

    n_layers = len(params.weights)
    grads = [None] * (2 * n_layers)
    d = dy
    for layer in range(n_layers - 1, -1, -1):
        grads[2 * layer] = layer_inputs[layer].T @ d
        grads[2 * layer + 1] = d.sum(axis=0)
        if layer > 0:
            d = (d @ params.weights[layer].T) * cos_pre[layer - 1]
    flat = np.concatenate([a.ravel() for a in grads])
    return LossGradient(loss=total, components=comps, grad=flat)


def fd_gradient_check(params, objective, eps=1e-5):
    """Worst relative error between analytic and central-difference gradients.

    The denominator max(|analytic|, |numeric|, 1e-12) guards components where
    both sides vanish.

    Two measures keep the audit meaningful at the resolution limit of central
    differences. The loss for the numeric side is evaluated in extended
    precision (np.longdouble) so the rounding of the loss value itself does
    not swamp small gradient entries when the loss is large. Directions whose
    analytic and numeric derivatives both sit below the residual
    finite-difference noise floor ulp(loss)/(2 eps) count as vanished: the
    cavity loss, for one, is invariant under a constant pressure shift, so
    the pressure-bias direction carries only rounding noise on both sides and
    no difference quotient can resolve it.
    """
    if not 1e-7 <= eps <= 1e-3:
        raise ValueError(f"eps must lie in [1e-7, 1e-3], got {eps}")
    result = loss_and_gradient(params, objective)
    if result.diverged:
        raise ValueError("cannot gradient-check diverged parameters")
    analytic = result.grad

    arch = params.architecture
    flat = params.to_flat()
    numeric = np.empty_like(analytic)
    from .network import MlpParams

    for k in range(flat.size):
        orig = flat[k]
        flat[k] = orig + eps
        lp = loss_value(MlpParams.from_flat(flat, arch), objective,
                        dtype=np.longdouble)
        flat[k] = orig - eps
        lm = loss_value(MlpParams.from_flat(flat, arch), objective,
                        dtype=np.longdouble)
        flat[k] = orig
        numeric[k] = float((lp - lm) / (2.0 * eps))

    ulp = float(np.finfo(np.longdouble).eps)
    fd_floor = max(1e-12, 32.0 * abs(result.loss) * ulp / (2.0 * eps))
    vanished = (np.abs(analytic) < fd_floor) & (np.abs(numeric) < fd_floor)
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), 1e-12)
    rel = np.abs(analytic - numeric) / denom
    rel[vanished] = 0.0
    return float(np.max(rel))
