"""Adam with stepwise learning-rate decay and the full-batch training loop.

One iteration processes every grid node, so one iteration is one epoch for
the learning-rate schedule. Runs are deterministic for a fixed seed and
configuration; a non-finite or exploding loss flags the run as diverged and
stops it instead of propagating NaNs.
"""

from dataclasses import dataclass

import numpy as np

from ._fastmath import tune_allocator
from .diffengine import loss_and_gradient
from .network import MlpParams, init_params
from .problems import make_objective

DIVERGENCE_THRESHOLD = 1e12


@dataclass(frozen=True)
class TrainConfig:
    lr0: float
    max_iters: int
    seed: int = 0
    decay_factor: float = 0.8
    decay_every: int = 1000
    beta1: float = 0.9
    beta2: float = 0.999
    eps_adam: float = 1e-8
    record_every: int = 100

    def __post_init__(self):
        if self.lr0 <= 0:
            raise ValueError("lr0 must be > 0")
        if not 0 < self.decay_factor <= 1:
            raise ValueError("decay_factor must lie in (0, 1]")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.decay_every < 1:
            raise ValueError("decay_every must be >= 1")


@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    t: int = 0

    @classmethod
    def zeros(cls, n_params):
        return cls(m=np.zeros(n_params), v=np.zeros(n_params))


@dataclass
class TrainHistory:
    loss: np.ndarray
    component_history: list
    params: MlpParams
    diverged: bool
    iterations: int
    final_components: dict = None


def lr_at(epoch, cfg):
    """Learning rate at a given epoch: lr0 * decay^floor(epoch/decay_every)."""
    if epoch < 0:
        raise ValueError("epoch must be >= 0")
    return cfg.lr0 * cfg.decay_factor ** (epoch // cfg.decay_every)


def adam_step(flat_params, grad, state, lr, cfg):
    """One bias-corrected Adam update. Returns (new_params, ok).

    A non-finite gradient leaves the parameters untouched and reports ok=False.
    """
    if not np.all(np.isfinite(grad)):
        return flat_params, False
    state.t += 1
    b1, b2 = cfg.beta1, cfg.beta2
    state.m *= b1
    state.m += (1.0 - b1) * grad
    state.v *= b2
    state.v += (1.0 - b2) * grad * grad
    mhat = state.m / (1.0 - b1 ** state.t)
    vhat = state.v / (1.0 - b2 ** state.t)
    return flat_params - lr * mhat / (np.sqrt(vhat) + cfg.eps_adam), True


def train(spec, scheme, grid, arch, cfg, weights=None, init=None):
    """Full-batch training loop; stops at max_iters or on divergence.

    Every iteration: forward over all N^2 nodes, exact loss gradient, one
    Adam step at the scheduled rate. Component losses are sampled every
    cfg.record_every iterations.
    """
    tune_allocator()
    objective = make_objective(spec, scheme, grid, weights=weights)
    params = init if init is not None else init_params(arch, cfg.seed)
    flat = params.to_flat()
    state = AdamState.zeros(flat.size)

    losses = np.empty(cfg.max_iters)
    comp_history = []
    diverged = False
    it = 0
    for it in range(cfg.max_iters):
        result = loss_and_gradient(MlpParams.from_flat(flat, arch), objective)
        if result.diverged or result.loss > DIVERGENCE_THRESHOLD:
            losses[it] = result.loss
            diverged = True
            it += 1
            break
        losses[it] = result.loss
        if it % cfg.record_every == 0:
            comp_history.append((it, dict(result.components)))
        flat, ok = adam_step(flat, result.grad, state, lr_at(it, cfg), cfg)
        if not ok:
            diverged = True
            it += 1
            break
    else:
        it = cfg.max_iters

    final = MlpParams.from_flat(flat, arch)
    final_components = None
    if not diverged:
        final_result = loss_and_gradient(final, objective)
        final_components = dict(final_result.components)
    return TrainHistory(loss=losses[:it], component_history=comp_history,
                        params=final, diverged=diverged, iterations=it,
                        final_components=final_components)
