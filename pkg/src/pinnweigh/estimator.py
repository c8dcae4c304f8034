"""sklearn-style estimator wrapping the training loop.

PinnSolver carries the per-problem defaults (architecture, learning rate,
iteration budget), trains on its own grid in fit(), and evaluates the
network anywhere in predict(), so it composes with sklearn tooling such as
get_params/set_params and clone.
"""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .grid import Field, make_grid
from .network import Architecture, forward_batch
from .optimizer import TrainConfig, train
from .problems import PROBLEMS, SCHEMES, ProblemSpec, compute_weights

PROBLEM_DEFAULTS = {
    "conduction": {"hidden_widths": (64, 64, 64, 64), "output_dim": 1,
                   "lr0": 1e-3, "max_iters": 50_000},
    "convdiff": {"hidden_widths": (64, 64, 64, 64), "output_dim": 1,
                 "lr0": 1e-3, "max_iters": 50_000},
    "cavity": {"hidden_widths": (64, 20, 20, 20), "output_dim": 3,
               "lr0": 1e-2, "max_iters": 80_000},
}

FIELD_NAMES = {"conduction": ("t",), "convdiff": ("t",), "cavity": ("u", "v", "p")}


def check_points(x):
    """Validate a point batch: finite (m, 2) float64 array."""
    pts = np.asarray(x, dtype=np.float64)
    if pts.ndim == 1 and pts.size == 2:
        pts = pts.reshape(1, 2)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError(f"expected points of shape (m, 2), got {np.shape(x)}")
    if not np.all(np.isfinite(pts)):
        raise ValueError("points contain non-finite values")
    return pts


def default_architecture(problem, hidden_widths=None):
    d = PROBLEM_DEFAULTS[problem]
    widths = tuple(hidden_widths) if hidden_widths is not None else d["hidden_widths"]
    return Architecture(hidden_widths=widths, output_dim=d["output_dim"])


class PinnSolver(BaseEstimator):
    """Trainable grid-sampled PDE solver with a fit/predict surface.

    Parameters mirror the experiment configuration keys: problem selects the
    PDE, scheme the loss-weight ratios, n the nodes per axis, and pe/re the
    problem parameter. hidden_widths, lr0, and max_iters default per problem.
    """

    def __init__(self, problem="conduction", scheme="nm", n=11, pe=None, re=None,
                 hidden_widths=None, lr0=None, max_iters=None, seed=0,
                 record_every=100):
        self.problem = problem
        self.scheme = scheme
        self.n = n
        self.pe = pe
        self.re = re
        self.hidden_widths = hidden_widths
        self.lr0 = lr0
        self.max_iters = max_iters
        self.seed = seed
        self.record_every = record_every

    def _spec(self):
        if self.problem not in PROBLEMS:
            raise ValueError(f"unknown problem {self.problem!r}")
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        kwargs = {}
        if self.problem == "convdiff":
            kwargs["pe"] = self.pe
        if self.problem == "cavity":
            kwargs["re"] = self.re
        return ProblemSpec(kind=self.problem, **kwargs)

    def _train_config(self):
        d = PROBLEM_DEFAULTS[self.problem]
        return TrainConfig(
            lr0=self.lr0 if self.lr0 is not None else d["lr0"],
            max_iters=self.max_iters if self.max_iters is not None else d["max_iters"],
            seed=self.seed,
            record_every=self.record_every,
        )

    def fit(self, X=None, y=None):
        """Train on the problem's own grid; X and y are ignored."""
        spec = self._spec()
        grid = make_grid(self.n)
        arch = default_architecture(self.problem, self.hidden_widths)
        cfg = self._train_config()
        history = train(spec, self.scheme, grid, arch, cfg)
        self.spec_ = spec
        self.grid_ = grid
        self.architecture_ = arch
        self.weights_ = compute_weights(spec, self.scheme, grid)
        self.history_ = history
        self.params_ = history.params
        self.diverged_ = history.diverged
        self.loss_components_ = history.final_components
        return self

    def _check_fitted(self):
        if not hasattr(self, "params_"):
            raise NotFittedError("this PinnSolver has not been fitted yet")

    def predict(self, X):
        """Network outputs at arbitrary points, shape (m, n_outputs)."""
        self._check_fitted()
        return forward_batch(self.params_, check_points(X))

    def predict_fields(self):
        """Predicted fields on the training grid, keyed per problem."""
        self._check_fitted()
        y = forward_batch(self.params_, self.grid_.points())
        names = FIELD_NAMES[self.problem]
        n = self.grid_.n
        return {name: Field(y[:, k].reshape(n, n)) for k, name in enumerate(names)}
