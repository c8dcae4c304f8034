"""Fully-connected network with sine hidden activations and a linear output."""

import json
from dataclasses import dataclass

import numpy as np

from ._fastmath import fast_sin, sincos


@dataclass(frozen=True)
class Architecture:
    """Layer sizes: input (x, y) through hidden widths to the output fields."""

    hidden_widths: tuple
    output_dim: int = 1
    input_dim: int = 2

    def __post_init__(self):
        object.__setattr__(self, "hidden_widths", tuple(int(w) for w in self.hidden_widths))
        if len(self.hidden_widths) == 0:
            raise ValueError("need at least one hidden layer")
        if any(w < 1 for w in self.hidden_widths):
            raise ValueError(f"hidden widths must be >= 1, got {self.hidden_widths}")
        if self.input_dim < 1 or self.output_dim < 1:
            raise ValueError("input_dim and output_dim must be >= 1")

    @property
    def layer_dims(self):
        return (self.input_dim,) + self.hidden_widths + (self.output_dim,)

    @property
    def n_params(self):
        dims = self.layer_dims
        return sum(din * dout + dout for din, dout in zip(dims[:-1], dims[1:]))


@dataclass
class MlpParams:
    """Per-layer weight matrices (fan_in x fan_out) and bias vectors."""

    weights: list
    biases: list

    def __post_init__(self):
        if len(self.weights) != len(self.biases):
            raise ValueError("weights and biases must pair up per layer")
        for w, b in zip(self.weights, self.biases):
            if w.ndim != 2 or b.ndim != 1 or w.shape[1] != b.shape[0]:
                raise ValueError(f"layer shapes do not chain: W{w.shape} b{b.shape}")
        for prev, nxt in zip(self.weights[:-1], self.weights[1:]):
            if prev.shape[1] != nxt.shape[0]:
                raise ValueError("consecutive layer widths do not match")
        if not all(np.all(np.isfinite(a)) for a in self.weights + self.biases):
            raise ValueError("parameters contain non-finite values")

    @property
    def architecture(self):
        dims = [self.weights[0].shape[0]] + [w.shape[1] for w in self.weights]
        return Architecture(hidden_widths=tuple(dims[1:-1]), output_dim=dims[-1],
                            input_dim=dims[0])

    @property
    def n_params(self):
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    def to_flat(self):
        """Flatten to one vector: per layer, weights row-major then bias."""
        return np.concatenate([a.ravel() for w, b in zip(self.weights, self.biases)
                               for a in (w, b)])

    @classmethod
    def from_flat(cls, flat, arch):
        flat = np.asarray(flat, dtype=np.float64)
        if flat.size != arch.n_params:
            raise ValueError(f"expected {arch.n_params} values, got {flat.size}")
        dims = arch.layer_dims
        weights, biases, k = [], [], 0
        for din, dout in zip(dims[:-1], dims[1:]):
            weights.append(flat[k:k + din * dout].reshape(din, dout).copy())
            k += din * dout
            biases.append(flat[k:k + dout].copy())
            k += dout
        return cls(weights=weights, biases=biases)

    def copy(self):
        return MlpParams(weights=[w.copy() for w in self.weights],
                         biases=[b.copy() for b in self.biases])


def init_params(arch, seed):
    """Fan-in scaled uniform weights, zero biases; deterministic per seed."""
    rng = np.random.default_rng(seed)
    dims = arch.layer_dims
    weights, biases = [], []
    for din, dout in zip(dims[:-1], dims[1:]):
        lim = np.sqrt(6.0 / din)
        weights.append(rng.uniform(-lim, lim, size=(din, dout)))
        biases.append(np.zeros(dout))
    return MlpParams(weights=weights, biases=biases)


def _check_points(points):
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts.reshape(1, -1)
    if pts.ndim != 2:
        raise ValueError(f"points must be a (n, d) array, got shape {pts.shape}")
    if not np.all(np.isfinite(pts)):
        raise ValueError("points contain non-finite values")
    return pts


def forward_batch(params, points, dtype=None):
    """Evaluate the network at a batch of points, shape (n, output_dim).

    dtype selects the working precision: the float64 default runs the fast
    sine kernel; anything wider (e.g. np.longdouble, used by the gradient
    audit to push the finite-difference noise floor down) goes through
    numpy's generic sin.
    """
    z = _check_points(points)
    if dtype is None or dtype == np.float64:
        for w, b in zip(params.weights[:-1], params.biases[:-1]):
            z = fast_sin(z @ w + b)
        return z @ params.weights[-1] + params.biases[-1]
    z = z.astype(dtype)
    for w, b in zip(params.weights[:-1], params.biases[:-1]):
        z = np.sin(z @ w.astype(dtype) + b.astype(dtype))
    return z @ params.weights[-1].astype(dtype) + params.biases[-1].astype(dtype)


def forward_with_cache(params, points):
    """Forward pass keeping what reverse accumulation needs.

    Returns (outputs, layer_inputs, cos_pre): layer_inputs[l] is the input to
    layer l (layer_inputs[0] is the point batch) and cos_pre[l] is cos of the
    l-th hidden pre-activation, the exact derivative of its sine.
    """
    z = _check_points(points)
    layer_inputs = [z]
    cos_pre = []
    for w, b in zip(params.weights[:-1], params.biases[:-1]):
        s, c = sincos(z @ w + b)
        cos_pre.append(c)
        z = s
        layer_inputs.append(z)
    y = z @ params.weights[-1] + params.biases[-1]
    return y, layer_inputs, cos_pre


# ---------------------------------------------------------------------------
# Checkpoint format: one JSON header line with the architecture, then the
# flat parameter vector as little-endian float64 (weights row-major then
# bias, per layer).

def save_checkpoint(path, params):
    arch = params.architecture
    header = {
        "input_dim": arch.input_dim,
        "hidden_widths": list(arch.hidden_widths),
        "output_dim": arch.output_dim,
        "n_params": arch.n_params,
    }
    flat = params.to_flat().astype("<f8")
    with open(path, "wb") as fh:
        fh.write(json.dumps(header).encode("utf-8") + b"\n")
        fh.write(flat.tobytes())


def load_checkpoint(path):
    with open(path, "rb") as fh:
        header = json.loads(fh.readline().decode("utf-8"))
        raw = fh.read()
    arch = Architecture(hidden_widths=tuple(header["hidden_widths"]),
                        output_dim=header["output_dim"],
                        input_dim=header["input_dim"])
    flat = np.frombuffer(raw, dtype="<f8")
    if flat.size != header["n_params"] or flat.size != arch.n_params:
        raise ValueError(f"checkpoint has {flat.size} values, header says "
                         f"{header['n_params']}, architecture needs {arch.n_params}")
    return MlpParams.from_flat(flat.astype(np.float64), arch)
