"""Uniform unit-square grid, central-difference stencils, and their adjoints.

The node lattice is N x N with spacing h = 1/(N-1); node (i, j) sits at
(x, y) = (i*h, j*h), so axis 0 of every field array is x and axis 1 is y.
The same stencil operators feed both the PINN losses and the reference
solvers, which is what makes the discrete solutions exact minimizers of
the residual losses.
"""

import csv
from dataclasses import dataclass

import numpy as np


class GridError(ValueError):
    """Raised for invalid grid construction."""


@dataclass(frozen=True)
class Grid:
    """Uniform N x N node lattice on [0, 1]^2.

    interior nodes are 1 <= i, j <= N-2; the boundary counts each corner
    once, so |boundary| = 4(N-1).
    """

    n: int
    h: float

    @property
    def n_nodes(self):
        return self.n * self.n

    @property
    def n_interior(self):
        return (self.n - 2) ** 2

    @property
    def n_boundary(self):
        return 4 * (self.n - 1)

    @property
    def n_boundary_noncorner(self):
        return 4 * (self.n - 2)

    def coords(self):
        """Node coordinates along one axis."""
        return np.linspace(0.0, 1.0, self.n)

    def points(self):
        """All node coordinates as an (N*N, 2) array, row-major over (i, j)."""
        xs = self.coords()
        gx, gy = np.meshgrid(xs, xs, indexing="ij")
        return np.stack([gx.ravel(), gy.ravel()], axis=1)

    def boundary_mask(self):
        m = np.zeros((self.n, self.n), dtype=bool)
        m[0, :] = m[-1, :] = m[:, 0] = m[:, -1] = True
        return m


def make_grid(n):
    """Build the uniform grid with h = 1/(N-1)."""
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool):
        raise GridError(f"node count must be an integer, got {n!r}")
    if n < 3:
        raise GridError(f"grid needs at least 3 nodes per axis, got {n}")
    return Grid(n=int(n), h=1.0 / (n - 1))


@dataclass
class Field:
    """Scalar nodal values on a grid, indexed [i, j] with (0,0) at the origin."""

    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2 or self.values.shape[0] != self.values.shape[1]:
            raise ValueError(f"field must be square 2-D, got shape {self.values.shape}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field contains non-finite values")


# ---------------------------------------------------------------------------
# Stencil operators (interior) and their adjoints (scatter back to all nodes).
# All are linear maps, so adjoint correctness is testable via <Ax, y> = <x, A'y>.

def laplacian_cds(values, grid):
    """5-point Laplacian on interior nodes, shape (N-2, N-2)."""
    f = values
    h2 = grid.h * grid.h
    return (f[2:, 1:-1] + f[:-2, 1:-1] + f[1:-1, 2:] + f[1:-1, :-2]
            - 4.0 * f[1:-1, 1:-1]) / h2


def laplacian_cds_adjoint(r, grid):
    out = np.zeros((grid.n, grid.n))
    w = r / (grid.h * grid.h)
    out[2:, 1:-1] += w
    out[:-2, 1:-1] += w
    out[1:-1, 2:] += w
    out[1:-1, :-2] += w
    out[1:-1, 1:-1] -= 4.0 * w
    return out


def gradient_central(values, grid, axis):
    """Central first derivative on interior nodes along 'x' or 'y'."""
    f = values
    two_h = 2.0 * grid.h
    if axis == "x":
        return (f[2:, 1:-1] - f[:-2, 1:-1]) / two_h
    if axis == "y":
        return (f[1:-1, 2:] - f[1:-1, :-2]) / two_h
    raise ValueError(f"axis must be 'x' or 'y', got {axis!r}")


def gradient_central_adjoint(r, grid, axis):
    out = np.zeros((grid.n, grid.n))
    w = r / (2.0 * grid.h)
    if axis == "x":
        out[2:, 1:-1] += w
        out[:-2, 1:-1] -= w
    elif axis == "y":
        out[1:-1, 2:] += w
        out[1:-1, :-2] -= w
    else:
        raise ValueError(f"axis must be 'x' or 'y', got {axis!r}")
    return out


# Edge ordering used by the one-sided normal-derivative operator.
EDGES = ("left", "right", "bottom", "top")


def boundary_normal_derivative(values, grid):
    """Inward-normal derivative at non-corner boundary nodes.

    Second-order one-sided stencil (-3 f0 + 4 f1 - f2)/(2h) along the inward
    normal; corners are excluded. Returns shape (4, N-2), edges ordered as
    EDGES with the tangential index running 1..N-2.
    """
    f = values
    two_h = 2.0 * grid.h
    out = np.empty((4, grid.n - 2), dtype=f.dtype)
    out[0] = (-3.0 * f[0, 1:-1] + 4.0 * f[1, 1:-1] - f[2, 1:-1]) / two_h
    out[1] = (-3.0 * f[-1, 1:-1] + 4.0 * f[-2, 1:-1] - f[-3, 1:-1]) / two_h
    out[2] = (-3.0 * f[1:-1, 0] + 4.0 * f[1:-1, 1] - f[1:-1, 2]) / two_h
    out[3] = (-3.0 * f[1:-1, -1] + 4.0 * f[1:-1, -2] - f[1:-1, -3]) / two_h
    return out


def boundary_normal_derivative_adjoint(r, grid):
    out = np.zeros((grid.n, grid.n))
    w = r / (2.0 * grid.h)
    out[0, 1:-1] += -3.0 * w[0]
    out[1, 1:-1] += 4.0 * w[0]
    out[2, 1:-1] += -1.0 * w[0]
    out[-1, 1:-1] += -3.0 * w[1]
    out[-2, 1:-1] += 4.0 * w[1]
    out[-3, 1:-1] += -1.0 * w[1]
    out[1:-1, 0] += -3.0 * w[2]
    out[1:-1, 1] += 4.0 * w[2]
    out[1:-1, 2] += -1.0 * w[2]
    out[1:-1, -1] += -3.0 * w[3]
    out[1:-1, -2] += 4.0 * w[3]
    out[1:-1, -3] += -1.0 * w[3]
    return out


def mse(a, b):
    """Mean squared difference of two equal-length value lists."""
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.size != b.size:
        raise ValueError(f"length mismatch: {a.size} vs {b.size}")
    if a.size == 0:
        raise ValueError("mse needs at least one value")
    d = a - b
    return float(np.mean(d * d))


# ---------------------------------------------------------------------------
# Field serialization: CSV with header x,y,value, row-major over nodes,
# 17-significant-digit decimals (lossless float64 round trip).

def write_field_csv(path, field, grid):
    values = field.values if isinstance(field, Field) else np.asarray(field)
    if values.shape != (grid.n, grid.n):
        raise ValueError(f"field shape {values.shape} does not match grid n={grid.n}")
    xs = grid.coords()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "y", "value"])
        for i in range(grid.n):
            for j in range(grid.n):
                w.writerow([f"{xs[i]:.17g}", f"{xs[j]:.17g}", f"{values[i, j]:.17g}"])


def read_field_csv(path):
    """Read a field CSV back into (Field, Grid)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["x", "y", "value"]:
            raise ValueError(f"unexpected field CSV header: {header}")
        rows = [(float(x), float(y), float(v)) for x, y, v in reader]
    n = int(round(np.sqrt(len(rows))))
    if n * n != len(rows):
        raise ValueError(f"field CSV has {len(rows)} rows, not a square node count")
    grid = make_grid(n)
    values = np.array([v for _, _, v in rows]).reshape(n, n)
    return Field(values), grid
