"""The three benchmark problems: boundary data, loss components, weights.

Every residual is built from the central-difference stencils in `grid`, so
the corresponding finite-difference reference solution is an exact zero of
the interior loss. Loss components are means (per-node / per-boundary-node),
which keeps weights comparable across grid sizes.

Weight ratios are anchored at lambda_DBC = 1. The "nm2" scheme balances the
order of magnitude of the dominant quantifiable term in each component; the
"nm" scheme relaxes that ratio by a square root.
"""

from dataclasses import dataclass

import numpy as np

from .grid import (
    boundary_normal_derivative,
    boundary_normal_derivative_adjoint,
    gradient_central,
    gradient_central_adjoint,
    laplacian_cds,
    laplacian_cds_adjoint,
)

PROBLEMS = ("conduction", "convdiff", "cavity")
SCHEMES = ("equal", "nm", "nm2")


@dataclass(frozen=True)
class ProblemSpec:
    """Which PDE to solve, plus its one dimensionless parameter.

    pe is the cell Peclet number (convdiff only; the convection coefficient
    in the residual is Pe/h). re is the Reynolds number (cavity only).
    """

    kind: str
    pe: float = None
    re: float = None

    def __post_init__(self):
        if self.kind not in PROBLEMS:
            raise ValueError(f"unknown problem {self.kind!r}, expected one of {PROBLEMS}")
        if self.kind == "convdiff":
            if self.pe is None or self.pe <= 0:
                raise ValueError("convdiff needs pe > 0")
        elif self.pe is not None:
            raise ValueError(f"pe is only meaningful for convdiff, not {self.kind}")
        if self.kind == "cavity":
            if self.re is None or self.re <= 0:
                raise ValueError("cavity needs re > 0")
        elif self.re is not None:
            raise ValueError(f"re is only meaningful for cavity, not {self.kind}")

    @property
    def param_label(self):
        if self.kind == "convdiff":
            return f"Pe={self.pe:g}"
        if self.kind == "cavity":
            return f"Re={self.re:g}"
        return ""


@dataclass
class BoundarySpec:
    """Dirichlet targets on the full node array (interior entries unused).

    Scalar problems use g; the cavity uses g_u, g_v plus the homogeneous
    Neumann pressure target (identically zero, so not stored).
    """

    g: np.ndarray = None
    g_u: np.ndarray = None
    g_v: np.ndarray = None


def make_boundary(spec, grid):
    """Boundary data per problem; value-1 edges win at conflicting corners.

    conduction: T=0 on x=0, x=1, y=0 and T=1 on the hot wall y=1.
    convdiff:   T=0 on the inflow edges x=0, y=0 and T=1 on x=1, y=1.
    cavity:     u=1 on the moving lid y=1, all other wall velocities zero.
    """
    n = grid.n
    if spec.kind == "conduction":
        g = np.zeros((n, n))
        g[:, -1] = 1.0
        return BoundarySpec(g=g)
    if spec.kind == "convdiff":
        g = np.zeros((n, n))
        g[-1, :] = 1.0
        g[:, -1] = 1.0
        return BoundarySpec(g=g)
    g_u = np.zeros((n, n))
    g_u[:, -1] = 1.0
    return BoundarySpec(g_u=g_u, g_v=np.zeros((n, n)))


# ---------------------------------------------------------------------------
# Loss components. Scalar problems: {de, dbc}. Cavity: {nsx, nsy, c, dbc, nbc}.

def _boundary_mean_sq(resid, grid):
    m = grid.boundary_mask()
    return np.sum(resid[m] ** 2) / grid.n_boundary


def conduction_components(t_values, grid, bc):
    lap = laplacian_cds(t_values, grid)
    return {
        "de": np.mean(lap ** 2),
        "dbc": _boundary_mean_sq(t_values - bc.g, grid),
    }


def convdiff_residual(t_values, grid, pe):
    conv = gradient_central(t_values, grid, "x") + gradient_central(t_values, grid, "y")
    return laplacian_cds(t_values, grid) - (pe / grid.h) * conv


def convdiff_components(t_values, grid, spec, bc):
    r = convdiff_residual(t_values, grid, spec.pe)
    return {
        "de": np.mean(r ** 2),
        "dbc": _boundary_mean_sq(t_values - bc.g, grid),
    }


def _cavity_residuals(u, v, p, grid, re):
    ux = gradient_central(u, grid, "x")
    uy = gradient_central(u, grid, "y")
    vx = gradient_central(v, grid, "x")
    vy = gradient_central(v, grid, "y")
    ui = u[1:-1, 1:-1]
    vi = v[1:-1, 1:-1]
    r_nsx = (ui * ux + vi * uy + gradient_central(p, grid, "x")
             - laplacian_cds(u, grid) / re)
    r_nsy = (ui * vx + vi * vy + gradient_central(p, grid, "y")
             - laplacian_cds(v, grid) / re)
    r_c = ux + vy
    return r_nsx, r_nsy, r_c, (ux, uy, vx, vy)


def cavity_components(u, v, p, grid, spec, bc):
    r_nsx, r_nsy, r_c, _ = _cavity_residuals(u, v, p, grid, spec.re)
    m = grid.boundary_mask()
    dbc = np.sum((u - bc.g_u)[m] ** 2 + (v - bc.g_v)[m] ** 2) / grid.n_boundary
    dpdn = boundary_normal_derivative(p, grid)
    return {
        "nsx": np.mean(r_nsx ** 2),
        "nsy": np.mean(r_nsy ** 2),
        "c": np.mean(r_c ** 2),
        "dbc": dbc,
        "nbc": np.mean(dpdn ** 2),
    }


# ---------------------------------------------------------------------------
# Weight schemes.

@dataclass(frozen=True)
class WeightVector:
    """Per-component loss weights; lambda_dbc = 1 is the normalization anchor."""

    scheme: str
    values: dict

    def __post_init__(self):
        if any(v <= 0 for v in self.values.values()):
            raise ValueError("all loss weights must be > 0")

    def __getitem__(self, key):
        return self.values[key]

    def keys(self):
        return self.values.keys()


def compute_weights(spec, scheme, grid):
    """Weight ratios for the given problem, scheme, and grid spacing."""
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}, expected one of {SCHEMES}")
    h = grid.h
    if spec.kind == "conduction":
        de = {"equal": 1.0, "nm": h ** 2, "nm2": h ** 4}[scheme]
        values = {"de": de, "dbc": 1.0}
    elif spec.kind == "convdiff":
        de = {"equal": 1.0,
              "nm": h ** 2 / spec.pe,
              "nm2": h ** 4 / spec.pe ** 2}[scheme]
        values = {"de": de, "dbc": 1.0}
    else:
        if scheme == "equal":
            mom, cont = 1.0, 1.0
        elif scheme == "nm":
            mom, cont = spec.re * h ** 2, h
        else:
            mom, cont = spec.re ** 2 * h ** 4, h ** 2
        values = {"nsx": mom, "nsy": mom, "c": cont, "dbc": 1.0, "nbc": mom}
    return WeightVector(scheme=scheme, values=values)


def total_loss(components, weights):
    """Weighted sum of loss components; keys must match exactly."""
    if set(components.keys()) != set(weights.keys()):
        raise ValueError(f"component keys {sorted(components)} do not match "
                         f"weight keys {sorted(weights.keys())}")
    return sum(weights[k] * components[k] for k in sorted(components))


# ---------------------------------------------------------------------------
# Objectives: components plus exact adjoints with respect to the nodal fields.
# The adjoints are what the parameter-gradient engine chains through the MLP.

class GridObjective:
    """Loss pipeline for one (problem, weights, grid) triple."""

    def __init__(self, spec, grid, weights, bc=None):
        self.spec = spec
        self.grid = grid
        self.weights = weights
        self.bc = bc if bc is not None else make_boundary(spec, grid)
        self.n_outputs = 3 if spec.kind == "cavity" else 1

    def components(self, fields):
        if self.spec.kind == "conduction":
            return conduction_components(fields[0], self.grid, self.bc)
        if self.spec.kind == "convdiff":
            return convdiff_components(fields[0], self.grid, self.spec, self.bc)
        return cavity_components(*fields, self.grid, self.spec, self.bc)

    def total(self, components):
        return total_loss(components, self.weights)

    def field_adjoints(self, fields):
        """d(total)/d(field) for each output field, each shape (N, N)."""
        if self.spec.kind == "cavity":
            return self._cavity_adjoints(fields)
        return self._scalar_adjoints(fields)

    def _scalar_adjoints(self, fields):
        t = fields[0]
        g = self.grid
        w = self.weights
        if self.spec.kind == "conduction":
            r = laplacian_cds(t, g)
            dt = laplacian_cds_adjoint(2.0 * r / g.n_interior, g) * w["de"]
        else:
            r = convdiff_residual(t, g, self.spec.pe)
            rbar = 2.0 * r / g.n_interior
            dt = laplacian_cds_adjoint(rbar, g)
            pe_h = self.spec.pe / g.h
            dt -= pe_h * gradient_central_adjoint(rbar, g, "x")
            dt -= pe_h * gradient_central_adjoint(rbar, g, "y")
            dt *= w["de"]
        m = g.boundary_mask()
        dt += w["dbc"] * 2.0 * np.where(m, t - self.bc.g, 0.0) / g.n_boundary
        return [dt]

    def _cavity_adjoints(self, fields):
        u, v, p = fields
        g = self.grid
        w = self.weights
        re = self.spec.re
        r_nsx, r_nsy, r_c, (ux, uy, vx, vy) = _cavity_residuals(u, v, p, g, re)
        ui = u[1:-1, 1:-1]
        vi = v[1:-1, 1:-1]

        ax = w["nsx"] * 2.0 * r_nsx / g.n_interior
        ay = w["nsy"] * 2.0 * r_nsy / g.n_interior
        ac = w["c"] * 2.0 * r_c / g.n_interior

        du = np.zeros((g.n, g.n))
        dv = np.zeros((g.n, g.n))
        dp = np.zeros((g.n, g.n))

        # nsx residual: u*ux + v*uy + px - lap(u)/Re
        du[1:-1, 1:-1] += ax * ux
        du += gradient_central_adjoint(ax * ui, g, "x")
        du += gradient_central_adjoint(ax * vi, g, "y")
        du -= laplacian_cds_adjoint(ax, g) / re
        dv[1:-1, 1:-1] += ax * uy
        dp += gradient_central_adjoint(ax, g, "x")

        # nsy residual: u*vx + v*vy + py - lap(v)/Re
        du[1:-1, 1:-1] += ay * vx
        dv[1:-1, 1:-1] += ay * vy
        dv += gradient_central_adjoint(ay * ui, g, "x")
        dv += gradient_central_adjoint(ay * vi, g, "y")
        dv -= laplacian_cds_adjoint(ay, g) / re
        dp += gradient_central_adjoint(ay, g, "y")

        # continuity residual: ux + vy
        du += gradient_central_adjoint(ac, g, "x")
        dv += gradient_central_adjoint(ac, g, "y")

        # Dirichlet velocity boundary
        m = g.boundary_mask()
        scale = w["dbc"] * 2.0 / g.n_boundary
        du += scale * np.where(m, u - self.bc.g_u, 0.0)
        dv += scale * np.where(m, v - self.bc.g_v, 0.0)

        # Neumann pressure boundary
        dpdn = boundary_normal_derivative(p, g)
        dp += boundary_normal_derivative_adjoint(
            w["nbc"] * 2.0 * dpdn / g.n_boundary_noncorner, g)
        return [du, dv, dp]


def make_objective(spec, scheme, grid, weights=None):
    """Bind a problem, weighting scheme, and grid into a trainable objective."""
    if weights is None:
        weights = compute_weights(spec, scheme, grid)
    return GridObjective(spec=spec, grid=grid, weights=weights)
