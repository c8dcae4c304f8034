"""Finite-difference reference solvers for the three benchmarks.

Gauss-Seidel (in-place lexicographic sweeps, numba-compiled) handles the
conduction and convection-diffusion equations; a sparse direct solve of the
identical stencil provides the convection-diffusion oracle at cell Peclet
numbers where Gauss-Seidel loses diagonal dominance and blows up. The
lid-driven cavity uses a staggered-grid projection method marched to steady
state, then collocates velocities and pressure back onto the node lattice.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from numba import njit

from .grid import Field

GS_CONVERGED = 0
GS_CAP = 1
GS_NONFINITE = 2


@dataclass
class FdmSolution:
    """Reference fields plus convergence metadata."""

    fields: dict
    iterations: int
    converged: bool
    residual: float
    meta: dict = field(default_factory=dict)

    def to_json_record(self):
        return {"iterations": self.iterations,
                "final_residual": self.residual,
                "converged": self.converged}


@njit(cache=True)
def _gs_sweeps(t, pe, tol, max_sweeps):
    """Sweep T[i,j] = (sum of neighbors - (pe/2)*(central differences))/4.

    Per-node relative change uses the pre-update value, matching the
    convergence criterion max |T_new - T_old| / (1e-20 + |T_old|) < tol.
    """
    n = t.shape[0]
    worst = np.inf
    for sweep in range(max_sweeps):
        worst = 0.0
        for i in range(1, n - 1):
            for j in range(1, n - 1):
                old = t[i, j]
                new = (t[i + 1, j] + t[i - 1, j] + t[i, j + 1] + t[i, j - 1]
                       - 0.5 * pe * ((t[i + 1, j] - t[i - 1, j])
                                     + (t[i, j + 1] - t[i, j - 1]))) / 4.0
                if not np.isfinite(new):
                    t[i, j] = new
                    return sweep + 1, np.inf, GS_NONFINITE
                t[i, j] = new
                rel = abs(new - old) / (1e-20 + abs(old))
                if rel > worst:
                    worst = rel
        if worst < tol:
            return sweep + 1, worst, GS_CONVERGED
    return max_sweeps, worst, GS_CAP


def _apply_dirichlet(t, g):
    t[0, :] = g[0, :]
    t[-1, :] = g[-1, :]
    t[:, 0] = g[:, 0]
    t[:, -1] = g[:, -1]


def solve_conduction_gs(grid, bc, tol=1e-6, max_sweeps=1_000_000):
    """Gauss-Seidel for the discrete Laplace equation with Dirichlet data."""
    t = np.zeros((grid.n, grid.n))
    _apply_dirichlet(t, bc.g)
    sweeps, worst, code = _gs_sweeps(t, 0.0, tol, max_sweeps)
    return FdmSolution(fields={"t": Field(t)}, iterations=sweeps,
                       converged=code == GS_CONVERGED, residual=float(worst))


def solve_convdiff_gs(grid, pe, bc, tol=1e-6, max_sweeps=1_000_000):
    """Gauss-Seidel for the convection-diffusion stencil.

    The update loses diagonal dominance for cell Peclet numbers above 2 and
    the sweeps can blow up; the convergence flag reports this honestly and a
    non-finite field comes back flagged rather than raising.
    """
    t = np.zeros((grid.n, grid.n))
    _apply_dirichlet(t, bc.g)
    sweeps, worst, code = _gs_sweeps(t, float(pe), tol, max_sweeps)
    fields = {"t": Field(np.nan_to_num(t))} if code == GS_NONFINITE else {"t": Field(t)}
    return FdmSolution(fields=fields, iterations=sweeps,
                       converged=code == GS_CONVERGED, residual=float(worst),
                       meta={"nonfinite": code == GS_NONFINITE})


def solve_convdiff_direct(grid, pe, bc):
    """Direct sparse solve of the same linear system the sweeps iterate on.

    Eliminating T[i,j] from the stencil gives, per interior node,
    -4 T_P + (1 -/+ pe/2) T_E/N + (1 +/- pe/2) T_W/S = Dirichlet terms.
    The solution exists regardless of iterative convergence.
    """
    n = grid.n
    ni = n - 2
    a_dn = 1.0 - pe / 2.0   # downstream (i+1 or j+1)
    a_up = 1.0 + pe / 2.0   # upstream (i-1 or j-1)

    def k_of(i, j):
        return (i - 1) * ni + (j - 1)

    rows, cols, vals = [], [], []
    rhs = np.zeros(ni * ni)
    for i in range(1, n - 1):
        for j in range(1, n - 1):
            k = k_of(i, j)
            rows.append(k)
            cols.append(k)
            vals.append(-4.0)
            for ii, jj, a in ((i + 1, j, a_dn), (i - 1, j, a_up),
                              (i, j + 1, a_dn), (i, j - 1, a_up)):
                if 1 <= ii <= n - 2 and 1 <= jj <= n - 2:
                    rows.append(k)
                    cols.append(k_of(ii, jj))
                    vals.append(a)
                else:
                    rhs[k] -= a * bc.g[ii, jj]
    mat = sp.csc_matrix((vals, (rows, cols)), shape=(ni * ni, ni * ni))
    interior = spla.spsolve(mat, rhs)
    if not np.all(np.isfinite(interior)):
        raise np.linalg.LinAlgError("convection-diffusion system is singular")
    t = np.zeros((n, n))
    _apply_dirichlet(t, bc.g)
    t[1:-1, 1:-1] = interior.reshape(ni, ni)
    return Field(t)


# ---------------------------------------------------------------------------
# Lid-driven cavity: staggered projection method.
#
# Layout for an N-node grid (nc = N-1 cells of size h):
#   u[i, j] at (i*h, (j+1/2)*h)        shape (N, nc), columns i=0/N-1 on walls
#   v[i, j] at ((i+1/2)*h, j*h)        shape (nc, N), rows j=0/N-1 on walls
#   p[i, j] at ((i+1/2)*h, (j+1/2)*h)  shape (nc, nc)
# Tangential wall/lid conditions enter through linear ghost values.


@dataclass(frozen=True)
class CavityConfig:
    re: float
    dt: float = None
    steady_tol: float = 1e-6
    poisson_tol: float = 1e-8
    max_steps: int = 200_000
    poisson_max_sweeps: int = 200_000
    lid_velocity: float = 1.0

    def __post_init__(self):
        if self.re <= 0:
            raise ValueError("re must be > 0")
        if self.dt is not None and self.dt <= 0:
            raise ValueError("dt must be > 0")
        if self.steady_tol <= 0 or self.poisson_tol <= 0:
            raise ValueError("tolerances must be > 0")

    def timestep(self, h):
        """Default dt from the diffusive (Re h^2/4) and convective (h/4) limits."""
        if self.dt is not None:
            return self.dt
        return 0.8 * min(self.re * h * h / 4.0, h / 4.0)


@njit(cache=True)
def _gs_poisson_neumann(p, rhs, h, tol, max_sweeps):
    """Gauss-Seidel for lap(p) = rhs with dP/dn = 0 on all cell-edge walls.

    Mirror ghosts reduce the edge-cell stencil to its in-domain neighbors.
    Stops on successive-change max-norm below tol.
    """
    nc = p.shape[0]
    h2 = h * h
    worst = np.inf
    for sweep in range(max_sweeps):
        worst = 0.0
        for i in range(nc):
            for j in range(nc):
                acc = 0.0
                cnt = 0
                if i > 0:
                    acc += p[i - 1, j]
                    cnt += 1
                if i < nc - 1:
                    acc += p[i + 1, j]
                    cnt += 1
                if j > 0:
                    acc += p[i, j - 1]
                    cnt += 1
                if j < nc - 1:
                    acc += p[i, j + 1]
                    cnt += 1
                old = p[i, j]
                new = (acc - h2 * rhs[i, j]) / cnt
                p[i, j] = new
                d = abs(new - old)
                if d > worst:
                    worst = d
        if worst < tol:
            return sweep + 1, True
    return max_sweeps, False


def _staggered_divergence(u, v, h):
    return (u[1:, :] - u[:-1, :]) / h + (v[:, 1:] - v[:, :-1]) / h


def solve_cavity_projection(grid, cfg):
    """March the fractional-step scheme to steady state and collocate.

    Each time step advances the momentum predictor (explicit convection,
    diffusion, and the previous pressure gradient), adds the old pressure
    gradient back, solves the pressure Poisson equation by Gauss-Seidel, and
    corrects to a discretely divergence-free velocity. Steady state is
    declared when max |v_new - v_old| / dt drops below steady_tol.
    """
    n = grid.n
    nc = n - 1
    h = grid.h
    nu = 1.0 / cfg.re
    dt = cfg.timestep(h)
    lid = cfg.lid_velocity

    u = np.zeros((n, nc))
    v = np.zeros((nc, n))
    p = np.zeros((nc, nc))

    converged = False
    change = np.inf
    steps = 0
    poisson_sweeps_total = 0
    for step in range(cfg.max_steps):
        # ghost-padded tangential neighbors
        ue = np.empty((n, nc + 2))
        ue[:, 1:-1] = u
        ue[:, 0] = -u[:, 0]
        ue[:, -1] = 2.0 * lid - u[:, -1]
        ve = np.empty((nc + 2, n))
        ve[1:-1, :] = v
        ve[0, :] = -v[0, :]
        ve[-1, :] = -v[-1, :]

        # predictor for u on interior vertical faces (i = 1..N-2)
        uc = ue[1:-1, 1:-1]
        dudx = (ue[2:, 1:-1] - ue[:-2, 1:-1]) / (2.0 * h)
        dudy = (ue[1:-1, 2:] - ue[1:-1, :-2]) / (2.0 * h)
        lap_u = (ue[2:, 1:-1] + ue[:-2, 1:-1] + ue[1:-1, 2:] + ue[1:-1, :-2]
                 - 4.0 * uc) / (h * h)
        v_at_u = 0.25 * (v[:-1, :-1] + v[1:, :-1] + v[:-1, 1:] + v[1:, 1:])
        dpdx = (p[1:, :] - p[:-1, :]) / h
        u_star = u.copy()
        u_star[1:-1, :] = u[1:-1, :] + dt * (-(uc * dudx + v_at_u * dudy)
                                             - dpdx + nu * lap_u)

        # predictor for v on interior horizontal faces (j = 1..N-2)
        vc = ve[1:-1, 1:-1]
        dvdx = (ve[2:, 1:-1] - ve[:-2, 1:-1]) / (2.0 * h)
        dvdy = (ve[1:-1, 2:] - ve[1:-1, :-2]) / (2.0 * h)
        lap_v = (ve[2:, 1:-1] + ve[:-2, 1:-1] + ve[1:-1, 2:] + ve[1:-1, :-2]
                 - 4.0 * vc) / (h * h)
        u_at_v = 0.25 * (u[:-1, :-1] + u[1:, :-1] + u[:-1, 1:] + u[1:, 1:])
        dpdy = (p[:, 1:] - p[:, :-1]) / h
        v_star = v.copy()
        v_star[:, 1:-1] = v[:, 1:-1] + dt * (-(u_at_v * dvdx + vc * dvdy)
                                             - dpdy + nu * lap_v)

        # add the old pressure gradient back (wall-normal faces stay zero)
        u_ss = u_star
        v_ss = v_star
        u_ss[1:-1, :] += dt * dpdx
        v_ss[:, 1:-1] += dt * dpdy

        rhs = _staggered_divergence(u_ss, v_ss, h) / dt
        sweeps, ok = _gs_poisson_neumann(p, rhs, h, cfg.poisson_tol,
                                         cfg.poisson_max_sweeps)
        poisson_sweeps_total += sweeps
        if not ok:
            raise RuntimeError(f"pressure Poisson stalled at time step {step}")
        p -= p.mean()   # gauge fix; only grad(p) enters the velocities

        u_new = u_ss
        v_new = v_ss
        u_new[1:-1, :] = u_ss[1:-1, :] - dt * (p[1:, :] - p[:-1, :]) / h
        v_new[:, 1:-1] = v_ss[:, 1:-1] - dt * (p[:, 1:] - p[:, :-1]) / h

        change = max(np.max(np.abs(u_new - u)), np.max(np.abs(v_new - v))) / dt
        u, v = u_new, v_new
        steps = step + 1
        if change < cfg.steady_tol:
            converged = True
            break

    max_div = float(np.max(np.abs(_staggered_divergence(u, v, h))))
    u_node, v_node, p_node = _collocate(u, v, p, n, lid)
    return FdmSolution(
        fields={"u": Field(u_node), "v": Field(v_node), "p": Field(p_node)},
        iterations=steps,
        converged=converged,
        residual=float(change),
        meta={"dt": dt, "max_divergence": max_div,
              "poisson_sweeps": poisson_sweeps_total},
    )


def _collocate(u, v, p, n, lid):
    """Average staggered values onto the N x N node lattice.

    Boundary nodes take the wall data directly; the moving lid (including its
    corners) carries the lid velocity.
    """
    u_node = np.zeros((n, n))
    u_node[:, 1:-1] = 0.5 * (u[:, :-1] + u[:, 1:])
    u_node[:, 0] = 0.0
    u_node[:, -1] = lid

    v_node = np.zeros((n, n))
    v_node[1:-1, :] = 0.5 * (v[:-1, :] + v[1:, :])
    v_node[0, :] = 0.0
    v_node[-1, :] = 0.0

    pp = np.pad(p, 1, mode="edge")
    p_node = 0.25 * (pp[:-1, :-1] + pp[1:, :-1] + pp[:-1, 1:] + pp[1:, 1:])
    return u_node, v_node, p_node
