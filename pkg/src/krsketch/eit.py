"""Linearized electrical impedance tomography benchmark on the unit square.

The forward model is the conductivity equation div(sigma grad u) = 0 with
Dirichlet data, discretized with bilinear quadrilateral elements on a
uniform nx-by-nx grid.  Each boundary node s drives one background solve
rho_s (a discrete delta: one at node s, zero on the rest of the boundary),
and the linearized sensitivity of the pair (s1, s2) to a per-cell
conductivity bump is the quadrature of grad rho_s1 . grad rho_s2 over the
cell.  Collecting all pairs gives a (n_sources^2)-by-(nx^2) matrix whose
column k is a short sum of Kronecker products of gradient evaluations,
one term per quadrature point and component, so the whole system is a
column-wise Khatri-Rao operator and never needs dense assembly.

Ground truth is a sparse cellwise perturbation (two small squares by
default); data is the clean forward image of that perturbation plus white
noise of standard deviation ``noise_sd``.  Reconstructions are scored like
the synthetic benchmark: relative excess of the sketched solution's full
residual over the full least-squares baseline.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse
import scipy.sparse.linalg

from .lsq import DEFAULT_RCOND, relative_error, residual_sq_full, solve_ls
from .records import SweepRecord
from .sketches import make_sketch, sketch_system
from .synthbench import SweepConfig
from .tensor_core import KhatriRaoOperator, kr_apply, kr_materialize

EIT_R_GRID_DEFAULT = (676, 1444, 2500, 3844, 5476)
DEFAULT_NX = 20
DEFAULT_SIGMA_STAR = 10.0
DEFAULT_NOISE_SD = 1e-8

# Two opposite-corner squares of side 0.2 and unit amplitude.
DEFAULT_INCLUSIONS = ((0.0, 0.8, 0.2, 1.0), (0.8, 0.0, 0.2, 1.0))

# Bilinear element stiffness on a square, corner order (bl, br, tr, tl).
# Independent of the element size; scale by the conductivity to assemble.
_K_REF = (
    np.array(
        [
            [4.0, -1.0, -2.0, -1.0],
            [-1.0, 4.0, -1.0, -2.0],
            [-2.0, -1.0, 4.0, -1.0],
            [-1.0, -2.0, -1.0, 4.0],
        ]
    )
    / 6.0
)

_GAUSS = 1.0 / math.sqrt(3.0)
QUADRATURES = {
    # (xi, eta, weight in reference [-1, 1]^2 coordinates)
    "one_point": ((0.0, 0.0, 4.0),),
    "four_point": (
        (-_GAUSS, -_GAUSS, 1.0),
        (_GAUSS, -_GAUSS, 1.0),
        (_GAUSS, _GAUSS, 1.0),
        (-_GAUSS, _GAUSS, 1.0),
    ),
}


@dataclass(frozen=True)
class Mesh2D:
    """Uniform bilinear-element mesh of the unit square.

    Node (ix, iy) sits at (ix*h, iy*h) and has index iy*(nx+1) + ix.
    ``cells`` holds corner node indices in (bl, br, tr, tl) order for cell
    k = cy*nx + cx.  ``boundary_nodes`` walks the boundary counterclockwise
    from the origin, 4*nx nodes in all.
    """

    nx: int
    h: float
    nodes: np.ndarray
    cells: np.ndarray
    boundary_nodes: np.ndarray
    interior_nodes: np.ndarray

    @property
    def n_nodes(self) -> int:
        return (self.nx + 1) ** 2

    @property
    def n_cells(self) -> int:
        return self.nx**2

    def cell_centers(self) -> np.ndarray:
        cx, cy = np.meshgrid(np.arange(self.nx), np.arange(self.nx))
        return np.column_stack(
            [(cx.ravel() + 0.5) * self.h, (cy.ravel() + 0.5) * self.h]
        )


def build_mesh(nx: int) -> Mesh2D:
    if nx < 2:
        raise ValueError("need at least a 2x2 cell grid")
    h = 1.0 / nx
    side = nx + 1
    ix, iy = np.meshgrid(np.arange(side), np.arange(side))
    nodes = np.column_stack([ix.ravel() * h, iy.ravel() * h])

    cx, cy = np.meshgrid(np.arange(nx), np.arange(nx))
    bl = (cy * side + cx).ravel()
    cells = np.column_stack([bl, bl + 1, bl + side + 1, bl + side])

    walk = []
    walk += [ix for ix in range(side)]
    walk += [iy * side + nx for iy in range(1, side)]
    walk += [nx * side + ix for ix in range(nx - 1, -1, -1)]
    walk += [iy * side for iy in range(nx - 1, 0, -1)]
    boundary = np.array(walk)
    mask = np.ones(side * side, dtype=bool)
    mask[boundary] = False
    return Mesh2D(
        nx=nx,
        h=h,
        nodes=nodes,
        cells=cells,
        boundary_nodes=boundary,
        interior_nodes=np.flatnonzero(mask),
    )


def assemble_stiffness(mesh: Mesh2D, sigma: float) -> scipy.sparse.csr_matrix:
    """Global stiffness for constant conductivity sigma."""
    if sigma <= 0:
        raise ValueError("conductivity must be positive")
    rows = np.repeat(mesh.cells, 4, axis=1).ravel()
    cols = np.tile(mesh.cells, (1, 4)).ravel()
    data = np.tile(sigma * _K_REF.ravel(), mesh.n_cells)
    n = mesh.n_nodes
    return scipy.sparse.coo_matrix((data, (rows, cols)), shape=(n, n)).tocsr()


def solve_background(mesh: Mesh2D, sigma_star: float, boundary_values) -> np.ndarray:
    """Solve the constant-conductivity Dirichlet problem; ``boundary_values``
    follows the mesh boundary-node order.  Returns the full nodal field."""
    boundary_values = np.asarray(boundary_values, dtype=float)
    if boundary_values.shape != mesh.boundary_nodes.shape:
        raise ValueError("boundary data must match the boundary node count")
    stiff = assemble_stiffness(mesh, sigma_star)
    k_ii = stiff[mesh.interior_nodes][:, mesh.interior_nodes].tocsc()
    k_ib = stiff[mesh.interior_nodes][:, mesh.boundary_nodes]
    u = np.zeros(mesh.n_nodes)
    u[mesh.boundary_nodes] = boundary_values
    u[mesh.interior_nodes] = scipy.sparse.linalg.splu(k_ii).solve(
        -(k_ib @ boundary_values)
    )
    return u


def forward_bank(
    mesh: Mesh2D,
    sigma_star: float,
    source_nodes=None,
    delta_scale: float = 1.0,
) -> np.ndarray:
    """Background solves for a bank of boundary point sources.

    Source s imposes ``delta_scale`` at one boundary node and zero at the
    others.  One sparse factorization serves every source.  Returns the
    (n_nodes, n_sources) matrix of nodal fields.
    """
    if source_nodes is None:
        source_nodes = mesh.boundary_nodes
    source_nodes = np.asarray(source_nodes)
    positions = {node: i for i, node in enumerate(mesh.boundary_nodes)}
    try:
        source_pos = np.array([positions[int(s)] for s in source_nodes])
    except KeyError as exc:
        raise ValueError(f"source node {exc.args[0]} is not a boundary node") from None

    stiff = assemble_stiffness(mesh, sigma_star)
    k_ii = stiff[mesh.interior_nodes][:, mesh.interior_nodes].tocsc()
    k_ib = stiff[mesh.interior_nodes][:, mesh.boundary_nodes].tocsc()
    lu = scipy.sparse.linalg.splu(k_ii)

    rhs = -delta_scale * k_ib[:, source_pos].toarray()
    bank = np.zeros((mesh.n_nodes, source_nodes.size))
    bank[mesh.interior_nodes] = lu.solve(rhs)
    bank[source_nodes, np.arange(source_nodes.size)] = delta_scale
    return bank


def _gradient_factors(mesh: Mesh2D, bank: np.ndarray, xi: float, eta: float):
    """Gradient components of every bank field at one reference point of
    every cell; two (n_sources, n_cells) matrices."""
    corner_vals = bank[mesh.cells]  # (n_cells, 4, n_sources)
    d_xi = np.array([-(1 - eta), (1 - eta), (1 + eta), -(1 + eta)]) / 4.0
    d_eta = np.array([-(1 - xi), -(1 + xi), (1 + xi), (1 - xi)]) / 4.0
    scale = 2.0 / mesh.h
    grad_x = scale * np.einsum("cfs,f->sc", corner_vals, d_xi)
    grad_y = scale * np.einsum("cfs,f->sc", corner_vals, d_eta)
    return grad_x, grad_y


def assemble_system(
    mesh: Mesh2D, bank: np.ndarray, quadrature: str = "one_point"
) -> KhatriRaoOperator:
    """Sensitivity operator as a Khatri-Rao sum over quadrature points.

    Entry ((s1, s2), k) approximates the integral over cell k of
    grad rho_s1 . grad rho_s2.  Each quadrature point and gradient
    component contributes one factor pair (W, W) with
    W = sqrt(weight) * gradient matrix, so the one-point rule yields two
    terms and the four-point rule eight.
    """
    if quadrature not in QUADRATURES:
        raise ValueError(f"unknown quadrature {quadrature!r}")
    if bank.shape[0] != mesh.n_nodes:
        raise ValueError("bank must hold one nodal field per column")
    jacobian = mesh.h**2 / 4.0  # reference cell measure 4 maps to cell area h^2
    terms = []
    for xi, eta, w_ref in QUADRATURES[quadrature]:
        root_w = math.sqrt(w_ref * jacobian)
        grad_x, grad_y = _gradient_factors(mesh, bank, xi, eta)
        terms.append((root_w * grad_x, root_w * grad_x))
        terms.append((root_w * grad_y, root_w * grad_y))
    return KhatriRaoOperator(tuple(terms))


def inclusion_field(mesh: Mesh2D, inclusions=DEFAULT_INCLUSIONS) -> np.ndarray:
    """Cellwise perturbation: each (x0, y0, side, amplitude) square adds its
    amplitude to every cell whose center falls inside it."""
    field_vals = np.zeros(mesh.n_cells)
    centers = mesh.cell_centers()
    for x0, y0, side, amplitude in inclusions:
        if not (0 <= x0 <= x0 + side <= 1 and 0 <= y0 <= y0 + side <= 1):
            raise ValueError("inclusion square must lie inside the unit square")
        inside = (
            (centers[:, 0] >= x0)
            & (centers[:, 0] <= x0 + side)
            & (centers[:, 1] >= y0)
            & (centers[:, 1] <= y0 + side)
        )
        field_vals[inside] += amplitude
    return field_vals


@dataclass
class EitSystem:
    """Assembled linearized system with ground truth and noisy data."""

    mesh: Mesh2D
    sigma_star: float
    noise_sd: float
    seed: int
    quadrature: str
    source_nodes: np.ndarray
    op: KhatriRaoOperator
    sigma_true: np.ndarray
    data: np.ndarray
    _baselines: dict = field(default_factory=dict, repr=False)

    @property
    def n_sources(self) -> int:
        return self.source_nodes.size

    @property
    def n_cells(self) -> int:
        return self.mesh.n_cells

    def baseline(self, rcond: float = DEFAULT_RCOND) -> tuple[np.ndarray, float]:
        """Full least-squares reconstruction and its squared residual,
        cached per rcond.  The dense system is small: n_sources^2 rows by
        nx^2 columns."""
        if rcond not in self._baselines:
            sol = solve_ls(kr_materialize(self.op), self.data, rcond)
            f_star = residual_sq_full(self.op, sol.x, self.data)
            self._baselines[rcond] = (sol.x, f_star)
        return self._baselines[rcond]


def select_sources(mesh: Mesh2D, count: int | None) -> np.ndarray:
    """All boundary nodes, or ``count`` of them evenly spaced along the
    counterclockwise boundary walk."""
    total = mesh.boundary_nodes.size
    if count is None or count == total:
        return mesh.boundary_nodes.copy()
    if not 1 <= count <= total:
        raise ValueError(f"source count must lie in [1, {total}]")
    picks = (np.arange(count) * total) // count
    return mesh.boundary_nodes[picks]


def make_eit_problem(
    nx: int = DEFAULT_NX,
    sigma_star: float = DEFAULT_SIGMA_STAR,
    noise_sd: float = DEFAULT_NOISE_SD,
    seed: int = 0,
    quadrature: str = "one_point",
    inclusions=DEFAULT_INCLUSIONS,
    source_count: int | None = None,
    delta_scale: float = 1.0,
) -> EitSystem:
    """Build the mesh, solve the source bank, assemble the sensitivity
    operator, and draw noisy data for the default inclusion field."""
    if noise_sd < 0:
        raise ValueError("noise_sd must be nonnegative")
    mesh = build_mesh(nx)
    sources = select_sources(mesh, source_count)
    bank = forward_bank(mesh, sigma_star, sources, delta_scale)
    op = assemble_system(mesh, bank, quadrature)
    sigma_true = inclusion_field(mesh, inclusions)
    data = kr_apply(op, sigma_true)
    if noise_sd > 0:
        data = data + noise_sd * np.random.default_rng(seed).standard_normal(data.size)
    return EitSystem(
        mesh=mesh,
        sigma_star=sigma_star,
        noise_sd=noise_sd,
        seed=seed,
        quadrature=quadrature,
        source_nodes=sources,
        op=op,
        sigma_true=sigma_true,
        data=data,
    )


def reconstruct(
    system: EitSystem,
    strategy: str,
    trial_seed: int,
    trial: int,
    r: int | None = None,
    r1: int | None = None,
    r2: int | None = None,
    rcond: float = DEFAULT_RCOND,
    sketch=None,
) -> tuple[np.ndarray, SweepRecord]:
    """Sketch the system, solve, and score one reconstruction."""
    _, f_star = system.baseline(rcond)
    n_src = system.n_sources
    start = time.perf_counter()
    if sketch is None:
        sketch = make_sketch(strategy, n_src, n_src, seed=trial_seed, r=r, r1=r1, r2=r2)
    if sketch.rows < system.n_cells:
        raise ValueError(f"sketch rows {sketch.rows} < unknowns {system.n_cells}")
    sketched = sketch_system(sketch, system.op, system.data)
    sol = solve_ls(sketched.sa, sketched.sb, rcond)
    wall_ms = (time.perf_counter() - start) * 1e3
    f_sketched = residual_sq_full(system.op, sol.x, system.data)
    record = SweepRecord(
        strategy=strategy,
        r=sketch.rows,
        r1=getattr(sketch, "r1", None),
        r2=getattr(sketch, "r2", None),
        n1=n_src,
        n2=n_src,
        p=system.n_cells,
        trial=trial,
        rel_error=relative_error(f_sketched, f_star),
        wall_time_ms=wall_ms,
        nx=system.mesh.nx,
        sigma_star=system.sigma_star,
        noise_sd=system.noise_sd,
    )
    return sol.x, record


def sweep_eit(
    system: EitSystem,
    r_grid=EIT_R_GRID_DEFAULT,
    config: SweepConfig = SweepConfig(),
) -> list[SweepRecord]:
    """Reconstruction error across sketch sizes; same trial-seed layout as
    the synthetic sweeps (trial t uses seed master_seed + t)."""
    from .synthbench import _run_tasks

    system.baseline(config.rcond)
    tasks = []
    for s_idx, strategy in enumerate(config.strategies):
        for g_idx, r in enumerate(r_grid):
            for trial in range(1, config.trials + 1):

                def fn(strategy=strategy, r=r, trial=trial):
                    return reconstruct(
                        system,
                        strategy,
                        trial_seed=config.master_seed + trial,
                        trial=trial,
                        r=r,
                        rcond=config.rcond,
                    )[1]

                tasks.append(((s_idx, g_idx, trial), fn))
    return _run_tasks(tasks, config.jobs)


def median_trial_reconstruction(
    system: EitSystem,
    strategy: str,
    r: int,
    config: SweepConfig = SweepConfig(),
) -> np.ndarray:
    """Reconstruction for the median-error trial at one grid point: trials
    are rerun with the sweep's seeds, ranked by (rel_error, trial), and the
    middle one is returned.  Deterministic given the config."""
    scored = []
    for trial in range(1, config.trials + 1):
        sigma_hat, rec = reconstruct(
            system, strategy, config.master_seed + trial, trial, r=r, rcond=config.rcond
        )
        scored.append((rec.rel_error, trial, sigma_hat))
    scored.sort(key=lambda item: (item[0], item[1]))
    return scored[(len(scored) - 1) // 2][2]
