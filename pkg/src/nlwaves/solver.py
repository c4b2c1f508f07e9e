"""Full runs: the bounded scheme with absorbing boundaries, the free-space
oracle, and the perturbation harness behind the stability estimate.

``solve`` wires the pieces together: stencil, boundary-kernel table (for the
dtn/dtd modes), Taylor start, leapfrog loop with per-step energy recording.
``solve_free_space`` runs the zero-Dirichlet scheme on a lattice padded so no
signal reaches the far boundary before final time; by finite propagation of
the explicit stencil (at most L cells per step) the restriction to the
original box is the exact free-space discrete solution up to roundoff.
"""

from __future__ import annotations

import hashlib
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import diagnostics
from .dtn import BoundaryKernelTable, apply_dtd_bc, build_boundary_table, neumann_structure
from .errors import ConfigurationError, OracleInvalidError
from .grid import GridSpec
from .kernels import KernelSpec
from .stencil import Stencil, apply_c_form, build_stencil
from .timestepper import TimeGrid, WaveState, ZeroBC, cfl_bound, initial_steps, step
from .ztransform import ContourSpec, contour_for_steps

BC_MODES = ("dtn", "dtd", "zero-dirichlet")


@dataclass(frozen=True)
class ContourParams:
    theta: float = 1e8
    P: int | None = None
    min_P: int = 64

    def build(self, n_steps: int) -> ContourSpec:
        return contour_for_steps(n_steps, theta=self.theta, P=self.P, min_P=self.min_P)


@dataclass
class WaveProblem:
    kernel: KernelSpec
    grid: GridSpec
    time: TimeGrid
    phi: object = None
    psi: object = None
    f: object = None  # callable f(x..., t) or None
    bc_mode: str = "dtn"
    p: int = 1
    quad_tol: float = 1e-12
    contour: ContourParams = field(default_factory=ContourParams)
    support_mode: str = "strict"
    snapshot_times: tuple = ()

    def __post_init__(self):
        if self.bc_mode not in BC_MODES:
            raise ConfigurationError(f"bc mode must be one of {BC_MODES}")


class DtDBoundary:
    """Ghost filling by time convolution of the boundary-kernel table."""

    kind = "ghost"

    def __init__(self, table: BoundaryKernelTable):
        self.table = table

    def ghost_values(self, state: WaveState) -> np.ndarray:
        return apply_dtd_bc(self.table, state.history_view(), state.n)


class DtNBoundary:
    """Neumann data computed on top of DtD ghost filling (exact identity)."""

    kind = "neumann"

    def __init__(self, table: BoundaryKernelTable, st: Stencil, grid: GridSpec):
        self.table = table
        self.neumann_op = neumann_structure(st, grid)

    def ghost_values(self, state: WaveState) -> np.ndarray:
        return apply_dtd_bc(self.table, state.history_view(), state.n)

    def neumann_values(self, state: WaveState, ghosts: np.ndarray) -> np.ndarray:
        # step() has already scattered the ghost values into u_curr
        return self.neumann_op.apply(state.u_curr)


@dataclass
class Trajectory:
    grid: GridSpec
    time: TimeGrid
    snapshots: dict
    history: np.ndarray
    energy: list
    interior: np.ndarray | None
    manifest: dict

    def final(self) -> np.ndarray:
        if self.interior is not None:
            return self.interior[-1]
        return self.snapshots[max(self.snapshots)]


def _snapshot_steps(problem: WaveProblem) -> dict[int, float]:
    out = {}
    for t in problem.snapshot_times:
        n = int(round(t / problem.time.tau))
        if abs(n * problem.time.tau - t) > 1e-9 * max(1.0, abs(t)):
            raise ConfigurationError(f"snapshot time {t} is not a multiple of tau")
        if not 0 <= n <= problem.time.n_steps:
            raise ConfigurationError(f"snapshot time {t} outside the run horizon")
        out[n] = t
    return out


def _f_at(problem: WaveProblem, grid: GridSpec, t: float):
    if problem.f is None:
        return None
    interior = grid.interior_slices
    if grid.d == 1:
        x = grid.coordinates()[interior[0]]
        return np.asarray(problem.f(x, t), dtype=float)
    x1, x2 = grid.coordinates()
    return np.asarray(problem.f(x1[interior], x2[interior], t), dtype=float)


def check_cfl(problem: WaveProblem, st: Stencil, strict: bool):
    bound = cfl_bound(st)
    if problem.time.tau > bound:
        msg = (
            f"tau = {problem.time.tau:g} exceeds the stability bound 2/sqrt(S) = {bound:g}"
        )
        if strict:
            raise ConfigurationError(msg)
        warnings.warn(msg, stacklevel=2)


def prepare_table(problem: WaveProblem, st: Stencil, progress=None) -> BoundaryKernelTable:
    contour = problem.contour.build(problem.time.n_steps)
    return build_boundary_table(
        problem.grid, st, contour, problem.time.n_steps, problem.time.tau, progress=progress
    )


def solve(
    problem: WaveProblem,
    *,
    stencil: Stencil | None = None,
    table: BoundaryKernelTable | None = None,
    strict_cfl: bool = False,
    record_interior: bool = False,
    record_energy: bool = True,
    progress=None,
) -> Trajectory:
    """Run the bounded-domain scheme with the configured boundary provider."""
    grid, time = problem.grid, problem.time
    st = stencil if stencil is not None else build_stencil(
        problem.kernel, grid, problem.p, problem.quad_tol
    )
    check_cfl(problem, st, strict_cfl)

    if problem.bc_mode == "zero-dirichlet":
        bc = ZeroBC()
    else:
        if table is None:
            table = prepare_table(problem, st, progress=progress)
        if table.n_steps < time.n_steps:
            raise ConfigurationError("boundary table shorter than the run")
        bc = DtDBoundary(table) if problem.bc_mode == "dtd" else DtNBoundary(table, st, grid)

    state = initial_steps(
        problem.phi, problem.psi,
        None if problem.f is None else (lambda *a: problem.f(*a, 0.0)),
        st, grid, time.tau, time.n_steps, support_mode=problem.support_mode,
    )

    interior = grid.interior_slices
    snap_steps = _snapshot_steps(problem)
    snapshots = {}
    record = None
    if record_interior:
        record = np.zeros((time.n_steps + 1,) + state.u_curr[interior].shape)
        record[0] = state.u_prev[interior]
        record[1] = state.u_curr[interior]
    for lvl, arr in ((0, state.u_prev), (1, state.u_curr)):
        if lvl in snap_steps:
            snapshots[snap_steps[lvl]] = arr[interior].copy()

    energies = []
    if record_energy:
        energies.append(
            diagnostics.energy(st, state.u_curr[interior], state.u_prev[interior], time.tau, n=1)
        )

    max_abs = max(
        float(np.max(np.abs(state.u_prev[interior]))),
        float(np.max(np.abs(state.u_curr[interior]))),
    )
    for n in range(1, time.n_steps):
        f_n = _f_at(problem, grid, n * time.tau)
        step(state, st, f_n, bc)
        max_abs = max(max_abs, float(np.max(np.abs(state.u_curr[interior]))))
        if record is not None:
            record[state.n] = state.u_curr[interior]
        if state.n in snap_steps:
            snapshots[snap_steps[state.n]] = state.u_curr[interior].copy()
        if record_energy:
            energies.append(
                diagnostics.energy(
                    st, state.u_curr[interior], state.u_prev[interior], time.tau, n=state.n
                )
            )

    manifest = {
        "kernel": problem.kernel.cache_key(),
        "grid": {"h": grid.h, "delta": grid.delta, "beta": grid.beta, "d": grid.d},
        "time": {"tau": time.tau, "n_steps": time.n_steps},
        "p": problem.p,
        "quad_tol": problem.quad_tol,
        "bc_mode": problem.bc_mode,
        "stencil_hash": st.content_hash(),
        "contour": None if table is None else {"rho": table.rho, "P": table.P},
        "table_hash": None if table is None else hashlib.sha256(table.blocks.tobytes()).hexdigest(),
        "cfl_bound": cfl_bound(st),
        "max_abs": max_abs,
    }
    return Trajectory(
        grid=grid,
        time=time,
        snapshots=snapshots,
        history=state.history,
        energy=energies,
        interior=record,
        manifest=manifest,
    )


def solve_free_space(
    problem: WaveProblem,
    padding_cells: int | None = None,
    *,
    stencil: Stencil | None = None,
    record_interior: bool = True,
    record_energy: bool = False,
) -> Trajectory:
    """Zero-Dirichlet run on an enlarged lattice, restricted to the original box.

    Default padding is n_steps * L cells (the stencil propagates at most L
    cells per step, so the restriction is exact); smaller paddings are
    accepted but validated per step, failing with an oracle-invalid error
    if any signal reaches the last L cells before final time.
    """
    grid, time = problem.grid, problem.time
    if padding_cells is None:
        padding_cells = time.n_steps * grid.L
    big = grid.with_padding(padding_cells)
    big_problem = WaveProblem(
        kernel=problem.kernel,
        grid=big,
        time=time,
        phi=problem.phi,
        psi=problem.psi,
        f=problem.f,
        bc_mode="zero-dirichlet",
        p=problem.p,
        quad_tol=problem.quad_tol,
        support_mode=problem.support_mode,
        snapshot_times=problem.snapshot_times,
    )
    st = stencil if stencil is not None else build_stencil(
        problem.kernel, big, problem.p, problem.quad_tol
    )
    traj = solve(
        big_problem,
        stencil=st,
        record_interior=record_interior,
        record_energy=record_energy,
    )

    # forbid signal in the far layer: the padded grid's inner layer history
    edge = float(np.max(np.abs(traj.history)))
    scale = max(float(traj.manifest["max_abs"]), 1e-300)
    if edge > 1e-13 * scale:
        raise OracleInvalidError(
            f"free-space padding insufficient: boundary-layer magnitude {edge:.3e} "
            f"(relative {edge / scale:.3e}) before final time"
        )

    pad = big.M - grid.M
    cut = (slice(pad, pad + 2 * grid.M - 1),) * grid.d
    snapshots = {t: u[cut].copy() for t, u in traj.snapshots.items()}
    interior = None
    if traj.interior is not None:
        interior = traj.interior[(slice(None),) + cut].copy()
    traj.manifest["free_space_padding_cells"] = padding_cells
    return Trajectory(
        grid=grid,
        time=time,
        snapshots=snapshots,
        history=traj.history,
        energy=traj.energy,
        interior=interior,
        manifest=traj.manifest,
    )


@dataclass
class StabilityProbeResult:
    energies: list
    max_energy: float
    bound_trace: np.ndarray
    ratio: float


def stability_probe(
    problem: WaveProblem,
    g=None,
    g_b=None,
    *,
    stencil: Stencil | None = None,
    table: BoundaryKernelTable | None = None,
) -> StabilityProbeResult:
    """Run the perturbed scheme and compare max energy against the bound shape.

    ``g(x..., t)`` perturbs the interior equation; ``g_b(t)`` returns values
    on the inner layer (canonical enumeration) perturbing the Neumann
    relation.  The reported ratio is

        max_l ||phi^(l)||_E^2 / [ ||D_tau^F mu^(0)||_h^2
            + tau * sum_n (||g^(n)||_h^2 + h^-d ||g_b^(n)||^2) ],

    with the constant left to the caller: the testable property is that the
    ratio stays bounded across time-step refinement.
    """
    grid, time = problem.grid, problem.time
    st = stencil if stencil is not None else build_stencil(
        problem.kernel, grid, problem.p, problem.quad_tol
    )
    check_cfl(problem, st, strict=True)
    if table is None:
        table = prepare_table(problem, st)
    bc = DtNBoundary(table, st, grid)

    state = initial_steps(
        problem.phi, problem.psi, None, st, grid, time.tau, time.n_steps,
        support_mode=problem.support_mode,
    )
    interior = grid.interior_slices
    h, d = grid.h, grid.d

    # bound denominator: initial-velocity term plus the perturbation sum
    mu_term = diagnostics.l2_norm_sq(
        (state.u_curr[interior] - state.u_prev[interior]) / time.tau, h, d
    )
    energies = [
        diagnostics.energy(st, state.u_curr[interior], state.u_prev[interior], time.tau, n=1)
    ]
    bound_trace = [mu_term]
    accum = mu_term
    neu = bc.neumann_op

    for n in range(1, time.n_steps):
        t_n = n * time.tau
        g_n = None
        if g is not None:
            if d == 1:
                g_n = np.asarray(g(grid.coordinates()[interior[0]], t_n), dtype=float)
            else:
                x1, x2 = grid.coordinates()
                g_n = np.asarray(g(x1[interior], x2[interior], t_n), dtype=float)
        gb_n = None if g_b is None else np.asarray(g_b(t_n), dtype=float)

        ghosts = bc.ghost_values(state)
        state.u_curr.ravel()[grid.ghost_flat] = ghosts
        v = neu.apply(state.u_curr)
        if gb_n is not None:
            v = v + gb_n
        uz = state.u_curr.copy()
        uz.ravel()[grid.ghost_flat] = 0.0
        lu = apply_c_form(st, uz)
        lu.ravel()[neu.inner_pos_interior] -= (
            state.u_curr.ravel()[grid.inner_flat] * neu.ghost_weight + v / h**d
        )
        rhs = -lu if g_n is None else g_n - lu
        u_new = np.zeros(grid.padded_shape)
        u_new[interior] = (
            2.0 * state.u_curr[interior] - state.u_prev[interior] + time.tau**2 * rhs
        )
        state.u_prev = state.u_curr
        state.u_curr = u_new
        state.n += 1
        state.history[state.n] = u_new.ravel()[grid.inner_flat]

        accum += time.tau * (
            (0.0 if g_n is None else diagnostics.l2_norm_sq(g_n, h, d))
            + (0.0 if gb_n is None else h ** (-d) * float(np.sum(gb_n**2)))
        )
        bound_trace.append(accum)
        energies.append(
            diagnostics.energy(
                st, state.u_curr[interior], state.u_prev[interior], time.tau, n=state.n
            )
        )

    max_e = max(e.total for e in energies)
    denom = bound_trace[-1]
    ratio = max_e / denom if denom > 0 else float("inf") if max_e > 0 else 0.0
    return StabilityProbeResult(
        energies=energies,
        max_energy=max_e,
        bound_trace=np.asarray(bound_trace),
        ratio=ratio,
    )
