"""Explicit leapfrog integration of the semi-discrete system.

Interior update (second-order in time):

    u^(n+1) = 2 u^(n) - u^(n-1) + tau^2 (f^(n) - L u^(n)),   on K,

with the Taylor starting step u^(1) = phi + tau psi + (tau^2/2)(-L phi + f^(0)).
Ghost values for level n are pulled from the boundary provider before the
level-(n+1) update; the state records the inner-layer history the boundary
convolution needs.  The scheme is stable for tau <= 2/sqrt(S) with
S = 2((2L+1)^d - 1)|a|_inf.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, InstabilityError
from .grid import GridSpec
from .stencil import Stencil, apply_c_form

SUPPORT_RTOL = 1e-12


@dataclass(frozen=True)
class TimeGrid:
    """Uniform time partition tau * n for n = 0..n_steps."""

    tau: float
    n_steps: int

    def __post_init__(self):
        if self.tau <= 0 or self.n_steps < 1:
            raise ConfigurationError("need tau > 0 and at least one step")

    @property
    def T(self) -> float:
        return self.tau * self.n_steps

    @classmethod
    def from_final_time(cls, tau: float, T: float) -> "TimeGrid":
        n = int(round(T / tau))
        if abs(n * tau - T) > 1e-9 * max(T, 1.0):
            raise ConfigurationError(f"final time {T} is not a multiple of tau {tau}")
        return cls(tau=tau, n_steps=n)

    def times(self) -> np.ndarray:
        return self.tau * np.arange(self.n_steps + 1)


class WaveState:
    """Two time levels plus the inner-boundary-layer history.

    ``u_curr``/``u_prev`` are padded arrays (interior plus ghost shell);
    ``history[j]`` is level j restricted to the inner layer, for all
    j = 0..n.
    """

    def __init__(self, grid: GridSpec, tau: float, u0: np.ndarray, u1: np.ndarray,
                 n_steps: int):
        self.grid = grid
        self.tau = tau
        self.n = 1
        self.u_prev = u0
        self.u_curr = u1
        self.history = np.zeros((n_steps + 1, grid.n_inner))
        self.history[0] = u0.ravel()[grid.inner_flat]
        self.history[1] = u1.ravel()[grid.inner_flat]

    def history_view(self) -> np.ndarray:
        return self.history[: self.n + 1]

    def ghost_values(self) -> np.ndarray:
        return self.u_curr.ravel()[self.grid.ghost_flat]


class ZeroBC:
    """Zero-Dirichlet exterior: ghost values identically zero."""

    kind = "ghost"

    def ghost_values(self, state: WaveState) -> np.ndarray:
        return np.zeros(state.grid.n_ghost)


def validate_support(grid: GridSpec, arr: np.ndarray, name: str, mode: str = "strict"):
    """Data must vanish on the boundary layers (compact support in K^-)."""
    scale = float(np.max(np.abs(arr)))
    if scale == 0.0:
        return
    layer = grid.inner_layer_mask | grid.ghost_mask
    leak = float(np.max(np.abs(arr[layer])))
    if leak > SUPPORT_RTOL * scale:
        msg = (
            f"{name} leaks into the boundary layers (max {leak:.3e} vs scale {scale:.3e}); "
            "the absorbing-boundary derivation assumes zero exterior data"
        )
        if mode == "strict":
            raise ConfigurationError(msg)
        warnings.warn(msg, stacklevel=2)


def initial_steps(
    phi,
    psi,
    f0,
    st: Stencil,
    grid: GridSpec,
    tau: float,
    n_steps: int,
    support_mode: str = "strict",
) -> WaveState:
    """Build the state at level 1 from the Taylor starting step."""
    phi = grid.sample(phi)
    psi = grid.sample(psi)
    f0 = grid.sample(f0)
    for name, arr in (("phi", phi), ("psi", psi), ("f(.,0)", f0)):
        validate_support(grid, arr, name, support_mode)

    interior = grid.interior_slices
    u0 = np.zeros(grid.padded_shape)
    u0[interior] = phi[interior]
    lphi = apply_c_form(st, u0)
    u1 = np.zeros(grid.padded_shape)
    u1[interior] = (
        phi[interior]
        + tau * psi[interior]
        + 0.5 * tau**2 * (-lphi + f0[interior])
    )
    return WaveState(grid, tau, u0, u1, n_steps)


def step(state: WaveState, st: Stencil, f_n, bc) -> WaveState:
    """Advance one leapfrog step using the boundary provider for level n."""
    grid = state.grid
    tau = state.tau
    u = state.u_curr
    interior = grid.interior_slices

    ghosts = bc.ghost_values(state)
    u.ravel()[grid.ghost_flat] = ghosts

    if getattr(bc, "kind", "ghost") == "neumann":
        v = bc.neumann_values(state, ghosts)
        uz = u.copy()
        uz.ravel()[grid.ghost_flat] = 0.0
        lu = apply_c_form(st, uz)
        neu = bc.neumann_op
        lu.ravel()[neu.inner_pos_interior] -= (
            u.ravel()[grid.inner_flat] * neu.ghost_weight + v / grid.h**grid.d
        )
    else:
        lu = apply_c_form(st, u)

    rhs = -lu if f_n is None else np.asarray(f_n) - lu
    u_new_int = 2.0 * u[interior] - state.u_prev[interior] + tau**2 * rhs
    if not np.all(np.isfinite(u_new_int)):
        raise InstabilityError(
            f"non-finite field detected at step {state.n + 1}", step=state.n + 1
        )

    u_new = np.zeros(grid.padded_shape)
    u_new[interior] = u_new_int
    state.u_prev = u
    state.u_curr = u_new
    state.n += 1
    state.history[state.n] = u_new.ravel()[grid.inner_flat]
    return state


def cfl_bound(st: Stencil) -> float:
    """Largest provably stable time step, 2/sqrt(S); +inf for a zero kernel."""
    if st.cfl_const == 0.0:
        return float("inf")
    return 2.0 / np.sqrt(st.cfl_const)
