"""Time-domain boundary machinery: Neumann operator, kernel table, providers.

The discrete nonlocal Neumann data on the inner boundary layer is

    (N u)_k = -h^d * sum_{m in ghost layer} a_{k-m} (u_k - u_m),

the boundary term of the discrete nonlocal Green's first identity

    (L u, v)_h = <u, v>_h - (N u, v)_{inner layer}.

Boundary-kernel tables hold the inverse z-transform of the z-domain
ghost-from-inner map at every step j = 0..N; ghost values at step n are the
discrete time convolution of the table against the full inner-layer history
(direct evaluation, cost O(n) per step).  The DtN form is evaluated on top
of DtD ghost filling, which keeps the two formulations algebraically
identical.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dtd1d import assemble_toeplitz, kcaret_batch
from .dtd2d import dtd_map_2d, greens_function
from .errors import ConfigurationError, TableExhaustedError
from .grid import GridSpec
from .stencil import Stencil
from .ztransform import (
    ContourSpec,
    contour_for_steps,
    inverse_ztransform_conjugate_half,
    s_of_z,
)


class NeumannOp:
    """Precomputed gather structure for the Neumann operator on one grid."""

    def __init__(self, st: Stencil, grid: GridSpec):
        if st.d != grid.d or st.L != grid.L:
            raise ConfigurationError("stencil and grid are incompatible")
        self.st = st
        self.grid = grid
        self.h = grid.h
        offsets = st.offsets()
        keep = np.any(offsets != 0, axis=1)
        offsets = offsets[keep]
        a_off = np.array([st.a_at(m) for m in offsets])
        strides = grid.strides_elems()
        npos = grid.inner_flat[None, :] + (offsets @ strides)[:, None]
        ghost_flat_mask = grid.ghost_mask.ravel()
        mask = ghost_flat_mask[npos]
        self.npos = npos
        self.aw = a_off[:, None] * mask
        self.ghost_weight = self.aw.sum(axis=0)
        # positions of the inner layer within the interior box (canonical order)
        self.inner_pos_interior = np.flatnonzero(
            grid.inner_layer_mask[grid.interior_slices].ravel()
        )

    def apply(self, u_padded: np.ndarray) -> np.ndarray:
        """Neumann data on the inner layer; u must carry ghost values."""
        uf = u_padded.ravel()
        u_in = uf[self.grid.inner_flat]
        pulled = np.einsum("oi,oi->i", self.aw, uf[self.npos])
        return -self.h**self.grid.d * (u_in * self.ghost_weight - pulled)


_NEUMANN_CACHE: dict[tuple, NeumannOp] = {}


def neumann_structure(st: Stencil, grid: GridSpec) -> NeumannOp:
    key = (st.content_hash(), grid.h, grid.beta, grid.delta, grid.d)
    op = _NEUMANN_CACHE.get(key)
    if op is None:
        op = NeumannOp(st, grid)
        _NEUMANN_CACHE[key] = op
    return op


def neumann_operator(st: Stencil, grid: GridSpec, u_padded: np.ndarray) -> np.ndarray:
    """(N u) on the inner layer, canonical enumeration."""
    return neumann_structure(st, grid).apply(u_padded)


@dataclass(frozen=True)
class BoundaryKernelTable:
    """Ghost-from-inner convolution coefficients for steps 0..n_steps."""

    blocks: np.ndarray = field(repr=False)  # (N+1, n_ghost, n_inner)
    tau: float
    rho: float
    P: int
    n_steps: int
    M: int
    L: int
    d: int
    stencil_hash: str
    iterations_max: int = 0

    @property
    def size_bytes(self) -> int:
        return self.blocks.nbytes

    def block(self, j: int) -> np.ndarray:
        if not 0 <= j <= self.n_steps:
            raise TableExhaustedError(f"no block for step {j} (table holds 0..{self.n_steps})")
        return self.blocks[j]


def sample_dtd_maps(
    grid: GridSpec,
    st: Stencil,
    contour: ContourSpec,
    tau: float,
    progress=None,
):
    """K_hat at the contour nodes p = 0..P/2 (FFT layout).

    The remaining nodes follow by conjugate symmetry and are never stored.
    Returns (samples (P/2+1, n_ghost, n_inner) complex, iterations_max).
    """
    half = contour.P // 2
    zs = contour.nodes_fft
    s_half = np.array([s_of_z(z, tau) for z in zs[: half + 1]])
    if grid.d == 1:
        L = grid.L
        tp = assemble_toeplitz(st)
        kr, iters, _ = kcaret_batch(tp, s_half)
        J = np.eye(L)[::-1]
        blocks_half = np.zeros((half + 1, 2 * L, 2 * L), dtype=complex)
        blocks_half[:, L:, L:] = kr
        blocks_half[:, :L, :L] = np.einsum("ij,njk,kl->nil", J, kr, J)
        iterations_max = int(iters.max())
    else:
        symbol_cache: dict = {}
        max_offset = 2 * (grid.M + grid.L)
        blocks_half = np.empty((half + 1, grid.n_ghost, grid.n_inner), dtype=complex)
        for i, s in enumerate(s_half):
            G = greens_function(st, complex(s), max_offset, symbol_cache=symbol_cache)
            blocks_half[i] = dtd_map_2d(G, grid).matrix
            if progress is not None:
                progress(i + 1, half + 1)
        iterations_max = 0
    return blocks_half, iterations_max


def build_boundary_table(
    grid: GridSpec,
    st: Stencil,
    contour: ContourSpec,
    n_steps: int,
    tau: float,
    progress=None,
) -> BoundaryKernelTable:
    """Sample the z-domain map on the contour and inverse-transform all steps."""
    contour.require_resolves(n_steps)
    samples_half, iterations_max = sample_dtd_maps(grid, st, contour, tau, progress=progress)
    blocks = inverse_ztransform_conjugate_half(samples_half, n_steps, contour)
    return BoundaryKernelTable(
        blocks=np.ascontiguousarray(blocks),
        tau=tau,
        rho=contour.rho,
        P=contour.P,
        n_steps=n_steps,
        M=grid.M,
        L=grid.L,
        d=grid.d,
        stencil_hash=st.content_hash(),
        iterations_max=iterations_max,
    )


def doubling_check(grid, st, contour, n_steps, tau, theta=None):
    """Self-convergence report: max |change in K~| when P doubles (rho^P fixed)."""
    theta = theta if theta is not None else contour.rho**contour.P
    bigger = contour_for_steps(n_steps, theta=theta, P=2 * contour.P)
    t1 = build_boundary_table(grid, st, contour, n_steps, tau)
    t2 = build_boundary_table(grid, st, bigger, n_steps, tau)
    return float(np.max(np.abs(t1.blocks - t2.blocks))), t1, t2


def apply_dtd_bc(table: BoundaryKernelTable, history: np.ndarray, n: int) -> np.ndarray:
    """Ghost values at step n: sum_{j=0..n} K~^(n-j) history[j]."""
    if n > table.n_steps:
        raise TableExhaustedError(
            f"step {n} beyond the table horizon {table.n_steps}"
        )
    hist = history[: n + 1]
    rev = table.blocks[: n + 1][::-1]
    return np.einsum("tgi,ti->g", rev, hist)


def apply_dtn_bc(
    st: Stencil,
    grid: GridSpec,
    table: BoundaryKernelTable,
    history: np.ndarray,
    u_padded: np.ndarray,
    n: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Neumann data at step n via DtD ghost filling; returns (V, ghosts)."""
    ghosts = apply_dtd_bc(table, history, n)
    u = u_padded.copy()
    u.ravel()[grid.ghost_flat] = ghosts
    return neumann_structure(st, grid).apply(u), ghosts
