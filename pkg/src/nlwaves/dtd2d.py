"""z-domain DtD map for the 2d exterior problem via lattice Green's functions.

The fundamental solution of the z-domain lattice equation,

    s G_k + sum_{|m| <= L} c_m G_{k+m} = delta_{k,0},    G -> 0 at infinity,

has the Fourier representation G_k = (2 pi)^-2 * integral over [0, 2 pi]^2 of
e^{i k.xi} / (s + sigma(xi)), with sigma the symbol of the c-table.  The
tensor-product periodic trapezoidal rule on an n x n grid evaluates all
offsets at once as one inverse FFT of the sampled reciprocal; n is doubled
until G_0 is stable.

Exterior solutions are represented by single-layer potentials supported on
the inner boundary layer: u_hat_k = sum_m G_{k+m} q_m.  Collocating on the
inner layer and evaluating on the ghost layer gives the DtD map

    K_hat[k, m] = sum_l G_{k+l} * (Gram^-1)[l, m],  Gram[l, m] = G_{l+m}.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import lu_factor, lu_solve, get_lapack_funcs

from .errors import ConfigurationError, IllPosedLayerError, NearSpectrumError
from .grid import GridSpec
from .stencil import Stencil


@dataclass(frozen=True)
class LatticeGreens:
    """Green's-function offset table at one frequency."""

    s: complex
    max_offset: int
    table: np.ndarray  # shape (2*max_offset+1,)*2, entry for offset k at k + max_offset
    n_quad: int

    def at(self, k) -> complex:
        k = np.asarray(k, dtype=int)
        if np.max(np.abs(k)) > self.max_offset:
            raise ConfigurationError(f"offset {tuple(k)} beyond table range {self.max_offset}")
        return complex(self.table[k[0] + self.max_offset, k[1] + self.max_offset])

    def gather(self, offsets: np.ndarray) -> np.ndarray:
        """Vectorized lookup for an (..., 2) array of offsets."""
        idx = offsets + self.max_offset
        return self.table[idx[..., 0], idx[..., 1]]


@dataclass(frozen=True)
class DtdMap2D:
    """Dense ghost-from-inner map at one frequency."""

    s: complex
    matrix: np.ndarray  # (n_ghost, n_inner)
    cond_estimate: float


def fourier_symbol(st: Stencil, xi) -> float:
    """Symbol sigma(xi) = sum_{|m| <= L} c_m e^{i m.xi}; real by symmetry."""
    if st.d != 2:
        raise ConfigurationError("fourier_symbol is the 2d symbol")
    xi = np.asarray(xi, dtype=float)
    m = np.arange(-st.L, st.L + 1)
    phase = np.exp(1j * np.outer(m, xi[0]).ravel())[:, None] * np.exp(
        1j * np.outer(m, xi[1]).ravel()
    )[None, :]
    val = complex(np.sum(st.c * phase))
    if abs(val.imag) > 1e-13 * (1.0 + float(np.sum(np.abs(st.c)))):
        raise ConfigurationError("symbol acquired an imaginary part; c-table asymmetric")
    return val.real


def _symbol_grid(st: Stencil, n: int, cache: dict) -> np.ndarray:
    """sigma on the n x n periodic grid xi_j = 2 pi j / n, via zero-padded FFT."""
    got = cache.get(n)
    if got is not None:
        return got
    L = st.L
    embed = np.zeros((n, n))
    idx = np.arange(-L, L + 1) % n
    embed[np.ix_(idx, idx)] += st.c  # offsets are distinct mod n for n > 2L
    grid = (n * n) * np.fft.ifft2(embed)
    sig = grid.real
    cache[n] = sig
    return sig


def greens_function(
    st: Stencil,
    s: complex,
    max_offset: int,
    n_quad: int = 0,
    symbol_cache: dict | None = None,
) -> LatticeGreens:
    """Offset table by periodic trapezoidal quadrature, n doubled to convergence."""
    if st.d != 2:
        raise ConfigurationError("greens_function needs a 2d stencil")
    if symbol_cache is None:
        symbol_cache = {}
    n = n_quad
    if n <= 0:
        n = 1
        while n < 4 * (max_offset + 1):
            n *= 2
    prev_g0 = None
    for _ in range(12):
        sig = _symbol_grid(st, n, symbol_cache)
        denom = s + sig
        dmin = float(np.min(np.abs(denom)))
        if dmin < 1e-12:
            raise NearSpectrumError(
                f"frequency s = {s} within 1e-12 of the symbol range", s=s
            )
        table_full = np.fft.ifft2(1.0 / denom)
        g0 = complex(table_full[0, 0])
        if prev_g0 is not None and abs(g0 - prev_g0) <= 1e-10 * abs(g0):
            break
        prev_g0 = g0
        n *= 2
    else:
        raise NearSpectrumError(
            f"Green's table did not stabilize (last G_0 change at n={n//2})", s=s
        )
    n //= 2  # the accepted resolution

    sig = _symbol_grid(st, n, symbol_cache)
    table_full = np.fft.ifft2(1.0 / (s + sig))
    k = np.arange(-max_offset, max_offset + 1) % n
    table = table_full[np.ix_(k, k)]
    return LatticeGreens(s=s, max_offset=max_offset, table=table, n_quad=n)


def greens_residual(st: Stencil, G: LatticeGreens, offsets: np.ndarray) -> float:
    """Max defining-equation residual |s G_k + sum c_m G_{k+m} - delta| over offsets."""
    worst = 0.0
    m = st.offsets()
    cvals = np.array([st.c_at(mm) for mm in m])
    for k in np.atleast_2d(offsets):
        if np.max(np.abs(k)) + st.L > G.max_offset:
            raise ConfigurationError(f"offset {tuple(k)} not interior-checkable")
        lhs = G.s * G.at(k) + np.sum(cvals * G.gather(k[None, :] + m))
        rhs = 1.0 if np.all(k == 0) else 0.0
        worst = max(worst, abs(lhs - rhs))
    return worst


def dtd_map_2d(G: LatticeGreens, grid: GridSpec) -> DtdMap2D:
    """Assemble the ghost-from-inner map from the Green's table.

    Layers are indexed by the grid's canonical (lexicographic) enumerations;
    the inner-layer Gram block is factorized with partial pivoting and its
    condition number estimated (ill-posed-layer error above 1e12).
    """
    if grid.d != 2:
        raise ConfigurationError("dtd_map_2d needs a 2d grid")
    inner = grid.inner_multi  # (n_in, 2)
    ghost = grid.ghost_multi  # (n_g, 2)
    need = 2 * (grid.M + grid.L)
    if G.max_offset < need - 2:
        raise ConfigurationError(
            f"Green's table range {G.max_offset} too small for this grid (need {need - 2})"
        )
    gram = G.gather(inner[:, None, :] + inner[None, :, :])
    rows = G.gather(ghost[:, None, :] + inner[None, :, :])

    lu, piv = lu_factor(gram)
    gecon = get_lapack_funcs(("gecon",), (gram,))[0]
    anorm = float(np.max(np.sum(np.abs(gram), axis=1)))
    rcond = gecon(lu, anorm, norm="1")[0]
    cond = 1.0 / max(float(np.real(rcond)), 1e-300)
    if cond > 1e12:
        raise IllPosedLayerError(
            f"inner-layer Gram block numerically singular (cond ~ {cond:.2e})", cond=cond
        )
    # K = rows @ gram^-1, via the transposed solve (gram is complex symmetric)
    k_matrix = lu_solve((lu, piv), rows.T, trans=1).T
    return DtdMap2D(s=G.s, matrix=k_matrix, cond_estimate=cond)
