"""z-domain Dirichlet-to-Dirichlet maps for the 1d exterior lattice problem.

Grouping the exterior unknowns into blocks of L consecutive values turns the
z-transformed exterior equation into a block three-term recursion

    s U_q + A U_{q-1} + B U_q + A^T U_{q+1} = 0,   U_q -> 0,

with A the upper-triangular Toeplitz of (c_L .. c_1) and B the symmetric
Toeplitz of (c_0 .. c_{L-1}).  The one-block transfer map K_hat with
U_{q+1} = K_hat U_q is the decaying solution of

    A + (sI + B) K_hat + A^T K_hat^2 = 0.

For L = 1 it is the closed-form root of a quadratic; for L >= 2 it is
evaluated by a doubling iteration: starting from A_0 = -(sI+B)^{-1} A and
B_0 = -(sI+B)^{-1} A^T, each sweep eliminates every other block,

    (A_m  B_m) = (0 I 0) W^{-1} [[A_{m-1}, 0], [0, 0], [0, B_{m-1}]],
    W = [[I, -B_{m-1}, 0], [-A_{m-1}, I, -B_{m-1}], [0, -A_{m-1}, I]],

and the map is the nested sum A_0 + B_0[A_1 + B_1[A_2 + ...]], truncated
once the spectral norms of A_m and B_m drop below a tolerance (1e-14;
empirically at most 20 sweeps).  All contour nodes are processed as one
batched computation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, IterationFailureError, NearSpectrumError
from .stencil import Stencil


@dataclass(frozen=True)
class ToeplitzPair:
    """Coupling blocks of the 1d exterior recursion."""

    A: np.ndarray
    B: np.ndarray

    @property
    def L(self) -> int:
        return self.A.shape[0]


@dataclass(frozen=True)
class DtdMap1D:
    """Transfer maps at one frequency plus iteration metadata."""

    s: complex
    kr: np.ndarray  # inner-to-outer ordering on the right half-line
    kl: np.ndarray  # ascending-index ordering on the left half-line
    iterations: int
    final_norm: float  # spectral norm of the last (A_m, B_m) pair


def assemble_toeplitz(st: Stencil) -> ToeplitzPair:
    """Fill A and B from the stencil's c-table (1d only)."""
    if st.d != 1:
        raise ConfigurationError("Toeplitz blocks are defined for d = 1")
    L = st.L
    c = st.c  # index m + L
    A = np.zeros((L, L))
    B = np.zeros((L, L))
    for i in range(L):
        for j in range(L):
            if j >= i:
                A[i, j] = c[(L + i - j) + L]  # c_{L+i-j}
            B[i, j] = c[abs(i - j) + L]
    return ToeplitzPair(A=A, B=B)


def kcaret_scalar(s: complex, c0: float) -> complex:
    """Closed-form L = 1 transfer map (c_0 + s - sqrt(2 c_0 s + s^2)) / c_0.

    The branch is fixed post hoc: of the two roots of the transfer
    quadratic (their product is 1) the one with modulus < 1 is returned,
    matching decay of the exterior solution.
    """
    if c0 == 0:
        raise ConfigurationError("degenerate kernel: c_0 = 0")
    root = np.sqrt(complex(2.0 * c0 * s + s * s))
    k1 = (c0 + s - root) / c0
    k2 = (c0 + s + root) / c0
    return k1 if abs(k1) <= abs(k2) else k2


def _batched_spectral_norm(mats: np.ndarray) -> np.ndarray:
    return np.linalg.svd(mats, compute_uv=False)[..., 0]


def kcaret_iterative(
    tp: ToeplitzPair,
    s,
    eps_iter: float = 1e-14,
    max_iter: int = 20,
) -> DtdMap1D | list[DtdMap1D]:
    """Doubling-iteration transfer map at one frequency or a batch of them.

    Scalar ``s`` returns a single DtdMap1D; an array of frequencies returns
    a list (the iteration itself runs batched).
    """
    s_arr = np.atleast_1d(np.asarray(s, dtype=complex))
    maps = _kcaret_batch(tp, s_arr, eps_iter, max_iter)
    if np.ndim(s) == 0:
        return maps[0]
    return maps


def kcaret_batch(tp: ToeplitzPair, s_arr: np.ndarray, eps_iter: float = 1e-14,
                 max_iter: int = 20):
    """Batched transfer maps: returns (kr array (n, L, L), iterations, final_norms)."""
    return _kcaret_core(tp, np.asarray(s_arr, dtype=complex), eps_iter, max_iter)


def _kcaret_core(tp, s_arr, eps_iter, max_iter):
    L = tp.L
    n = s_arr.size
    eye = np.eye(L)
    sB = s_arr[:, None, None] * eye + tp.B[None, :, :]
    try:
        Am = -np.linalg.solve(sB, np.broadcast_to(tp.A, (n, L, L)))
        Bm = -np.linalg.solve(sB, np.broadcast_to(tp.A.T, (n, L, L)))
    except np.linalg.LinAlgError as exc:
        raise NearSpectrumError(f"sI + B singular on the contour: {exc}", s=s_arr) from exc

    A_levels = [Am]
    B_levels = [Bm]
    norms = np.maximum(_batched_spectral_norm(Am), _batched_spectral_norm(Bm))
    iterations = np.ones(n, dtype=int)
    converged = norms < eps_iter

    for m in range(1, max_iter + 1):
        if converged.all():
            break
        W = np.zeros((n, 3 * L, 3 * L), dtype=complex)
        W[:, :L, :L] = eye
        W[:, L : 2 * L, L : 2 * L] = eye
        W[:, 2 * L :, 2 * L :] = eye
        W[:, :L, L : 2 * L] = -B_levels[-1]
        W[:, L : 2 * L, :L] = -A_levels[-1]
        W[:, L : 2 * L, 2 * L :] = -B_levels[-1]
        W[:, 2 * L :, L : 2 * L] = -A_levels[-1]
        rhs = np.zeros((n, 3 * L, 2 * L), dtype=complex)
        rhs[:, :L, :L] = A_levels[-1]
        rhs[:, 2 * L :, L:] = B_levels[-1]
        try:
            sol = np.linalg.solve(W, rhs)
        except np.linalg.LinAlgError as exc:
            raise NearSpectrumError(f"singular doubling solve: {exc}", s=s_arr) from exc
        mid = sol[:, L : 2 * L, :]
        Am, Bm = mid[:, :, :L], mid[:, :, L:]
        A_levels.append(Am)
        B_levels.append(Bm)
        norms = np.maximum(_batched_spectral_norm(Am), _batched_spectral_norm(Bm))
        newly = (~converged) & (norms < eps_iter)
        iterations[~converged] += 1
        converged |= newly

    if not converged.all():
        bad = np.flatnonzero(~converged)
        raise IterationFailureError(
            f"doubling iteration did not reach {eps_iter:g} within {max_iter} sweeps "
            f"at {bad.size} contour node(s)",
            norms=norms[bad],
        )

    # nested accumulation, innermost level outward
    kr = A_levels[-1].copy()
    for Aj, Bj in zip(A_levels[-2::-1], B_levels[-2::-1]):
        kr = Aj + Bj @ kr
    return kr, iterations, norms


def _kcaret_batch(tp, s_arr, eps_iter, max_iter):
    kr, iterations, norms = _kcaret_core(tp, s_arr, eps_iter, max_iter)
    J = np.eye(tp.L)[::-1]
    out = []
    for i in range(s_arr.size):
        out.append(
            DtdMap1D(
                s=complex(s_arr[i]),
                kr=kr[i],
                kl=J @ kr[i] @ J,
                iterations=int(iterations[i]),
                final_norm=float(norms[i]),
            )
        )
    return out


def transfer_residual(tp: ToeplitzPair, s: complex, k: np.ndarray) -> float:
    """Spectral norm of A + (sI + B) K + A^T K^2 (the fixed-point residual)."""
    L = tp.L
    res = tp.A + (s * np.eye(L) + tp.B) @ k + tp.A.T @ (k @ k)
    return float(np.linalg.norm(res, 2))
