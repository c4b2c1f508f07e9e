"""Contour machinery: z-domain frequency map and trapezoidal inverse transform.

Time sequences map to the z-domain through u_hat(z) = sum_n z^-n u^(n); the
leapfrog second difference becomes multiplication by s = (1/z - 2 + z)/tau^2.
Inverse transforms are contour integrals over the circle |z| = rho > 1,
approximated by the P-node trapezoidal rule

    K^(j) ~ (rho^j / P) * sum_{p=1..P} K_hat(rho e^{2 pi i p / P}) e^{2 pi i j p / P}.

The default radius follows rho^P = theta with theta = 1e8, balancing the
aliasing term (rho^-P) against roundoff amplification (rho^j, j <= P/2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AliasingError, ConfigurationError, DomainError

DEFAULT_THETA = 1e8


@dataclass(frozen=True)
class ContourSpec:
    """Radius and node count of the inverse-transform circle."""

    rho: float
    P: int

    def __post_init__(self):
        if not self.rho > 1.0:
            raise ConfigurationError("contour radius must satisfy rho > 1")
        if self.P < 2:
            raise ConfigurationError("contour needs at least 2 nodes")

    @property
    def nodes(self) -> np.ndarray:
        """z_p = rho e^{2 pi i p / P} for p = 1..P."""
        p = np.arange(1, self.P + 1)
        return self.rho * np.exp(2j * np.pi * p / self.P)

    @property
    def nodes_fft(self) -> np.ndarray:
        """Same node set in FFT layout (p = 0..P-1); index P-p conjugates index p."""
        p = np.arange(self.P)
        return self.rho * np.exp(2j * np.pi * p / self.P)

    def require_resolves(self, n_steps: int):
        if self.P < 2 * n_steps:
            raise ConfigurationError(
                f"contour P = {self.P} must be at least twice the step count {n_steps}"
            )


def contour_for_steps(n_steps: int, theta: float = DEFAULT_THETA, P: int | None = None,
                      min_P: int = 64) -> ContourSpec:
    """Contour with P a power of two >= max(2 n_steps, min_P) and rho^P = theta."""
    if P is None:
        P = 1
        while P < max(2 * n_steps, min_P):
            P *= 2
    spec = ContourSpec(rho=float(theta) ** (1.0 / P), P=int(P))
    spec.require_resolves(n_steps)
    return spec


def s_of_z(z: complex, tau: float) -> complex:
    """Frequency map s = (z^-1 - 2 + z) / tau^2."""
    if z == 0:
        raise DomainError("s(z) undefined at z = 0")
    return (1.0 / z - 2.0 + z) / tau**2


RESIDUE_RTOL = 1e-8


def _check_real(values: np.ndarray, context: str) -> np.ndarray:
    resid = np.abs(values.imag)
    bound = RESIDUE_RTOL * (1.0 + np.abs(values.real))
    worst = float(np.max(resid - bound))
    if worst > 0:
        raise AliasingError(
            f"imaginary residue above threshold in {context} "
            f"(max residue {np.max(resid):.3e}); increase P or adjust rho",
            residue=float(np.max(resid)),
        )
    return values.real


def inverse_ztransform(samples: np.ndarray, j: int, contour: ContourSpec):
    """Single-coefficient trapezoidal inverse transform.

    ``samples`` holds K_hat at the contour nodes in the order of
    ``contour.nodes`` (p = 1..P) along axis 0; scalar samples give a scalar
    coefficient, matrix samples a matrix.  The imaginary residue is checked
    against 1e-8 * (1 + |result|) and discarded.
    """
    samples = np.asarray(samples)
    P = contour.P
    if samples.shape[0] != P:
        raise ConfigurationError("need one sample per contour node")
    if not 0 <= j < P:
        raise ConfigurationError(f"step index {j} outside [0, P)")
    p = np.arange(1, P + 1)
    phase = np.exp(2j * np.pi * j * p / P)
    val = (contour.rho**j / P) * np.tensordot(phase, samples, axes=(0, 0))
    out = _check_real(np.atleast_1d(val), f"inverse transform at j={j}")
    return float(out[0]) if np.ndim(val) == 0 else out.reshape(np.shape(val))


def inverse_ztransform_all(samples_fft: np.ndarray, j_max: int, contour: ContourSpec) -> np.ndarray:
    """All coefficients j = 0..j_max at once via an FFT over the node axis.

    ``samples_fft`` is in FFT layout (``contour.nodes_fft`` order) along
    axis 0.  Returns a real array of shape (j_max+1, *samples.shape[1:]).
    """
    samples_fft = np.asarray(samples_fft)
    P = contour.P
    if samples_fft.shape[0] != P:
        raise ConfigurationError("need one sample per contour node")
    if not 0 <= j_max < P:
        raise ConfigurationError(f"j_max {j_max} outside [0, P)")
    coef = np.fft.ifft(samples_fft, axis=0)[: j_max + 1]
    scale = contour.rho ** np.arange(j_max + 1)
    coef = coef * scale.reshape((-1,) + (1,) * (coef.ndim - 1))
    return _check_real(coef, "inverse transform")


def inverse_ztransform_conjugate_half(
    samples_half: np.ndarray,
    j_max: int,
    contour: ContourSpec,
    chunk_bytes: int = 1 << 28,
) -> np.ndarray:
    """Inverse transform from the nodes p = 0..P/2 only (FFT layout).

    The remaining nodes are implied by conjugate symmetry (real time data),
    so the full sample array is never materialized; the FFT runs in slabs
    over the trailing axis to bound peak memory for large kernel tables.
    """
    samples_half = np.asarray(samples_half)
    P = contour.P
    if P % 2 != 0 or samples_half.shape[0] != P // 2 + 1:
        raise ConfigurationError("need samples at nodes p = 0..P/2 of an even contour")
    if not 0 <= j_max < P:
        raise ConfigurationError(f"j_max {j_max} outside [0, P)")
    scale = contour.rho ** np.arange(j_max + 1)

    def transform(chunk):
        full = np.empty((P,) + chunk.shape[1:], dtype=complex)
        full[: P // 2 + 1] = chunk
        full[P // 2 + 1 :] = np.conj(chunk[1 : P // 2][::-1])
        coef = np.fft.ifft(full, axis=0)[: j_max + 1]
        coef *= scale.reshape((-1,) + (1,) * (coef.ndim - 1))
        return _check_real(coef, "inverse transform")

    if samples_half.ndim == 1 or samples_half.nbytes * 2 <= chunk_bytes:
        return transform(samples_half)
    out = np.empty((j_max + 1,) + samples_half.shape[1:])
    ncol = samples_half.shape[-1]
    per_col = samples_half.nbytes // max(ncol, 1)
    step = max(1, chunk_bytes // max(per_col * 4, 1))
    for c0 in range(0, ncol, step):
        out[..., c0 : c0 + step] = transform(samples_half[..., c0 : c0 + step])
    return out


def spec_to_fft_order(samples_spec_order: np.ndarray) -> np.ndarray:
    """Reindex samples from p = 1..P order to FFT (p = 0..P-1) order."""
    return np.roll(np.asarray(samples_spec_order), 1, axis=0)
