"""Kernel families for the nonlocal interaction operator.

A kernel gamma is radial, nonnegative, and vanishes outside the closed
infinity-norm ball of radius ``delta`` (the horizon).  Built-in families:

    constant       gamma(a) = 3/(d * delta^(2+d))
    nonintegrable  gamma(a) = 2 * ||a||^-1 * delta^-2
    fractional     gamma(a) = C(nu, d) * ||a||^(-d-2*nu),  0 < nu < 1
    gaussian       gamma(a) = amplitude * exp(-rate * ||a||^2)
    custom         tabulated radial profile, linear interpolation

with C(nu, d) = 2^(2 nu) nu Gamma(nu + d/2) / (sqrt(pi) Gamma(1 - nu)).
Singular families (nonintegrable, fractional) must not be evaluated at the
origin; quadrature routines integrate around it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.special import gamma as gamma_fn

from .errors import ConfigurationError, DomainError, QuadratureError
from . import quadrature

FAMILIES = ("constant", "nonintegrable", "fractional", "gaussian", "custom")

#: families whose radial profile diverges at the origin (the product
#: weight*gamma stays integrable, which is what the stencil quadrature needs)
SINGULAR_FAMILIES = ("nonintegrable", "fractional")


@dataclass(frozen=True)
class KernelSpec:
    """A horizon-limited radial kernel with its family parameters."""

    family: str
    delta: float
    d: int
    nu: float | None = None
    amplitude: float | None = None
    rate: float | None = None
    #: (radii, values) samples for the custom family
    profile: tuple[tuple[float, ...], tuple[float, ...]] | None = field(
        default=None, repr=False
    )

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigurationError(f"unknown kernel family {self.family!r}")
        if not self.delta > 0:
            raise ConfigurationError("horizon delta must be positive")
        if self.d not in (1, 2):
            raise ConfigurationError(f"dimension must be 1 or 2, got {self.d}")
        if self.family == "fractional":
            if self.nu is None or not 0.0 < self.nu < 1.0:
                raise ConfigurationError("fractional family needs 0 < nu < 1")
        if self.family == "gaussian":
            if self.amplitude is None or not self.amplitude > 0:
                raise ConfigurationError("gaussian family needs amplitude > 0")
            if self.rate is None or not self.rate > 0:
                raise ConfigurationError("gaussian family needs rate > 0")
        if self.family == "custom":
            if self.profile is None:
                raise ConfigurationError("custom family needs a (radii, values) profile")
            radii, values = self.profile
            r = np.asarray(radii, dtype=float)
            v = np.asarray(values, dtype=float)
            if r.ndim != 1 or r.shape != v.shape or r.size < 2:
                raise ConfigurationError("custom profile needs matching 1d radii/values")
            if np.any(np.diff(r) <= 0) or r[0] < 0:
                raise ConfigurationError("custom profile radii must be increasing and >= 0")
            if np.any(v < 0):
                raise ConfigurationError("custom profile values must be nonnegative")

    @property
    def singular(self) -> bool:
        return self.family in SINGULAR_FAMILIES

    def cache_key(self) -> str:
        """Stable textual key used by the binary caches."""
        parts = [self.family, f"d={self.d}", f"delta={self.delta!r}"]
        if self.nu is not None:
            parts.append(f"nu={self.nu!r}")
        if self.amplitude is not None:
            parts.append(f"amp={self.amplitude!r}")
        if self.rate is not None:
            parts.append(f"rate={self.rate!r}")
        if self.profile is not None:
            parts.append("profile=" + repr(self.profile))
        return ";".join(parts)

    def radial(self, r):
        """Radial profile gamma(r) for r > 0 (no horizon cutoff applied)."""
        r = np.asarray(r, dtype=float)
        if self.family == "constant":
            return np.full_like(r, 3.0 / (self.d * self.delta ** (2 + self.d)))
        if self.family == "nonintegrable":
            return 2.0 / (r * self.delta**2)
        if self.family == "fractional":
            return fractional_constant(self.nu, self.d) * r ** (-self.d - 2.0 * self.nu)
        if self.family == "gaussian":
            return self.amplitude * np.exp(-self.rate * r**2)
        radii, values = self.profile
        return np.interp(r, np.asarray(radii), np.asarray(values), right=0.0)


def fractional_constant(nu: float, d: int) -> float:
    """Normalization 2^(2 nu) nu Gamma(nu + d/2) / (sqrt(pi) Gamma(1 - nu))."""
    return 2.0 ** (2 * nu) * nu * gamma_fn(nu + d / 2.0) / (np.sqrt(np.pi) * gamma_fn(1.0 - nu))


def _as_point(alpha, d):
    a = np.atleast_1d(np.asarray(alpha, dtype=float))
    if a.shape != (d,):
        raise DomainError(f"expected a {d}-vector, got shape {a.shape}")
    return a


def kernel_eval(spec: KernelSpec, alpha) -> float:
    """Evaluate gamma(alpha); zero outside the horizon ball.

    Singular families are rejected exactly at alpha = 0 (callers must
    integrate around the singularity).
    """
    a = _as_point(alpha, spec.d)
    # tiny relative slack so points on |alpha|_inf = delta stay in-support
    if np.max(np.abs(a)) > spec.delta * (1.0 + 1e-12):
        return 0.0
    r = float(np.linalg.norm(a))
    if r == 0.0:
        if spec.singular:
            raise DomainError(f"{spec.family} kernel is singular at the origin")
        return float(spec.radial(0.0))
    return float(spec.radial(r))


def kernel_values(spec: KernelSpec, pts: np.ndarray) -> np.ndarray:
    """Vectorized gamma at points inside the horizon, none at the origin.

    ``pts`` has shape (n, d); no horizon or origin checks (quadrature
    internals guarantee both).
    """
    r = np.sqrt(np.sum(pts * pts, axis=1))
    return spec.radial(r)


def weight_eval(alpha) -> float:
    """AC weight w(z) = ||z||^2 / |z|_1; domain error at z = 0."""
    a = np.atleast_1d(np.asarray(alpha, dtype=float))
    l1 = float(np.sum(np.abs(a)))
    if l1 == 0.0:
        raise DomainError("weight function undefined at 0")
    return float(np.sum(a * a)) / l1


def weight_values(pts: np.ndarray) -> np.ndarray:
    """Vectorized w over (n, d) points, none at the origin."""
    return np.sum(pts * pts, axis=1) / np.sum(np.abs(pts), axis=1)


def second_moment(spec: KernelSpec, quad_tol: float = 1e-10) -> float:
    """(1/2) * integral of ||alpha||^2 gamma(alpha) over the horizon ball.

    Equals d for kernels normalized so the nonlocal operator approaches the
    (negative) Laplacian as the horizon shrinks.
    """
    if spec.d == 1:
        val, err = quad(
            lambda r: r * r * float(spec.radial(r)),
            0.0,
            spec.delta,
            epsabs=quad_tol / 4.0,
            epsrel=1e-13,
            limit=200,
        )
        if err > quad_tol:
            raise QuadratureError(
                f"second-moment quadrature achieved only {err:g}", achieved=err
            )
        return val  # (1/2) * 2 * int_0^delta

    def f(pts):
        return np.sum(pts * pts, axis=1) * kernel_values(spec, pts)

    # quadrant [0, delta]^2, corner singularity at the origin; x4 by symmetry
    val = quadrature.integrate_2d_corner_adaptive(
        f,
        (0.0, 0.0),
        (spec.delta, spec.delta),
        n=24,
        tol=quad_tol / 8.0,
        singular_corner=(0.0, 0.0),
    )
    return 2.0 * val  # (1/2) * 4 * quadrant
