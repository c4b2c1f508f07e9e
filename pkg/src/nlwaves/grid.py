"""Lattice geometry: the computational box, its boundary layers, and ghost shell.

Index conventions (infinity norm throughout):

    K        |k| < M          computational domain
    K^-      |k| < M - L      deep interior (initial data lives here)
    K^-_g    M - L <= |k| < M inner boundary layer (drives the boundary maps)
    K^+_g    M <= |k| < M + L ghost shell (needed by the interior update)
    K^+      |k| < M + L      everything stored
    K^c      |k| >= M         exterior

Padded arrays cover K^+: shape (2(M+L)-1,)^d with lattice index k stored at
array position k + (M+L-1).  Layer enumerations are lexicographic in k,
fixed once per grid (the "canonical enumeration" used by boundary tables).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ConfigurationError, ShapeError


def _as_exact_int(x: float, what: str) -> int:
    n = int(round(x))
    if abs(x - n) > 1e-9 * max(1.0, abs(x)):
        raise ConfigurationError(f"{what} = {x!r} is not an integer")
    return n


@dataclass(frozen=True)
class GridSpec:
    """Uniform lattice with mesh size h covering the box |x| < beta."""

    h: float
    delta: float
    beta: float
    d: int

    def __post_init__(self):
        if self.h <= 0:
            raise ConfigurationError("mesh size h must be positive")
        if self.d not in (1, 2):
            raise ConfigurationError(f"dimension must be 1 or 2, got {self.d}")
        _as_exact_int(self.delta / self.h, "delta/h")
        _as_exact_int(self.beta / self.h, "beta/h")
        if not self.M > self.L:
            raise ConfigurationError(
                f"need M > L (beta > delta): M={self.M}, L={self.L}"
            )

    @property
    def L(self) -> int:
        return int(round(self.delta / self.h))

    @property
    def M(self) -> int:
        return int(round(self.beta / self.h))

    @property
    def half_extent(self) -> int:
        """Largest stored |k| (= M + L - 1)."""
        return self.M + self.L - 1

    @property
    def padded_shape(self) -> tuple[int, ...]:
        n = 2 * self.half_extent + 1
        return (n,) * self.d

    def axis_indices(self) -> np.ndarray:
        return np.arange(-self.half_extent, self.half_extent + 1)

    def coordinates(self):
        """Physical coordinates of the padded box (1d array, or meshgrid pair)."""
        x = self.axis_indices() * self.h
        if self.d == 1:
            return x
        return np.meshgrid(x, x, indexing="ij")

    def infnorm(self) -> np.ndarray:
        """|k|_inf over the padded box."""
        k = np.abs(self.axis_indices())
        if self.d == 1:
            return k
        return np.maximum.outer(k, k)

    # masks over the padded box
    @cached_property
    def interior_mask(self) -> np.ndarray:
        return self.infnorm() < self.M

    @cached_property
    def deep_mask(self) -> np.ndarray:
        return self.infnorm() < self.M - self.L

    @cached_property
    def inner_layer_mask(self) -> np.ndarray:
        n = self.infnorm()
        return (n >= self.M - self.L) & (n < self.M)

    @cached_property
    def ghost_mask(self) -> np.ndarray:
        return self.infnorm() >= self.M

    @property
    def interior_slices(self) -> tuple[slice, ...]:
        return (slice(self.L, self.L + 2 * self.M - 1),) * self.d

    @cached_property
    def inner_flat(self) -> np.ndarray:
        """Canonical (lexicographic) enumeration of K^-_g as flat indices."""
        return np.flatnonzero(self.inner_layer_mask.ravel())

    @cached_property
    def ghost_flat(self) -> np.ndarray:
        return np.flatnonzero(self.ghost_mask.ravel())

    @cached_property
    def inner_multi(self) -> np.ndarray:
        """(n_inner, d) lattice multi-indices in canonical order."""
        return self._unravel(self.inner_flat)

    @cached_property
    def ghost_multi(self) -> np.ndarray:
        return self._unravel(self.ghost_flat)

    def _unravel(self, flat: np.ndarray) -> np.ndarray:
        idx = np.unravel_index(flat, self.padded_shape)
        return np.stack(idx, axis=-1) - self.half_extent

    @property
    def n_inner(self) -> int:
        return self.inner_flat.size

    @property
    def n_ghost(self) -> int:
        return self.ghost_flat.size

    def index_sets(self) -> dict[str, set]:
        """The six lattice index sets as explicit set comprehensions (reference path)."""
        rng = range(-self.half_extent, self.half_extent + 1)
        if self.d == 1:
            pts = [(k,) for k in rng]
        else:
            pts = [(k1, k2) for k1 in rng for k2 in rng]
        M, L = self.M, self.L
        inf = lambda k: max(abs(c) for c in k)
        return {
            "K": {k for k in pts if inf(k) < M},
            "K_minus": {k for k in pts if inf(k) < M - L},
            "K_minus_gamma": {k for k in pts if M - L <= inf(k) < M},
            "K_plus_gamma": {k for k in pts if M <= inf(k) < M + L},
            "K_plus": {k for k in pts if inf(k) < M + L},
            "K_c": {k for k in pts if inf(k) >= M},
        }

    def with_padding(self, extra_cells: int) -> "GridSpec":
        """Grid enlarged by extra_cells lattice cells of half-width."""
        return GridSpec(
            h=self.h,
            delta=self.delta,
            beta=self.beta + extra_cells * self.h,
            d=self.d,
        )

    def zeros(self) -> np.ndarray:
        return np.zeros(self.padded_shape)

    def sample(self, fn) -> np.ndarray:
        """Sample a callable (or pass an array through) on the padded box."""
        if fn is None:
            return self.zeros()
        if isinstance(fn, np.ndarray):
            if fn.shape != self.padded_shape:
                raise ShapeError(
                    f"array shape {fn.shape} does not match padded box {self.padded_shape}"
                )
            return fn.astype(float)
        if self.d == 1:
            return np.asarray(fn(self.coordinates()), dtype=float)
        x1, x2 = self.coordinates()
        return np.asarray(fn(x1, x2), dtype=float)

    def strides_elems(self) -> np.ndarray:
        """Row-major strides of the padded box, in elements."""
        n = self.padded_shape[0]
        if self.d == 1:
            return np.array([1])
        return np.array([n, 1])
