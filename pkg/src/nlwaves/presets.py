"""Initial-data presets used by configs and the experiment suite."""

from __future__ import annotations

import numpy as np

from .errors import ConfigurationError


def two_bump_phi(x):
    """Two Gaussian bumps at +-0.2 (the standard 1d benchmark data)."""
    return np.exp(-25.0 * (x - 0.2) ** 2) + np.exp(-25.0 * (x + 0.2) ** 2)


def odd_velocity_psi(x):
    return 50.0 * x * np.exp(-25.0 * x**2)


def two_bump_phi_2d(x1, x2):
    return np.exp(-25.0 * ((x1 - 0.2) ** 2 + (x2 - 0.2) ** 2)) + np.exp(
        -25.0 * ((x1 + 0.2) ** 2 + (x2 + 0.2) ** 2)
    )


def gaussian_bump(width: float, center=0.0):
    """Factory: exp(-width * ||x - center||^2), any dimension."""

    def fn(*coords):
        c = np.broadcast_to(np.atleast_1d(center), (len(coords),))
        r2 = sum((x - ci) ** 2 for x, ci in zip(coords, c))
        return np.exp(-width * r2)

    return fn


def initial_data(preset: str, d: int):
    """(phi, psi) for a named preset."""
    if preset == "zero":
        return None, None
    if preset == "example1":
        if d != 1:
            raise ConfigurationError("preset example1 is one-dimensional")
        return two_bump_phi, odd_velocity_psi
    if preset == "example2":
        if d != 2:
            raise ConfigurationError("preset example2 is two-dimensional")
        return two_bump_phi_2d, None
    raise ConfigurationError(f"unknown initial-data preset {preset!r}")
