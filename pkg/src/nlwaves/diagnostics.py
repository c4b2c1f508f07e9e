"""Norms, energies, error tables, convergence rates, reflection measures.

The discrete energy at level n is

    E^n = || (u^n - u^(n-1)) / tau ||_h^2 + (1/4) | u^n + u^(n-1) |_h^2

with |.|_h the nonlocal seminorm of the a-table.  E^n oscillates at relative
O(tau^2 sigma / 4) even for the exact leapfrog solution; the exactly
conserved companion E^n - (1/4)|u^n - u^(n-1)|_h^2 is reported alongside
(``conserved``) and is the right quantity for tight plateau checks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, ShapeError
from .stencil import Stencil


def seminorm(st: Stencil, u: np.ndarray, v: np.ndarray) -> float:
    """Bilinear form (h^d/2) sum_{k,m in F} a_{k-m} (u_k - u_m)(v_k - v_m).

    F is the rectangular index box both fields live on; pairs outside the
    stencil range contribute nothing.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise ShapeError(f"field shapes differ: {u.shape} vs {v.shape}")
    if u.ndim != st.d:
        raise ShapeError(f"expected {st.d}-dimensional fields, got {u.ndim}")
    L = st.L
    total = 0.0
    if st.d == 1:
        n = u.shape[0]
        for m in range(-L, L + 1):
            if m == 0:
                continue
            lo, hi = max(0, -m), min(n, n - m)
            if lo >= hi:
                continue
            du = u[lo:hi] - u[lo + m : hi + m]
            dv = v[lo:hi] - v[lo + m : hi + m]
            total += st.a[m + L] * float(du @ dv)
    else:
        n0, n1 = u.shape
        for m1 in range(-L, L + 1):
            for m2 in range(-L, L + 1):
                if m1 == 0 and m2 == 0:
                    continue
                a = st.a[m1 + L, m2 + L]
                if a == 0.0:
                    continue
                lo0, hi0 = max(0, -m1), min(n0, n0 - m1)
                lo1, hi1 = max(0, -m2), min(n1, n1 - m2)
                if lo0 >= hi0 or lo1 >= hi1:
                    continue
                du = u[lo0:hi0, lo1:hi1] - u[lo0 + m1 : hi0 + m1, lo1 + m2 : hi1 + m2]
                dv = v[lo0:hi0, lo1:hi1] - v[lo0 + m1 : hi0 + m1, lo1 + m2 : hi1 + m2]
                total += a * float(np.sum(du * dv))
    return 0.5 * st.h**st.d * total


def l2_norm_sq(u: np.ndarray, h: float, d: int) -> float:
    """Discrete L2 norm squared, h^d sum u^2."""
    return h**d * float(np.sum(np.asarray(u) ** 2))


@dataclass(frozen=True)
class EnergyEntry:
    """One step of the energy stream; parts reported separately."""

    n: int
    kinetic: float
    potential: float  # (1/4) |u^n + u^(n-1)|^2 seminorm part
    total: float
    conserved: float
    indefinite: bool  # seminorm is only a seminorm when a >= 0


def energy(st: Stencil, u_curr: np.ndarray, u_prev: np.ndarray, tau: float,
           n: int = 0) -> EnergyEntry:
    """Discrete energy of two consecutive interior levels."""
    kin = l2_norm_sq((u_curr - u_prev) / tau, st.h, st.d)
    pot = 0.25 * seminorm(st, u_curr + u_prev, u_curr + u_prev)
    diff = 0.25 * seminorm(st, u_curr - u_prev, u_curr - u_prev)
    return EnergyEntry(
        n=n,
        kinetic=kin,
        potential=pot,
        total=kin + pot,
        conserved=kin + pot - diff,
        indefinite=st.has_negative_a,
    )


def l2_error_and_rate(entries):
    """Error table with pairwise rates and a global least-squares slope.

    ``entries`` is a list of (h, numerical field, reference field) sampled on
    a common lattice per entry.  Returns (rows, slope): each row is a dict
    with h, error and pair_rate (None for the first row); slope is the
    least-squares fit of log(error) against log(h), None for a single entry.
    """
    rows = []
    hs, errs = [], []
    for h, u, ref in entries:
        u = np.asarray(u, dtype=float)
        ref = np.asarray(ref, dtype=float)
        if u.shape != ref.shape:
            raise ConfigurationError(
                "numerical and reference fields live on different lattices "
                f"({u.shape} vs {ref.shape}); restrict or interpolate first"
            )
        err = float(np.sqrt(h ** u.ndim * np.sum((u - ref) ** 2)))
        rate = None
        if hs:
            rate = float(np.log(errs[-1] / err) / np.log(hs[-1] / h))
        rows.append({"h": float(h), "error": err, "pair_rate": rate})
        hs.append(float(h))
        errs.append(err)
    slope = None
    if len(hs) >= 2:
        slope = float(np.polyfit(np.log(hs), np.log(errs), 1)[0])
    for row in rows:
        row["slope"] = slope
    return rows, slope


def reflection_coefficient(u_run: np.ndarray, u_oracle: np.ndarray, h: float, d: int):
    """Per-step and max relative L2 deviation between two interior records.

    Records are stacked (n_steps+1, *K-shape).  The maximum deviation is
    normalized by the oracle's maximum norm over time.
    """
    u_run = np.asarray(u_run)
    u_oracle = np.asarray(u_oracle)
    if u_run.shape != u_oracle.shape:
        raise ShapeError(f"trajectory shapes differ: {u_run.shape} vs {u_oracle.shape}")
    axes = tuple(range(1, u_run.ndim))
    diff = np.sqrt(h**d * np.sum((u_run - u_oracle) ** 2, axis=axes))
    ref = np.sqrt(h**d * np.sum(u_oracle**2, axis=axes))
    denom = float(np.max(ref))
    if denom == 0.0:
        return diff, float(np.max(diff))
    return diff / denom, float(np.max(diff)) / denom
