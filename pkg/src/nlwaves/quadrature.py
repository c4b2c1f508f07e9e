"""Gauss-Legendre cell quadrature with dyadic refinement toward a corner.

The stencil integrands are polynomial times weight*kernel, smooth inside
every cell except the cells whose corner sits on the kernel's singularity
(the origin).  Those cells are integrated as a sum over dyadic rings
shrinking toward the corner; Gauss points are interior so the singular
point itself is never evaluated.

Integrand callbacks receive an (npts, d) array and return (npts,) or
(npts, nb) values; vector-valued integrands are integrated componentwise.
"""

from __future__ import annotations

import numpy as np

from .errors import QuadratureError

_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def gl_rule(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes/weights of the n-point Gauss-Legendre rule on [-1, 1]."""
    rule = _GL_CACHE.get(n)
    if rule is None:
        rule = np.polynomial.legendre.leggauss(n)
        _GL_CACHE[n] = rule
    return rule


def _fixed(f, lo, hi, n):
    """Tensor Gauss-Legendre on the box [lo, hi] (d = 1 or 2)."""
    x, w = gl_rule(n)
    d = len(lo)
    if d == 1:
        pts = (0.5 * (lo[0] + hi[0]) + 0.5 * (hi[0] - lo[0]) * x)[:, None]
        wts = 0.5 * (hi[0] - lo[0]) * w
    else:
        x1 = 0.5 * (lo[0] + hi[0]) + 0.5 * (hi[0] - lo[0]) * x
        x2 = 0.5 * (lo[1] + hi[1]) + 0.5 * (hi[1] - lo[1]) * x
        g1, g2 = np.meshgrid(x1, x2, indexing="ij")
        pts = np.column_stack([g1.ravel(), g2.ravel()])
        wts = (0.25 * (hi[0] - lo[0]) * (hi[1] - lo[1]) * np.outer(w, w)).ravel()
    vals = np.asarray(f(pts), dtype=float)
    return wts @ vals


def _bisect(lo, hi):
    """All 2^d sub-boxes of one bisection."""
    d = len(lo)
    mid = tuple(0.5 * (a + b) for a, b in zip(lo, hi))
    if d == 1:
        return [((lo[0],), (mid[0],)), ((mid[0],), (hi[0],))]
    out = []
    for i in range(2):
        for j in range(2):
            blo = (lo[0] if i == 0 else mid[0], lo[1] if j == 0 else mid[1])
            bhi = (mid[0] if i == 0 else hi[0], mid[1] if j == 0 else hi[1])
            out.append((blo, bhi))
    return out


def integrate_adaptive(f, lo, hi, n, tol, max_depth=12, name=""):
    """Adaptive bisection quadrature for integrands smooth up to the boundary."""
    lo = tuple(float(v) for v in lo)
    hi = tuple(float(v) for v in hi)

    def rec(blo, bhi, depth):
        coarse = _fixed(f, blo, bhi, n)
        fine = sum(_fixed(f, slo, shi, n) for slo, shi in _bisect(blo, bhi))
        err = np.max(np.abs(coarse - fine))
        if err <= tol:
            return fine
        if depth >= max_depth:
            raise QuadratureError(
                f"quadrature did not converge on cell {name or (blo, bhi)}",
                achieved=float(err),
                cell=(blo, bhi),
            )
        return sum(rec(slo, shi, depth + 1) for slo, shi in _bisect(blo, bhi))

    return rec(lo, hi, 0)


def _ring_boxes(widths, level):
    """Dyadic ring Q_level \\ Q_{level+1} in corner-local coordinates.

    Q_j is the corner box scaled by 2^-j; the ring is one strip plus one
    block (an interval in 1d).
    """
    if len(widths) == 1:
        (w0,) = widths
        s = w0 / 2.0**level
        return [((s / 2.0,), (s,))]
    w0, w1 = widths
    s0, s1 = w0 / 2.0**level, w1 / 2.0**level
    # three squares, symmetric under axis swap so dihedral stencil
    # symmetries survive quadrature exactly
    return [
        ((s0 / 2.0, 0.0), (s0, s1 / 2.0)),
        ((s0 / 2.0, s1 / 2.0), (s0, s1)),
        ((0.0, s1 / 2.0), (s0 / 2.0, s1)),
    ]


def integrate_corner_adaptive(f, lo, hi, n, tol, singular_corner, max_depth=200, name=""):
    """Integrate over [lo, hi] with a singularity at one box corner.

    Sums Gauss-Legendre contributions over dyadic rings toward the corner,
    closing each partial sum with an estimate of the remaining inner box,
    and stops once the running total changes by less than ``tol``.
    """
    lo = tuple(float(v) for v in lo)
    hi = tuple(float(v) for v in hi)
    corner = tuple(float(v) for v in singular_corner)
    d = len(lo)
    widths = []
    signs = []
    for i in range(d):
        if corner[i] == lo[i]:
            signs.append(1.0)
            widths.append(hi[i] - lo[i])
        elif corner[i] == hi[i]:
            signs.append(-1.0)
            widths.append(hi[i] - lo[i])
        else:
            raise ValueError("singular_corner must be a corner of the box")

    def to_global(blo, bhi):
        glo, ghi = [], []
        for i in range(d):
            a = corner[i] + signs[i] * blo[i]
            b = corner[i] + signs[i] * bhi[i]
            glo.append(min(a, b))
            ghi.append(max(a, b))
        return tuple(glo), tuple(ghi)

    def inner_box(level):
        blo = tuple(0.0 for _ in range(d))
        bhi = tuple(w / 2.0**level for w in widths)
        return to_global(blo, bhi)

    total = None
    prev = None
    for level in range(max_depth):
        if level == 0:
            ring = 0.0
        else:
            # add Q_{level-1} \ Q_level so that total + Q_level closure = Q_0
            ring = sum(
                _fixed(f, *to_global(blo, bhi), n)
                for blo, bhi in _ring_boxes(widths, level - 1)
            )
        total = ring if total is None else total + ring
        glo, ghi = inner_box(level)
        closure = _fixed(f, glo, ghi, n)
        current = total + closure
        if prev is not None:
            change = np.max(np.abs(current - prev))
            if change <= tol:
                return current
        prev = current
    raise QuadratureError(
        f"corner refinement did not converge on cell {name or (lo, hi)}",
        achieved=float(np.max(np.abs(current - prev))) if prev is not None else None,
        cell=(lo, hi),
    )


def integrate_2d_corner_adaptive(f, lo, hi, n, tol, singular_corner, max_depth=200):
    return integrate_corner_adaptive(f, lo, hi, n, tol, singular_corner, max_depth)


def lagrange_basis(s: np.ndarray, x0: float, h: float, p: int) -> np.ndarray:
    """Cardinal Lagrange basis on nodes x0 + j*h, j = 0..p; shape (npts, p+1)."""
    nodes = x0 + h * np.arange(p + 1)
    out = np.ones((s.size, p + 1))
    for j in range(p + 1):
        for i in range(p + 1):
            if i != j:
                out[:, j] *= (s - nodes[i]) / (nodes[j] - nodes[i])
    return out
