"""Quadrature-based difference stencils for the nonlocal operator.

The operator acting on lattice samples is discretized by splitting the
horizon ball into (2L/p)^d cells of side p*h, interpolating the difference
quotient (u(x_k) - u(y)) / w(x_k - y) with degree-p Lagrange polynomials per
cell, and integrating the rest, w * gamma, as the weight:

    a_m = (1 / w(h m)) * integral over B_delta(0) of Phi_m(s) w(s) gamma(s) ds

for m != 0, a_0 = 0.  The operator then reads

    (L u)_k = sum_m a_{k-m} (u_k - u_m) = sum_{|m| <= L} c_m u_{k+m}

with c_m = -a_m off center and c_0 = sum of all a_m.  Tables are dense over
the full (2L+1)^d cube: the |m|_inf = L shell integrals are genuinely
nonzero for generic kernels (their magnitude is recorded in ``shell_max``).

Singular kernels are integrable against Phi_m * w because every off-center
basis function vanishes at the origin; the four (two in 1d) cells whose
corner is the origin are refined dyadically toward it.
"""

from __future__ import annotations

import hashlib
import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from . import quadrature
from .errors import (
    ConfigurationError,
    OutOfRangeError,
    ProbeInconclusiveError,
)
from .grid import GridSpec
from .kernels import KernelSpec, kernel_values, weight_values


@dataclass(frozen=True)
class Stencil:
    """Coefficient tables of the discrete nonlocal operator.

    ``a`` and ``c`` are centered dense arrays of shape (2L+1,)^d; entry for
    offset m lives at position m + L per axis.  ``cfl_const`` is
    S = 2((2L+1)^d - 1) |a|_inf; the explicit scheme is stable for
    tau <= 2/sqrt(S).
    """

    p: int
    L: int
    d: int
    h: float
    delta: float
    a: np.ndarray = field(repr=False)
    c: np.ndarray = field(repr=False)
    cfl_const: float
    shell_max: float
    kernel_key: str
    quad_tol: float

    @property
    def a_max(self) -> float:
        return float(np.max(np.abs(self.a)))

    @property
    def c0(self) -> float:
        return float(self.c[(self.L,) * self.d])

    @property
    def has_negative_a(self) -> bool:
        return bool(np.any(self.a < 0))

    def offsets(self) -> np.ndarray:
        """All offsets of the (2L+1)^d cube, lexicographic, shape (n, d)."""
        r = np.arange(-self.L, self.L + 1)
        if self.d == 1:
            return r[:, None]
        return np.array(list(itertools.product(r, r)))

    def a_at(self, m) -> float:
        idx = np.atleast_1d(np.asarray(m, dtype=int)) + self.L
        return float(self.a[tuple(idx)])

    def c_at(self, m) -> float:
        idx = np.atleast_1d(np.asarray(m, dtype=int)) + self.L
        return float(self.c[tuple(idx)])

    def content_hash(self) -> str:
        payload = self.a.tobytes() + repr(
            (self.p, self.L, self.d, self.h, self.delta, self.kernel_key, self.quad_tol)
        ).encode()
        return hashlib.sha256(payload).hexdigest()


def _cell_ranges(L: int, p: int):
    """Left lattice node of each 1d cell of width p cells."""
    return range(-L, L, p)


def _build_axis_cells(L, p):
    return [(m0, m0 + p) for m0 in _cell_ranges(L, p)]


def build_stencil(
    kernel: KernelSpec,
    grid: GridSpec,
    p: int,
    quad_tol: float = 1e-12,
) -> Stencil:
    """Assemble the coefficient tables by per-cell Gauss quadrature.

    Requires L = delta/h to be an integer multiple of p (the cell partition
    of the horizon ball).
    """
    if p < 1:
        raise ConfigurationError("interpolation degree p must be >= 1")
    if kernel.d != grid.d:
        raise ConfigurationError("kernel and grid dimensions differ")
    if abs(kernel.delta - grid.delta) > 1e-12 * kernel.delta:
        raise ConfigurationError("kernel and grid horizons differ")
    L, h, d = grid.L, grid.h, grid.d
    if L % p != 0:
        raise ConfigurationError(f"L = delta/h = {L} must be a multiple of p = {p}")
    n_gl = max(2 * p + 2, 10)

    acc = np.zeros((2 * L + 1,) * d)
    if d == 1:
        for m0, m1 in _build_axis_cells(L, p):
            lo, hi = m0 * h, m1 * h
            nodes = np.arange(m0, m1 + 1)
            zero_col = int(np.where(nodes == 0)[0][0]) if (m0 == 0 or m1 == 0) else None

            def f(pts, _lo=lo, _zc=zero_col):
                s = pts[:, 0]
                basis = quadrature.lagrange_basis(s, _lo, h, p)
                wg = weight_values(pts) * kernel_values(kernel, pts)
                vals = basis * wg[:, None]
                if _zc is not None:
                    vals[:, _zc] = 0.0
                return vals

            if zero_col is not None:
                corner = (0.0,)
                vals = quadrature.integrate_corner_adaptive(
                    f, (lo,), (hi,), n_gl, quad_tol, corner, name=f"cell[{m0}:{m1}]"
                )
            else:
                vals = quadrature.integrate_adaptive(
                    f, (lo,), (hi,), n_gl, quad_tol, name=f"cell[{m0}:{m1}]"
                )
            acc[m0 + L : m1 + L + 1] += vals
    else:
        axis_cells = _build_axis_cells(L, p)
        for (m0x, m1x) in axis_cells:
            for (m0y, m1y) in axis_cells:
                lo = (m0x * h, m0y * h)
                hi = (m1x * h, m1y * h)
                nx = np.arange(m0x, m1x + 1)
                ny = np.arange(m0y, m1y + 1)
                touches_x = m0x == 0 or m1x == 0
                touches_y = m0y == 0 or m1y == 0
                corner_cell = touches_x and touches_y
                if corner_cell:
                    jx = int(np.where(nx == 0)[0][0])
                    jy = int(np.where(ny == 0)[0][0])
                    zero_col = jx * (p + 1) + jy
                else:
                    zero_col = None

                def f(pts, _lo=lo, _zc=zero_col):
                    b1 = quadrature.lagrange_basis(pts[:, 0], _lo[0], h, p)
                    b2 = quadrature.lagrange_basis(pts[:, 1], _lo[1], h, p)
                    basis = (b1[:, :, None] * b2[:, None, :]).reshape(pts.shape[0], -1)
                    wg = weight_values(pts) * kernel_values(kernel, pts)
                    vals = basis * wg[:, None]
                    if _zc is not None:
                        vals[:, _zc] = 0.0
                    return vals

                name = f"cell[{m0x}:{m1x},{m0y}:{m1y}]"
                if corner_cell:
                    corner = (0.0, 0.0)
                    vals = quadrature.integrate_corner_adaptive(
                        f, lo, hi, n_gl, quad_tol, corner, name=name
                    )
                else:
                    vals = quadrature.integrate_adaptive(f, lo, hi, n_gl, quad_tol, name=name)
                vals = vals.reshape(p + 1, p + 1)
                acc[m0x + L : m1x + L + 1, m0y + L : m1y + L + 1] += vals

    # divide by the AC weight at the node; center stays zero by definition
    r = np.arange(-L, L + 1) * h
    if d == 1:
        wnode = np.abs(r)
        center = (L,)
    else:
        R1, R2 = np.meshgrid(r, r, indexing="ij")
        wnode = (R1**2 + R2**2) / (np.abs(R1) + np.abs(R2) + 1e-300)
        center = (L, L)
    wnode[center] = 1.0
    a = acc / wnode
    a[center] = 0.0

    a = _symmetrize(a, d)

    c = -a
    c[center] = a.sum()
    n_neighbors = (2 * L + 1) ** d - 1
    a_max = float(np.max(np.abs(a)))
    S = 2.0 * n_neighbors * a_max

    infn = np.abs(np.arange(-L, L + 1))
    shell = infn == L if d == 1 else np.maximum.outer(infn, infn) == L
    shell_max = float(np.max(np.abs(a[shell]))) if np.any(shell) else 0.0

    a.setflags(write=False)
    c.setflags(write=False)
    return Stencil(
        p=p,
        L=L,
        d=d,
        h=h,
        delta=kernel.delta,
        a=a,
        c=c,
        cfl_const=S,
        shell_max=shell_max,
        kernel_key=kernel.cache_key(),
        quad_tol=quad_tol,
    )


def _symmetrize(a: np.ndarray, d: int) -> np.ndarray:
    """Check the construction symmetries to 1e-13 relative, then enforce them.

    Pairwise averaging keeps each earlier symmetry bitwise exact (float
    addition is commutative), so the result is exactly invariant under the
    full group: inversion in 1d, the dihedral group of the square in 2d.
    """
    scale = max(np.max(np.abs(a)), 1e-300)
    variants = [np.flip(a)]
    if d == 2:
        variants += [a.T, np.flip(a, 0), np.flip(a, 1), np.flip(a).T]
    for v in variants:
        if np.max(np.abs(a - v)) > 1e-13 * scale:
            raise ConfigurationError("stencil symmetry violated beyond roundoff")
    out = 0.5 * (a + np.flip(a))
    if d == 2:
        out = 0.5 * (out + out.T)
        out = 0.5 * (out + np.flip(out, 0))
    return out


def apply_operator(st: Stencil, field: np.ndarray, k, origin=None) -> float:
    """c-form operator at one lattice point: sum over |m| <= L of c_m u_{k+m}.

    ``origin`` is the array position of lattice index 0 (defaults to the
    array center); missing neighbours raise an out-of-range error naming
    the offending index.
    """
    field = np.asarray(field)
    k = np.atleast_1d(np.asarray(k, dtype=int))
    if origin is None:
        origin = tuple((n - 1) // 2 for n in field.shape)
    total = 0.0
    for m in st.offsets():
        pos = k + m + np.asarray(origin)
        if np.any(pos < 0) or np.any(pos >= np.asarray(field.shape)):
            raise OutOfRangeError(f"field has no value at lattice index {tuple(k + m)}")
        total += st.c_at(m) * float(field[tuple(pos)])
    return total


def apply_c_form(st: Stencil, u: np.ndarray) -> np.ndarray:
    """Vectorized c-form on the valid region (input shrunk by L per axis).

    Offsets are accumulated in a fixed lexicographic order so reductions
    are bit-reproducible.
    """
    L = st.L
    if st.d == 1:
        n = u.shape[0]
        out = np.zeros(n - 2 * L)
        for m in range(-L, L + 1):
            out += st.c[m + L] * u[L + m : n - L + m]
        return out
    n0, n1 = u.shape
    out = np.zeros((n0 - 2 * L, n1 - 2 * L))
    for m1 in range(-L, L + 1):
        for m2 in range(-L, L + 1):
            out += st.c[m1 + L, m2 + L] * u[L + m1 : n0 - L + m1, L + m2 : n1 - L + m2]
    return out


def _second_derivative(u, x, h):
    """Richardson-extrapolated central second difference (error ~ h^6)."""
    def d(hh):
        return (u(x + hh) - 2.0 * u(x) + u(x - hh)) / hh**2

    d1, d2, d3 = d(h), d(h / 2.0), d(h / 4.0)
    r1 = (4.0 * d2 - d1) / 3.0
    r2 = (4.0 * d3 - d2) / 3.0
    return (16.0 * r2 - r1) / 15.0


def _fourth_derivative(u, x, h):
    return (
        u(x - 2 * h) - 4.0 * u(x - h) + 6.0 * u(x) - 4.0 * u(x + h) + u(x + 2 * h)
    ) / h**4


def continuum_operator(kernel: KernelSpec, u, x, tol: float = 1e-12) -> float:
    """Adaptive-quadrature evaluation of the continuum nonlocal operator at x.

    Uses the symmetric form: integral over (0, delta] of
    (2u(x) - u(x+s) - u(x-s)) gamma(s), whose integrand is O(s^2) * gamma
    near the origin, taming the built-in singular families.  For those
    families the achievable accuracy is limited to ~1e-9 by floating-point
    cancellation of the second difference against the diverging gamma.
    """
    delta = kernel.delta
    if kernel.d == 1:
        x = float(np.atleast_1d(x)[0])

        def f(s):
            return (2.0 * u(x) - u(x + s) - u(x - s)) * float(kernel.radial(s))

        if kernel.singular:
            # Near the origin the float second difference is cancellation
            # noise amplified by the diverging gamma, so the inner piece is
            # replaced by its Taylor form: the gamma moments involve no u
            # differences and integrate cleanly under s = t^2.
            gate = max(tol, 5e-9)
            s_c = min(delta / 4.0, 0.02)

            def moment(k):
                g = lambda t: (t * t) ** k * float(kernel.radial(t * t)) * 2.0 * t
                return quad(g, 0.0, np.sqrt(s_c), epsabs=1e-13, epsrel=1e-12, limit=200)[0]

            d2 = _second_derivative(u, x, 0.05)
            d4 = _fourth_derivative(u, x, 0.05)
            inner = -(d2 * moment(2) + d4 * moment(4) / 12.0)
            v2, err = quad(f, s_c, delta, epsabs=gate / 2, epsrel=1e-11, limit=400)
            val = inner + v2
        else:
            gate = tol
            val, err = quad(f, 0.0, delta, epsabs=tol, epsrel=1e-13, limit=400)
        if err > 50 * max(gate, 1e-14):
            raise ProbeInconclusiveError(
                f"continuum-operator quadrature stuck at {err:g}", ladder=None
            )
        return val

    x = np.asarray(x, dtype=float)

    def f2(pts):
        up = u(x[0] + pts[:, 0], x[1] + pts[:, 1])
        um = u(x[0] - pts[:, 0], x[1] - pts[:, 1])
        return (2.0 * u(x[0], x[1]) - up - um) * kernel_values(kernel, pts)

    # integrand is even under s -> -s: two quadrants cover the square
    q1 = quadrature.integrate_corner_adaptive(
        f2, (0.0, 0.0), (delta, delta), 16, tol, (0.0, 0.0)
    )
    q2 = quadrature.integrate_corner_adaptive(
        f2, (0.0, -delta), (delta, 0.0), 16, tol, (0.0, 0.0)
    )
    return float(q1 + q2)


def truncation_order_probe(
    kernel: KernelSpec,
    p: int,
    u,
    h_ladder,
    window=(-1.0, 1.0),
    quad_tol: float = 1e-12,
):
    """Fit the convergence order of the discrete operator against the continuum one.

    Returns (slope, errors): max-norm errors on probe points (the coarsest
    lattice restricted to ``window``) for each h, and the least-squares
    slope of log(error) against log(h).
    """
    if kernel.d != 1:
        raise ConfigurationError("order probe is implemented for d = 1")
    h_ladder = [float(h) for h in h_ladder]
    h0 = max(h_ladder)
    kmax = int(np.floor(window[1] / h0 + 1e-9))
    kmin = int(np.ceil(window[0] / h0 - 1e-9))
    pts = np.arange(kmin, kmax + 1) * h0

    oracle = np.array([continuum_operator(kernel, u, x, tol=quad_tol) for x in pts])

    errors = []
    for h in h_ladder:
        grid = GridSpec(h=h, delta=kernel.delta, beta=kernel.delta * 4, d=1)
        st = build_stencil(kernel, grid, p, quad_tol=quad_tol)
        mh = np.arange(-st.L, st.L + 1) * h
        samples = u(pts[:, None] + mh[None, :])
        approx = samples @ st.c
        errors.append(float(np.max(np.abs(approx - oracle))))

    errors = np.array(errors)
    floor = 1e-11 * max(1.0, float(np.max(np.abs(oracle))))
    usable = errors > floor
    if usable.sum() < 2:
        raise ProbeInconclusiveError("error ladder sits at the tolerance floor", ladder=errors)
    hs = np.array(h_ladder)[usable]
    es = errors[usable]
    order = np.argsort(hs)[::-1]
    if np.any(np.diff(es[order]) > 0.2 * es[order][:-1]):
        raise ProbeInconclusiveError("error ladder is not monotone", ladder=errors)
    slope = float(np.polyfit(np.log(hs), np.log(es), 1)[0])
    return slope, errors
