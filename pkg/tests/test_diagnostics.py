import numpy as np
import pytest

from nlwaves.diagnostics import (
    energy,
    l2_error_and_rate,
    reflection_coefficient,
    seminorm,
)
from nlwaves.dtn import neumann_operator
from nlwaves.errors import ConfigurationError, ShapeError
from nlwaves.grid import GridSpec
from nlwaves.kernels import KernelSpec
from nlwaves.stencil import apply_c_form, build_stencil


def test_seminorm_constant_zero(stencil_1d):
    u = np.full(21, 3.0)
    assert seminorm(stencil_1d, u, u) == 0.0


def test_seminorm_symmetric(stencil_1d, rng):
    u = rng.standard_normal(25)
    v = rng.standard_normal(25)
    a = seminorm(stencil_1d, u, v)
    b = seminorm(stencil_1d, v, u)
    assert a == pytest.approx(b, rel=1e-13)


def test_seminorm_nonnegative_for_p1(stencil_1d, rng):
    u = rng.standard_normal(30)
    assert seminorm(stencil_1d, u, u) >= 0.0


def test_seminorm_shape_error(stencil_1d):
    with pytest.raises(ShapeError):
        seminorm(stencil_1d, np.zeros(5), np.zeros(6))


def test_seminorm_green_rearrangement(rng):
    # <u,u>_K = (L u, u)_h + (N u, u) for u supported in the interior
    kernel = KernelSpec("constant", delta=0.25, d=1)
    grid = GridSpec(h=2**-4, delta=0.25, beta=1.0, d=1)
    st = build_stencil(kernel, grid, p=1)
    u = np.zeros(grid.padded_shape)
    u[grid.interior_slices] = rng.standard_normal(2 * grid.M - 1)
    lhs = seminorm(st, u[grid.interior_slices], u[grid.interior_slices])
    lu = apply_c_form(st, u)
    rhs = grid.h * float(np.sum(lu * u[grid.interior_slices])) + float(
        neumann_operator(st, grid, u) @ u.ravel()[grid.inner_flat]
    )
    assert lhs == pytest.approx(rhs, rel=1e-11)


def test_energy_zero_state(stencil_1d):
    z = np.zeros(21)
    e = energy(stencil_1d, z, z, 0.1)
    assert e.total == 0.0 and e.kinetic == 0.0 and e.potential == 0.0


def test_energy_pure_translation(stencil_1d):
    c = np.full(21, 5.0)
    e = energy(stencil_1d, c, c, 0.1)
    assert e.kinetic == 0.0 and e.potential == 0.0


def test_energy_hand_computed():
    # 3-node field, L=1 stencil: spreadsheet arithmetic
    kernel = KernelSpec("constant", delta=0.5, d=1)
    grid = GridSpec(h=0.5, delta=0.5, beta=1.0, d=1)
    st = build_stencil(kernel, grid, p=1)
    tau = 0.1
    u1 = np.array([0.0, 1.0, 0.5])
    u0 = np.array([0.0, 0.8, 0.6])
    a1 = st.a_at(1)
    h = 0.5
    kin = h * np.sum(((u1 - u0) / tau) ** 2)
    s = u1 + u0
    pot = 0.25 * (h / 2.0) * a1 * 2.0 * ((s[0] - s[1]) ** 2 + (s[1] - s[2]) ** 2)
    e = energy(st, u1, u0, tau)
    assert e.kinetic == pytest.approx(kin, rel=1e-14)
    assert e.potential == pytest.approx(pot, rel=1e-14)
    assert e.total == pytest.approx(kin + pot, rel=1e-14)


def test_energy_flags_indefinite_seminorm(rng):
    # sign-changing weights make the seminorm indefinite; the entry says so
    kernel = KernelSpec("fractional", delta=0.5, d=1, nu=0.5)
    grid = GridSpec(h=0.5 / 8, delta=0.5, beta=1.0, d=1)
    st = build_stencil(kernel, grid, p=4)
    assert st.has_negative_a
    u = rng.standard_normal(21)
    e = energy(st, u, 0.9 * u, 0.1)
    assert e.indefinite


def test_rate_table_identical_fields():
    rows, slope = l2_error_and_rate([(0.1, np.ones(5), np.ones(5))])
    assert rows[0]["error"] == 0.0
    assert slope is None


def test_rate_table_definition():
    u1 = np.array([1.0]); r1 = np.array([1.0 - 1e-2 / np.sqrt(0.1)])
    u2 = np.array([1.0]); r2 = np.array([1.0 - 2.5e-3 / np.sqrt(0.05)])
    rows, slope = l2_error_and_rate([(0.1, u1, r1), (0.05, u2, r2)])
    assert rows[1]["pair_rate"] == pytest.approx(2.0, rel=1e-12)
    assert slope == pytest.approx(2.0, rel=1e-12)


def test_rate_scale_invariance(rng):
    h_list = [0.1, 0.05, 0.025]
    entries, scaled = [], []
    for h in h_list:
        u = rng.standard_normal(8)
        r = u + h**2 * rng.standard_normal(8)
        entries.append((h, u, r))
        scaled.append((h, 7.0 * u, 7.0 * r))
    _, s1 = l2_error_and_rate(entries)
    _, s2 = l2_error_and_rate(scaled)
    assert s1 == pytest.approx(s2, rel=1e-13)


def test_rate_lattice_mismatch():
    with pytest.raises(ConfigurationError):
        l2_error_and_rate([(0.1, np.ones(5), np.ones(6))])


def test_reflection_zero_for_identical(rng):
    u = rng.standard_normal((4, 9))
    dev, mx = reflection_coefficient(u, u, 0.1, 1)
    assert mx == 0.0 and np.all(dev == 0.0)


def test_reflection_shape_mismatch(rng):
    with pytest.raises(ShapeError):
        reflection_coefficient(np.zeros((3, 5)), np.zeros((3, 6)), 0.1, 1)
