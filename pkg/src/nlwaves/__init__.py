"""Nonlocal wave equations on unbounded domains.

Quadrature-based stencils for the horizon-limited nonlocal operator,
explicit leapfrog time stepping, and exact discrete absorbing boundary
conditions built from z-domain boundary kernels (block transfer maps in 1d,
lattice Green's functions in 2d), reformulated as Dirichlet-to-Neumann data
through the discrete nonlocal Green's first identity.
"""

from .diagnostics import EnergyEntry, energy, l2_error_and_rate, reflection_coefficient, seminorm
from .dtd1d import DtdMap1D, ToeplitzPair, assemble_toeplitz, kcaret_iterative, kcaret_scalar
from .dtd2d import DtdMap2D, LatticeGreens, dtd_map_2d, fourier_symbol, greens_function
from .dtn import (
    BoundaryKernelTable,
    apply_dtd_bc,
    apply_dtn_bc,
    build_boundary_table,
    neumann_operator,
)
from .grid import GridSpec
from .kernels import KernelSpec, kernel_eval, second_moment, weight_eval
from .reference import dispersion_symbol, pseudo_spectral_reference
from .solver import (
    ContourParams,
    Trajectory,
    WaveProblem,
    solve,
    solve_free_space,
    stability_probe,
)
from .stencil import Stencil, apply_operator, build_stencil, truncation_order_probe
from .timestepper import TimeGrid, WaveState, cfl_bound, initial_steps, step
from .ztransform import ContourSpec, contour_for_steps, inverse_ztransform, s_of_z

__version__ = "0.1.0"
