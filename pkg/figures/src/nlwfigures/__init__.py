"""Figure emitter for the nonlocal-wave solver's CSV outputs."""

from .io import SchemaError, read_rate_table, read_snapshot_1d, read_snapshot_2d
from .render import plot_convergence, plot_evolution, plot_isolines

__version__ = "0.1.0"
