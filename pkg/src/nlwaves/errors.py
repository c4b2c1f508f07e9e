"""Exception types shared across the toolkit."""


class NlwError(Exception):
    """Base class for all nlwaves errors."""


class ConfigurationError(NlwError, ValueError):
    """Invalid or inconsistent configuration (grid, degree, config file, ...)."""


class DomainError(NlwError, ValueError):
    """Evaluation outside a function's domain (e.g. a singular kernel at 0)."""


class QuadratureError(NlwError, ArithmeticError):
    """Adaptive quadrature failed to reach the requested tolerance."""

    def __init__(self, message, achieved=None, cell=None):
        super().__init__(message)
        self.achieved = achieved
        self.cell = cell


class OutOfRangeError(NlwError, IndexError):
    """A lattice access referenced an index with no stored value."""


class InstabilityError(NlwError, ArithmeticError):
    """NaN/Inf detected during time stepping."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class AliasingError(NlwError, ArithmeticError):
    """Imaginary residue of an inverse z-transform above threshold."""

    def __init__(self, message, residue=None):
        super().__init__(message)
        self.residue = residue


class NearSpectrumError(NlwError, ArithmeticError):
    """A z-domain frequency fell (numerically) on the operator spectrum."""

    def __init__(self, message, s=None):
        super().__init__(message)
        self.s = s


class IterationFailureError(NlwError, ArithmeticError):
    """Doubling iteration did not converge within the iteration budget."""

    def __init__(self, message, norms=None):
        super().__init__(message)
        self.norms = norms


class IllPosedLayerError(NlwError, ArithmeticError):
    """Boundary-layer Gram block numerically singular."""

    def __init__(self, message, cond=None):
        super().__init__(message)
        self.cond = cond


class TableExhaustedError(NlwError, IndexError):
    """Boundary-kernel table queried beyond its last stored step."""


class OracleInvalidError(NlwError, ArithmeticError):
    """Free-space oracle padding was insufficient before final time."""


class DomainTooSmallError(NlwError, ValueError):
    """Pseudo-spectral reference domain too small (wrap-around contamination)."""


class ProbeInconclusiveError(NlwError, ArithmeticError):
    """Order probe error ladder not monotone beyond the tolerance floor."""

    def __init__(self, message, ladder=None):
        super().__init__(message)
        self.ladder = ladder


class ShapeError(NlwError, ValueError):
    """Mismatched field shapes or index sets."""


class CacheCorruptionError(NlwError, OSError):
    """A cache file failed its integrity checks."""
