"""Exception types shared across the package."""


class NHMQCError(Exception):
    """Base class for all package errors."""


class DefectiveSpectrumError(NHMQCError):
    """An eigensystem is (near-)defective and the caller required a clean one."""

    def __init__(self, message: str, indices: tuple[int, ...] = ()):
        super().__init__(message)
        self.indices = indices


class ExceptionalPointError(NHMQCError):
    """Left/right vectors are self-orthogonal (or a closed form sits at an EP)."""


class NonHermitianError(NHMQCError):
    """An operator required to be Hermitian is not, beyond tolerance."""

    def __init__(self, message: str, asymmetry: float = 0.0):
        super().__init__(message)
        self.asymmetry = asymmetry


class ConsistencyError(NHMQCError):
    """An internal cross-check (sum rule, block completeness) failed."""


class AliasingError(NHMQCError):
    """Phase grid too coarse for the coherence-order content of the state."""


class NoPeakError(NHMQCError):
    """A sweep has no interior maximum to refine."""


class EnsembleFailureError(NHMQCError):
    """Every realization at some disorder strength failed."""


class ConfigError(NHMQCError):
    """Invalid run configuration (CLI exit code 2)."""
