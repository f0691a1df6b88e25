"""Exception types shared across the library and surfaced by the CLI."""


class SimulationError(Exception):
    """Base class for all errors raised by this package."""


class GridError(SimulationError):
    """Degenerate interval or too few points."""


class PotentialError(SimulationError):
    """Invalid potential parameters or tabulated-length mismatch."""


class HamiltonianError(SimulationError):
    """Length mismatch or nonpositive physical constant."""


class GridMismatchError(SimulationError):
    """Operands were built on different grids."""


class EigensolverError(SimulationError):
    """Eigensolver failed to converge or k out of range."""


class DimensionTooLargeError(SimulationError):
    """Dense construction refused to avoid an accidental huge allocation."""


class UnnormalizedStateError(SimulationError):
    """Operation requires a normalized state."""


class NonHermitianOperatorError(SimulationError):
    """Imaginary residue of an expectation value exceeded tolerance."""


class DecompositionError(SimulationError):
    """Singular value decomposition failed."""


class ScenarioError(SimulationError):
    """Unknown scenario or invalid scenario parameters."""


class ConfigError(SimulationError):
    """Configuration document or CLI override violates the schema."""
