"""Exception types shared across the package."""


class ModelError(Exception):
    """Base class for all domain errors raised by this package."""


class GaplessPointError(ModelError):
    """A quasienergy gap closed (sin E below threshold); the parameter point
    sits on a topological phase boundary and winding data is undefined."""


class NonQuantizedError(ModelError):
    """A winding accumulation failed its quantization gate, typically from a
    too-coarse quasiposition grid or proximity to a phase boundary."""


class ParityViolationError(ModelError):
    """Frame windings of one axis came out with opposite parity.  This cannot
    happen for a chiral-symmetric pair and signals an implementation bug."""


class BoundaryLeakageError(ModelError):
    """An evolving wave packet reached the edge of its finite lattice; the
    caller must enlarge the lattice."""


class NumericalFailureError(ModelError):
    """A numeric guarantee (unitarity, eigenvalue modulus) was violated."""


class CensusMismatchError(ModelError):
    """Composed and directly-detected corner-mode counts disagree."""

    def __init__(self, composed, direct):
        self.composed = composed
        self.direct = direct
        super().__init__(
            f"corner census mismatch: composed {composed} vs direct {direct}"
        )


class ConfigError(ValueError):
    """A run configuration failed validation."""
