"""Two-dimensional on-resonance double-kicked lattice: Floquet higher-order
topology in momentum space.

The package splits into the closed-form Bloch layer (model), winding-number
invariants and phase diagrams (winding), finite open-boundary chains with
corner-mode censusing (lattice), chiral wave-packet dynamics (dynamics), a
property suite (validate) and the command-line front end (cli).
"""

__version__ = "0.1.0"

from .errors import (
    BoundaryLeakageError,
    CensusMismatchError,
    ConfigError,
    GaplessPointError,
    ModelError,
    NonQuantizedError,
    NumericalFailureError,
    ParityViolationError,
)
from .model import (
    BandPoint,
    BlochBlock,
    BoundaryWitness,
    KickParams,
    Quasiposition,
    TimeFrame,
    band_energies,
    band_point,
    dispersion,
    frame_matrix,
    on_phase_boundary,
    shorthand_kappas,
    unit_vector,
)
from .winding import (
    InvariantSet,
    PhaseDiagram,
    WindingResult,
    axis_invariants,
    hotp_invariants,
    phase_diagram,
    sweep_invariants,
    winding_number,
)
from .lattice import (
    CornerCensus,
    EdgeCensus,
    LatticeSpec,
    ObcSpectrum,
    build_obc_unitary,
    corner_census_2d,
    corner_mode_density,
    edge_mode_census_1d,
    eigensolve,
    ipr,
    solve_chain,
)
from .dynamics import (
    ChiralFrameState,
    McdTrace,
    frame_step,
    initial_state,
    mcd_expectation,
    mcd_invariants,
)

__all__ = [name for name in dir() if not name.startswith("_")]
