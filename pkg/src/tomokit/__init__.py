"""Center-of-mass, symplectic and cluster tomograms of multimode oscillator Fock states."""

from .closed_forms import CATALOG, make_state
from .errors import (
    DegenerateFrameError,
    DimensionError,
    InvalidStateError,
    NegativeProbabilityError,
    NonConvergenceError,
    TomokitError,
)
from .frames import EvolutionKind, TomographyFrame, evolve_frame, parse_frame, scale_frame
from .reconstruction import fidelity, reconstruct_from_samples, reconstruct_single_mode
from .separable import SeparableDecomposition, entanglement_witness_gap, separable_cm, separable_symplectic
from .states import DensityMatrix, FockSuperposition, density_matrix, negativity, partial_trace
from .tomography import (
    TomogramGrid,
    cluster_tomogram,
    clustered_tomogram,
    cm_tomogram,
    subsystem_tomogram,
    symplectic_tomogram,
)

__version__ = "0.1.0"

__all__ = [
    "CATALOG",
    "make_state",
    "TomokitError",
    "InvalidStateError",
    "DimensionError",
    "DegenerateFrameError",
    "NonConvergenceError",
    "NegativeProbabilityError",
    "EvolutionKind",
    "TomographyFrame",
    "evolve_frame",
    "parse_frame",
    "scale_frame",
    "fidelity",
    "reconstruct_from_samples",
    "reconstruct_single_mode",
    "SeparableDecomposition",
    "entanglement_witness_gap",
    "separable_cm",
    "separable_symplectic",
    "DensityMatrix",
    "FockSuperposition",
    "density_matrix",
    "negativity",
    "partial_trace",
    "TomogramGrid",
    "cluster_tomogram",
    "clustered_tomogram",
    "cm_tomogram",
    "subsystem_tomogram",
    "symplectic_tomogram",
]
