"""Spin-j matter waves transported along curved guides.

The wave vector of an atom in a perfect guide stays tangent to the guide
with fixed magnitude; its internal state then evolves under
H(t) = (k x dk/dt / k^2) . J.
"""

from .analytic_solution import analytic_state, analytic_states, geometric_phase, rotation_operator
from .errors import (
    DegenerateTangentError,
    DomainError,
    FiberwaveError,
    PolePassageError,
    ValidationError,
)
from .evolution import EvolutionReport, QuantumState, hamiltonian_at, propagate, schrodinger_residual
from .guide_geometry import (
    ArchimedeanSpiral,
    CircularArc,
    Composite,
    Helix,
    Straight,
    WaveVectorTrack,
    angular_velocity,
    sample_track,
    spherical_angles,
    transport_residual,
    working_frame,
)
from .spin_algebra import SpinRepresentation, expm_skew, make_spin_rep, su2_to_so3
from .verification import conjugation_matrix, helicity, lvn_residual, momentum_eigenvalues

__version__ = "0.1.0"
