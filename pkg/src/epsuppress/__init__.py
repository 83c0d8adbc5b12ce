"""Initial excitation rates of open quantum systems under stabilizer-code energy penalties."""

__version__ = "0.1.0"

from .analysis import (
    RateModel, RateReport, excitation_rate, penalty_sweep, pure_state_rate_check,
    rate_bounds, size_scaling_sweep,
)
from .bath import OhmicBath, s_principal_value
from .codes import (
    CODE_CATALOG, EncodedSystem, StabilizerCode, codespace_projector, detects,
    encode_logical, get_code, penalty_hamiltonian,
)
from .dynamics import (
    Trajectory, finite_difference_purity_rate, finite_difference_rate, projector_derivative_check,
    propagate,
)
from .errors import (
    ConfigError, EpsError, NumericalError, PhysicsContractError,
)
from .generators import InteractionSet, Liouvillian, build_dsame, build_lindblad
from .kernels import BACKEND
from .operators import PauliString, pauli_matrix, pauli_sum, spectral_decompose
