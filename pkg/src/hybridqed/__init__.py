"""Simulator for a coherently driven qubit-plasmon-phonon system in ultrastrong coupling.

Typical use::

    from hybridqed import ModelParams, TruncationSpec, build_space, dress
    from hybridqed import build_liouvillian, steady_state, g2_equal_time

    d = dress(ModelParams(omega_d=0.74), build_space(TruncationSpec()))
    ss = steady_state(build_liouvillian(d))
    g2_equal_time(ss, d, "a")
"""

__version__ = "0.1.0"

from .basis import BareSpace, TruncationSpec, build_space, excitation_number_op
from .correlations import (CorrelationRecord, correlation_record, default_tau_grid,
                           dominant_frequency, g2_cross, g2_delayed, g2_equal_time,
                           intensity)
from .dressed import (DressedSystem, dress, manifold_diagnostic, manifold_of_index,
                      xdot_minus, xdot_plus)
from .errors import (ConfigError, ConvergenceFailure, DegenerateKernel, DimensionOverflow,
                     HybridQEDError, InvalidParams, NonHermitianInput, ParityWarning,
                     SecularityWarning, SingularMatrix, StepFailure, ZeroIntensity)
from .master import (Liouvillian, SteadyState, build_liouvillian, evolve,
                     regression_correlator, steady_state)
from .model import (DerivedCouplings, ModelParams, build_hs, build_parity, commutator_norm,
                    coupling_constants, spectrum_sweep)
from .numerics import (EigenDecomposition, hermitian_eig, linear_solve, null_vector,
                       propagate)
from .sweep import SweepResult, sweep
from .weakdrive import (AmplitudeSolution, analytic_g2, analytic_intensity, closed_form_n3,
                        decay_rates,
                        effective_hamiltonian, solve_amplitudes)

__all__ = [name for name in dir() if not name.startswith("_")]
