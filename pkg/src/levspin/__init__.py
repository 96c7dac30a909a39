"""Spin-1 NV center coupled to the COM mode of a levitated nanodiamond.

Exact factorized propagation of the gravity-sagged trap model, phase
extraction for spin interferometry, entanglement diagnostics, and the
verification battery for the model's closed-form claims.
"""

from ._kernels import BACKEND
from .errors import (PhaseUndefinedError, TruncationError, TruncationWarning,
                     UnsupportedStateError, ValidationError)
from .fockspace import (DEFAULT_SPIN_WEIGHTS, SPINS, CoherentTerm, FockVector,
                        OperatorMatrix, SpinSectorState, basis_vector,
                        coherent_vector, initial_state, ladder_matrices,
                        sample_thermal_labels, superpose)
from .observables import (EntanglementReport, PhaseReport, SectorPositions,
                          SpinDensity, entanglement, phase_extract, reduce_spin,
                          sector_positions, state_fidelity, wrap_phase)
from .params import (DerivedScales, DimensionlessParams, PhaseFormulas,
                     PhysicalParams, cancellation_field, cancellation_offset,
                     derive_scales, eval_eta, eval_phi, load_config,
                     nondimensionalize, phase_formulas, with_cancellation)
from .propagators import (PropagationResult, SectorHamiltonian,
                          commutator_check, evolve_analytic, evolve_oracle,
                          evolve_unshifted_oracle, sector_hamiltonian,
                          to_unshifted_frame)
from .experiments import (InitialSpec, ProtocolConfig, SweepTable, TimeSeries,
                          VerdictRecord, coherent, default_config, fock,
                          run_protocol, run_thermal, sweep, thermal, vacuum,
                          verify_comment)

__version__ = "0.1.0"
