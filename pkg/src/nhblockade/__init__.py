"""Photon blockade in a driven two-mode resonator with nonreciprocal coupling."""

from .analytics import (
    ConditionSolution,
    WeakDriveAmplitudes,
    cpb_at_ep,
    cpb_non_ep,
    find_eps,
    g2_analytic,
    pathway_report,
    upb_conditions,
    weak_drive_amplitudes,
)
from .hilbert import FockLayout, Operator, create, destroy, identity, number
from .liouville import (
    DensityMatrix,
    SteadyStateReport,
    evolve_to_steady,
    master_rhs,
    steady_by_eigen,
    steady_state,
    validate_full_vs_effective,
)
from .model import ModelParams, effective_hamiltonian, scattering_rates, total_hamiltonian
from .observables import (
    g2_zero,
    mean_occupation,
    photon_distribution,
    probability_trace,
    splitting_scan,
    subspace_spectrum,
)

__version__ = "0.1.0"
