"""greenlab: a numerical laboratory for Green's functions, unitary-link
gauge operators and hydrogen-type stability bounds on discretized
3-manifolds."""

from .errors import (ConvergenceError, GreenlabError, HermiticityError,
                     InvalidSpecError, UnsupportedConfigError)
from .geometry import (DiscreteManifold, Kind, MetricSpec, VolumeGrowthReport,
                       WarpProfile, build_manifold, distance_field,
                       geodesic_distance, load_manifold, save_manifold,
                       volume_growth_ratio)
from .spectral import (SparseHermitianOperator, apply_semigroup, dump_operator,
                       dump_vector, load_operator, load_vector,
                       smallest_eigenpairs, solve_spd)
from .bundles import (CliffordStructure, ConnectionData, PotentialField,
                      assemble_bochner, assemble_dirac, assemble_laplace_beltrami,
                      assemble_pauli, connection_from_potential, curl_of_potential,
                      edge_energy, gauge_transform, identity_connection,
                      kato_inequality_check, lichnerowicz_residual,
                      plaquette_holonomies, random_fourier_potential,
                      self_energy, smooth_scalar_field, smooth_spinor_field)
from .heatgreen import (GaussianBoundFit, GreenParams, GreensField, HeatColumn,
                        KatoValue, TruncationCorrection, chapman_kolmogorov_residual,
                        delta_vector, fit_gaussian_bound, green_decay_constant,
                        green_via_heat, green_via_solve, heat_column,
                        kato_class_constant, kato_sweep, near_field_ratio_field,
                        stencil_green_ratios)
from .stability import (EnergyRow, HamiltonianSpec, SobolevEstimate,
                        StabilityCertificate, assemble_hamiltonian,
                        certify_magnetic, certify_scalar, certify_spin,
                        ground_state_energy, quadratic_form, smoothing_check,
                        sobolev_constant, trusted_kappa_window)

__version__ = "0.1.0"
