"""Maslov-type index pairs and linking saddle-point orbits of periodic
Hamiltonian systems with anisotropic growth."""

__version__ = "0.1.0"

from .symplectic import (DiagonalScaling, MatrixPath, SymplecticMatrix,
                         SymplecticPath, apply_diagonal_scaling,
                         fundamental_solution, is_symplectic, iterate_path,
                         standard_j)
from .loopspace import (FourierLoop, ScalingProfile, a_form, analyze, evaluate,
                        inner, iterate_loop, norm, project, samples,
                        scaling_operator, time_shift)
from .index import (GalerkinSpectrum, IndexPair, IndexStabilizationError,
                    check_iteration_bounds, check_positivity_lower_bound,
                    index_pair_galerkin, index_pair_iterated, maslov_index,
                    minimal_period_certificate, nullity_from_monodromy)
from .hamiltonians import (GrowthProfile, HamiltonianModel, QuadraticTerm,
                           SamplingSpec, check_h6, check_hypotheses, cutoff,
                           example_anisotropic, with_quadratic_term)
from .solver import (ActionFunctional, LinkingGeometry, SaddleResult,
                     SolveOptions, action_gradient, action_hessian_spectrum,
                     action_value, calibrate_linking, distinctness_check,
                     find_saddle, linking_seed_set, minimal_period_check,
                     solve_periodic, subharmonic_scan)
