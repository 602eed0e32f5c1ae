"""Index computation, canonical forms, ensemble feedback design and
open-loop synthesis for parameter-dependent linear systems."""

from .brunovsky import (BrunovskyPair, BrunovskyResult, brunovsky_pair,
                        construct_at, step1_coefficients, step2_basis,
                        step4_feedback, to_brunovsky)
from .catalog import (builtin_system, example41a, example41b, load_system,
                      oscillator_pair, save_system, system_from_dict,
                      system_to_dict)
from .design import (ConditionReport, EigenArcDesign, MultiInputDesign,
                     SingleInputDesign, TargetPair, ackermann_feedback,
                     check_conditions, eigen_arcs, eigen_arcs_grid,
                     multi_input_design, target_pair)
from .errors import (DomainError, EnsembleFeedbackError, GridMismatchError,
                     NumericalError, PreconditionError)
from .feedback import (PolyTransform, SampledTransform, TransformKind, act,
                       compose, equivalence_residual, inverse,
                       transform_from_dict, transform_to_dict)
from .indices import (ConstancyReport, IndexKind, IndexVector,
                      controllability_indices, hermite_indices, index_table,
                      indices_constant, kronecker_indices)
from .oscillator import (BernsteinPoly, BoundConstants, GainThreshold,
                         OscillatorEnsemble, SynthesisResult, bernstein,
                         degree_sweep, error_bound, h_k_inverse, h_k_map,
                         k_star, lipschitz_constants, synthesize)
from .simulate import (InputMode, InputSequence, LeastSquaresInput,
                       least_squares_input, poly_to_input,
                       propagate_continuous, propagate_discrete,
                       propagate_discrete_sum, propagate_grid, sup_error)
from .systems import (PairSamples, ParamArc, ParamGrid, PolyMatrix,
                      PolyScalar, ReachabilityReport, SystemPair, as_samples,
                      eval_pair, kalman_matrix, numerical_rank,
                      pointwise_reachable)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
