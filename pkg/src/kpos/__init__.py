"""k-positive maps, completely bounded norms and the cones between them."""

from .bounds import d_k_bounds, r_k_exact, table, tomiyama_cb
from .cones import (ConeVerdict, Method, SeeSawConfig, Verdict, covariant_kpeb_contains,
                    covariant_kpos_contains, is_k_peb, is_k_positive, schmidt_rank,
                    schmidt_witness_search)
from .errors import (DomainError, KposError, NumericalError, ParameterError, SamplingError,
                     ShapeError, SizeError, SolverError)
from .maps import (CovariantMap, SuperOp, adjoint, apply, compose, covariant, identity_map,
                   is_trace_preserving, is_unital, project_covariant, tomiyama, transpose_map)
from .norms import cb_norm, dec_norm_covariant, diamond_norm, omin_norm_estimate, rk_via_lp
from .randgen import empirical_d_lower, gue, mean_width_trace_ball, random_k_positive_tp_map
from .solver import (LinearProgram, SemidefiniteProgram, SolverOptions, Status, lp_solve,
                     sdp_solve)

__version__ = "0.1.0"
