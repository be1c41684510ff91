"""One-dimensional single-well phase-field energies and their sharp limits.

Evaluates and minimizes single-well Modica-Mortola energies with point
penalties and the Kobayashi-Warren-Carter energy, unfolds function
graphs by arc length, compares graphs of minimizer families against
set-valued limit objects in the Hausdorff metric, evaluates the limit
energies those families attain, and builds recovery families attaining
them.
"""

from .errors import ConfigError, ConvergenceError, ResolutionError, VerificationError
from .potential import ConditionReport, Potential, check_conditions, eval_F, eval_G
from .fields import (Domain1D, EnergyReport, Field, Mesh, PointPenalty,
                     energy_kwc, energy_smm, energy_smm_b, trapezoid, weighted_tv)
from .minimize import (SolveOptions, closed_form_minimizer, minimize_kwc_alternating,
                       minimize_smm_b_general, minimize_smm_b_quadratic,
                       prox_weighted_tv, smm_b_gradient)
from .unfold import (Bump, RhoDecomposition, UnfoldedCurve,
                     pointwise_semilimits_from_unfolding, relaxed_limits,
                     rho_decomposition, unfold, xbar_cauchy_gap)
from .setvalued import (ExceptionalPoint, GraphSet, SetValuedLimit, graph_distance,
                        graph_of_field, graph_of_limit, hausdorff)
from .limits import (JumpFunction, limit_energy_kwc, limit_energy_smm,
                     limit_energy_smm_b, limit_pointwise_minimizer)
from .recovery import (CutoffProfile, LimsupRow, Profile, build_recovery, cutoff,
                       plan_recovery, profile, verify_limsup, write_limsup_csv)

__version__ = "0.1.0"
