"""Bounds on the strong converse exponent of classical soft covering."""

from .achievability import AchievabilityResult, ea_curve, ea_primal_oracle, ea_renyi, gibbs_min, tilted_inner_min
from .converse import BalancedSolution, ConverseInstance, balance_s, ec_curve, inner_min_in, inner_min_out
from .curve import ExponentCurve, rate_grid
from .feasible import FeasiblePolytope, Infeasible, build, minimize_over
from .method_of_types import TypeHistogram, ea_finite, ec_finite, enumerate_types, type_class_size
from .prob import (Channel, JointPmf, Pmf, backward_of, bsc, cond_entropy, cond_kl, entropy,
                   info_density, joint_of, kl, mutual_info, push_forward, renyi_mi)
from .simulation import Code, SimReport, binomial_bound_check, empirical_exponent, induced_output_tv, sample_code

__version__ = "0.1.0"
