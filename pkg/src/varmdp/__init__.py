"""Value-at-Risk solvers for finite-state MDPs.

Short horizons are handled exactly (rational arithmetic): reward
simplification, expected-value induction, exact total-reward
distributions, threshold percentiles via cumulative-reward state
augmentation, and the exact CDF Pareto front by policy enumeration.
Long horizons are estimated: the pair-state transformation preserves
transition-reward distributions, and per-policy CDFs come from a
normal-plus-correction expansion validated against a seeded Monte Carlo
oracle.
"""

from .augmented import (AugmentedMdp, VarSolution, augmented_policy_distribution,
                        build_augmented, markov_policy_to_augmented_rules,
                        solve_threshold_var)
from .edgeworth import (ChainSpectralData, EdgeworthCdf, KappaResult,
                        asymptotic_variance, check_ergodic_structure,
                        enumerate_stationary_policies, estimate_cdf, estimate_cdf_arrays,
                        mixing_truncation, pareto_front_long, policy_chain,
                        solve_poisson, spectral_data, stationary_distribution,
                        third_moment_constant)
from .errors import (BudgetExceededError, ConvergenceError, DegenerateVarianceError,
                     ErgodicityError, PreconditionError, ValidationError, VarMdpError)
from .inventory import (InventoryParams, build_inventory, paper_long, paper_short,
                        paper_short_printed)
from .mdp import (DeterministicPolicy, FiniteMdp, MarkovRewardProcess, StepCdf,
                  check_policy, evaluate_policy, exact_total_reward_distribution,
                  expected_backward_induction, induced_mrp, restrict_to_reachable,
                  simplify_reward)
from .montecarlo import EmpiricalCdf, ks_distance, simulate, sup_distance_to_empirical
from .pareto import ParetoFront, pareto_front_exact, query_eta, query_rho
from .rationals import format_rational, parse_rational
from .transform import TransformedMrp, transform, transformed_salvage

__version__ = "0.1.0"

__all__ = [
    "AugmentedMdp", "BudgetExceededError", "ChainSpectralData", "ConvergenceError",
    "DegenerateVarianceError", "DeterministicPolicy", "EdgeworthCdf", "EmpiricalCdf",
    "ErgodicityError", "FiniteMdp", "InventoryParams", "KappaResult",
    "MarkovRewardProcess", "ParetoFront", "PreconditionError", "StepCdf",
    "TransformedMrp", "ValidationError", "VarMdpError", "VarSolution",
    "asymptotic_variance", "augmented_policy_distribution", "build_augmented",
    "build_inventory", "check_ergodic_structure", "check_policy",
    "enumerate_stationary_policies", "estimate_cdf", "estimate_cdf_arrays",
    "evaluate_policy",
    "exact_total_reward_distribution", "expected_backward_induction",
    "format_rational", "induced_mrp", "ks_distance",
    "markov_policy_to_augmented_rules", "mixing_truncation", "paper_long",
    "paper_short", "paper_short_printed", "pareto_front_exact", "pareto_front_long",
    "parse_rational", "policy_chain", "query_eta", "query_rho",
    "restrict_to_reachable", "simplify_reward", "simulate", "solve_poisson",
    "solve_threshold_var", "spectral_data", "stationary_distribution",
    "sup_distance_to_empirical", "third_moment_constant", "transform",
    "transformed_salvage",
]
