"""Coherently controlled adiabatic evolutions: dual paths whose first-order
diabatic errors cancel under a weighted combination of evolutions."""

from .combiner import (Branch, CombinationPlan, GadgetOutcome, combine, cost, predict_combined,
                       predict_first_order, predict_first_order_bc)
from .hamiltonians import CustomTable, LinearInterp, Search, SinBridge
from .harness import ExperimentConfig, load_config, run_sweep
from .paths import (bc_dual, complete_antisym_dual, lae_path, linear, partial_antisym_dual, smoothstep,
                    time_reversed, validate)
from .propagation import IntegratorOptions, evolve, ground_overlap_error, ground_state, reference_evolve
from .querycost import CostParams, lambda_smooth, oracle_cost_C, query_bound, z_iterations
from .schemes import (four_unitary_scheme, solve_complete, solve_partial, symmetric_all,
                      three_level_times)
from .spectral import coupling, gap_integral, track

__version__ = "0.1.0"
