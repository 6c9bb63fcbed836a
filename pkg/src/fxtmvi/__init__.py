"""Fixed-time convergent proximal flows for mixed variational inequalities."""
from .applications import (CompositeProblem, MinimaxProblem, check_cop_optimality,
                           check_saddle_value, cop_to_mvi, minimax_to_mvi, mvi_saddle)
from .certificates import (SettlingCertificate, lambda_cap, robust_feasibility,
                           settling_bound_const, settling_bound_robust, settling_bound_tv,
                           theta_constants, xi)
from .config import ConfigError, ExperimentConfig, load_config, parse_config
from .dynamics import (DisturbanceSpec, GainSchedule, forward_backward_map, make_field,
                       residual, rhs_tvpnm)
from .harness import RunReport, emit_plot_script, run_config, run_example1
from .integrator import IntegratorConfig, Trajectory, integrate, read_csv, write_csv
from .oracle import contraction_audit, forward_backward_solve
from .presets import PRESETS, get_preset
from .problem import MviProblem, assess
from .prox import L1, Ball, Box, NonNeg, Product, Zero, prox_apply

__all__ = [name for name in dir() if not name.startswith("_")]
