"""Exit and occupation-time transforms for an Ornstein-Uhlenbeck process driven
by a double-exponential jump diffusion."""

from .errors import DegenerateSystemError, DomainError, QuadratureError
from .exit import (
    ExitTransform,
    diffusion_two_sided_exit,
    downward_exit,
    downward_exit_ratio,
    exit_functional_down,
    exit_functional_up,
    smooth_pasting_ratios,
    upward_exit,
)
from .model import HatCoordinate, ModelParams, jump_density, levy_exponent, log_mgf_xt, stationary_log_mgf
from .occupation import OccupationQuery, OccupationSolution, solve_occupation, t_eta, t_theta, v1, v1_prime, v_curve, v_eval
from .psi import contour_C, contour_D, contour_F, contour_F_prime, psi_mod, psi_table
from .quad import IntegralResult, QuadConfig

__version__ = "0.1.0"
