"""Log-concave functions, convex bodies, affine surface areas and f-divergences.

Evaluation and verification toolkit: Legendre transforms, L_lambda / L_p
affine surface areas, divergence integrals, the inequalities between them
and the Monge-Ampere equality case, in dimensions 1 to 3.
"""
from .bodies import (Ellipsoid, PBall, PerturbedSphere, body_affine_surface_area, body_f_divergence,
                     body_f_divergence_upper_term, body_from_json, boundary_sample, bridge_check,
                     check_body_corollaries, check_body_dragomir, check_body_pinsker, polar_volume, volume)
from .convex import (GaugeSquare, GridFunction, LinearImage, PowerSum, Quadratic, Tabulated,
                     differentials, discrete_legendre_1d, evaluate, gaussian, grid_legendre, legendre,
                     polar_log_concave, spec_from_json, translate)
from .divergence import (affine_surface_area, check_affine_chain, check_divergence_bound, check_dragomir,
                         check_kl_bounds, check_log_sobolev_chain, check_pinsker, check_santalo_family,
                         f_divergence, kl_divergence, normalized_f_divergence, total_variation_term)
from .errors import *  # noqa: F401,F403
from .generators import DivergenceGenerator, check_gilardoni_condition
from .inequality import EQUALITY, FAIL, PASS, SKIPPED, InequalityReport
from .measures import QuadratureSpec, entropy, mass, weighted_integral
from .monge_ampere import ma_residual, pushforward_check, solve_ma_1d, uniqueness_probe

__version__ = "0.1.0"
