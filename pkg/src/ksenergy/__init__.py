"""Korevaar-Schoen p-energies of metric-space-valued maps.

Two independent routes to the same number: the limiting ball-average
construction (``ks_energy``) and the directional-derivative representation
(``rep_energies``), plus the quadrature, dense-anchor, and oracle machinery
they share.
"""

from .config import EnergyConfig, EnergyReport
from .directional import (
    DirectionalField,
    check_increment_bound,
    directional_derivative,
    directional_field,
    directional_vector,
    frame_sum_energy,
    minimal_gradient,
    rep_energies,
    rep_energy_ball,
    rep_energy_sphere,
)
from .grid import DomainGrid, build_grid
from .ks import approx_density, density_limit, ks_energy
from .maps import ComposedField, MetricMap, compose_distance, fd_gradient, make_map
from .oracles import linear_euclidean_density, maxnorm_counterexample_constants
from .pipeline import Problem, run_compare, run_convergence, run_counterexample, run_ks, run_oracle, run_rep
from .quadrature import (
    QuadratureRule,
    ball_nodes,
    energy_normalization,
    extrapolate,
    sphere_nodes,
    unit_ball_volume,
)
from .spaces import MetricSpace, make_space, verify_metric_axioms

__version__ = "0.1.0"

__all__ = [
    "ComposedField",
    "DirectionalField",
    "DomainGrid",
    "EnergyConfig",
    "EnergyReport",
    "MetricMap",
    "MetricSpace",
    "Problem",
    "QuadratureRule",
    "approx_density",
    "ball_nodes",
    "build_grid",
    "check_increment_bound",
    "compose_distance",
    "density_limit",
    "directional_derivative",
    "directional_field",
    "directional_vector",
    "energy_normalization",
    "extrapolate",
    "fd_gradient",
    "frame_sum_energy",
    "ks_energy",
    "linear_euclidean_density",
    "make_map",
    "make_space",
    "maxnorm_counterexample_constants",
    "minimal_gradient",
    "rep_energies",
    "rep_energy_ball",
    "rep_energy_sphere",
    "run_compare",
    "run_convergence",
    "run_counterexample",
    "run_ks",
    "run_oracle",
    "run_rep",
    "sphere_nodes",
    "unit_ball_volume",
    "verify_metric_axioms",
]
