"""Numerical ranges, radii and numerical indices of operators between finite-dimensional normed spaces."""

from .interval import Interval
from .optimize import Budget, InfeasibleError, OptimizationError
from .spaces import (Field, NoCertifiedFace, NormedSpace, absolute_sum, dual_norm, dual_of, face_sample,
                     gamma_dual, gamma_norm, lp, norm, polyhedral, predual_weighted_max_root,
                     sample_sphere, weighted_max_root)
from .operators import (Operator, adjoint, compose, diag_sum, extend_codomain_one, extend_domain_infty,
                        identity, normalize, op_norm, rank_one)
from .numrange import (RadiusEstimate, RangeCloud, aligned_pair_lower, null_direction_search,
                       range_cloud, spear_probe, v_delta, v_radius, v_radius_derivative, v_radius_spatial)
from .index import (IndexReport, abstract_index, adjoint_compare, characterization_check,
                    index_value_scan, n_index, n_index_brute_force, n_index_structural, n_index_upper)
from .lipschitz import LipschitzMap, lip_radius_lower, lip_range_sample

__all__ = [
    "Interval", "Budget", "InfeasibleError", "OptimizationError",
    "Field", "NoCertifiedFace", "NormedSpace", "absolute_sum", "dual_norm", "dual_of", "face_sample",
    "gamma_dual", "gamma_norm", "lp", "norm", "polyhedral", "predual_weighted_max_root",
    "sample_sphere", "weighted_max_root",
    "Operator", "adjoint", "compose", "diag_sum", "extend_codomain_one", "extend_domain_infty",
    "identity", "normalize", "op_norm", "rank_one",
    "RadiusEstimate", "RangeCloud", "aligned_pair_lower", "null_direction_search", "range_cloud",
    "spear_probe", "v_delta", "v_radius", "v_radius_derivative", "v_radius_spatial",
    "IndexReport", "abstract_index", "adjoint_compare", "characterization_check", "index_value_scan",
    "n_index", "n_index_brute_force", "n_index_structural", "n_index_upper",
    "LipschitzMap", "lip_radius_lower", "lip_range_sample",
]
