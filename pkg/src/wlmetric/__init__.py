"""Weisfeiler-Lehman distance between labeled Markov chains.

The core entry points are :func:`wl_distance` and :func:`wllb_distance` on
:class:`Lmmc` objects; graphs become chains through :func:`graph_to_lmmc`.
"""
from .core import Lmmc, lmmc_from_kernel, stationary_of, validate_lmmc
from .graphs import (
    LabeledGraph,
    graph_to_lmmc,
    make_graph,
    relabel,
    wl_test,
    wwl_hat_distance,
    wwl_labels,
)
from .gw import Mcms, diameter, diameter_lb, distortion_k, eccentricity, tlb_lower_bound, validate_mcms
from .mcnn import LipschitzMap, McnnSpec, apply_F, mcnn_forward, q_phi
from .transport import lp_vertex_oracle, ot_solve, wasserstein_1d
from .wl import (
    cost_matrix_depth0,
    kstep_kernel,
    lift_cost,
    wl_distance,
    wl_distance_profile,
    wl_distance_sup,
    wllb_distance,
)

__version__ = "0.1.0"

__all__ = [
    "LabeledGraph",
    "LipschitzMap",
    "Lmmc",
    "Mcms",
    "McnnSpec",
    "apply_F",
    "cost_matrix_depth0",
    "diameter",
    "diameter_lb",
    "distortion_k",
    "eccentricity",
    "graph_to_lmmc",
    "kstep_kernel",
    "lift_cost",
    "lmmc_from_kernel",
    "lp_vertex_oracle",
    "make_graph",
    "mcnn_forward",
    "ot_solve",
    "q_phi",
    "relabel",
    "stationary_of",
    "tlb_lower_bound",
    "validate_lmmc",
    "validate_mcms",
    "wasserstein_1d",
    "wl_distance",
    "wl_distance_profile",
    "wl_distance_sup",
    "wl_test",
    "wllb_distance",
    "wwl_hat_distance",
    "wwl_labels",
]
