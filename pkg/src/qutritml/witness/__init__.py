"""Generalized-robustness witnesses: conic solver, see-saw oracle, GR frontends."""

from .gr import (
    DEFAULT_EPSILON,
    GrResult,
    SdpReport,
    edge_states_distinct,
    gr_decomposable,
    gr_eps_oew,
    solve_master,
)
from .seesaw import ProductPoint, computational_points, seesaw_max_product

__all__ = [
    "DEFAULT_EPSILON",
    "GrResult",
    "SdpReport",
    "ProductPoint",
    "computational_points",
    "edge_states_distinct",
    "gr_decomposable",
    "gr_eps_oew",
    "seesaw_max_product",
    "solve_master",
]
