"""Capacity-constrained influence maximization toolkit."""

__version__ = "0.1.0"

from .diffusion import SpreadEstimate, mc_spread, simulate_once
from .graphs import (Graph, Instance, SeedAssignment, build_instance,
                     load_edge_list, select_random_aps)
from .opim import BoundReport, OpimParams
from .opim import run as opim_run
from .oracle import (CurvatureResult, ExactEvaluator, OracleBudget,
                     curvature_gamma_max, exact_optimum, exact_spread)
from .rrsets import RRCollection, RRSet, sample_rr_set
from .selectors import (CoverageGainOracle, ExactGainOracle, McGainOracle,
                        local_topk, mg_greedy, pagerank, rr_greedy)

__all__ = [
    "BoundReport", "CoverageGainOracle", "CurvatureResult", "ExactEvaluator",
    "ExactGainOracle", "Graph", "Instance", "McGainOracle", "OpimParams",
    "OracleBudget", "RRCollection", "RRSet", "SeedAssignment",
    "SpreadEstimate", "build_instance", "curvature_gamma_max", "exact_optimum",
    "exact_spread", "load_edge_list", "local_topk", "mc_spread", "mg_greedy",
    "opim_run", "pagerank", "rr_greedy", "sample_rr_set", "select_random_aps",
    "simulate_once",
]
