"""Cascade reconstruction by random Steiner-tree sampling."""

__version__ = "0.1.0"

from .graph import (GraphError, MarkovChain, ProbGraph, Tree, build_chain, load_graph,
                    restrict_graph, serialize_graph, target_log_probability, tree_log_weight)
from .sampling import (cycle_popping_steiner, lerw_steiner, random_successor, random_tree_with_root,
                       sample_trees, trim_steiner, trim_tree)
from .bias import (attach_lerw_weights, attach_target_weights, attach_trim_weights, contract, laplacian_minor_logdet,
                   sir_resample, trim_bias)
from .cascade import Cascade, Observation, observe, simulate_ic, simulate_si
from .inference import MarginalEstimate, ReconConfig, estimate_marginals, reconstruct
from .evaluation import average_precision, min_steiner_tree, pagerank_baseline, run_experiment

__all__ = [
    "GraphError", "MarkovChain", "ProbGraph", "Tree", "build_chain", "load_graph", "restrict_graph",
    "serialize_graph", "target_log_probability", "tree_log_weight",
    "cycle_popping_steiner", "lerw_steiner", "random_successor", "random_tree_with_root",
    "sample_trees", "trim_steiner", "trim_tree",
    "attach_lerw_weights", "attach_target_weights", "attach_trim_weights", "contract",
    "laplacian_minor_logdet", "sir_resample", "trim_bias",
    "Cascade", "Observation", "observe", "simulate_ic", "simulate_si",
    "MarginalEstimate", "ReconConfig", "estimate_marginals", "reconstruct",
    "average_precision", "min_steiner_tree", "pagerank_baseline", "run_experiment",
]
