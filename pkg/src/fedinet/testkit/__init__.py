"""Synthetic generators and brute-force oracles for testing the analysis code."""

from .generators import (GeneratorSpec, FederatedSim, PlantedGraph, federated_sim, gen_graph,
                         generate, geometric_sample, gnm_directed, gnp_directed,
                         lognormal_sample, planted_partition, poisson_sample, powerlaw_sample,
                         rng_for)
from .oracles import oracle

__all__ = [
    "GeneratorSpec", "FederatedSim", "PlantedGraph", "federated_sim", "gen_graph", "generate",
    "geometric_sample", "gnm_directed", "gnp_directed", "lognormal_sample", "oracle",
    "planted_partition", "poisson_sample", "powerlaw_sample", "rng_for",
]
