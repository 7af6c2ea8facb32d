"""Condensed-graph trajectory learning for UAV aerial base stations.

Pipeline: drop users and candidate waypoints on a service area, condense the
candidates to M waypoint centroids (simulated annealing with jump proposals,
k-means, or an SNR-proxy greedy picker), connect the centroids into a motion
graph, then let each UAV learn a waypoint policy with tabular Q-learning
against a priority-weighted uplink outage penalty.
"""

from .scenario import ScenarioConfig, ConfigError, load_config, rng_stream
from .condense import qa_condense, kmeans_condense, snrp_condense, CondensedGraph
from .sim import train, evaluate_policy, sweep_mu, compare_methods

__version__ = "0.1.0"

__all__ = [
    "ScenarioConfig",
    "ConfigError",
    "load_config",
    "rng_stream",
    "qa_condense",
    "kmeans_condense",
    "snrp_condense",
    "CondensedGraph",
    "train",
    "evaluate_policy",
    "sweep_mu",
    "compare_methods",
    "__version__",
]
