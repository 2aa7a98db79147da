"""Reference backend: per-cluster Lindblad evolution with shot sampling."""
from .backend import (ClusterCapError, CountsRecord, OutcomeDistribution,
                      apply_collision_channel, collision_events, exact_group_fidelity,
                      outcome_distribution, partition_into_clusters, qubit_roles, run_circuit,
                      sample_counts, simulate_cluster)
from .lindblad import (ClusterState, CollapseOp, SimulationError, apply_gate,
                       build_zz_hamiltonian, closed_form_plus_fidelity, collapse_ops,
                       evolve_delay, heating_adjusted_t1, lindblad_rhs, liouvillian)

__all__ = [
    "ClusterCapError", "ClusterState", "CollapseOp", "CountsRecord", "OutcomeDistribution",
    "SimulationError", "apply_collision_channel", "apply_gate", "build_zz_hamiltonian",
    "closed_form_plus_fidelity", "collapse_ops", "collision_events", "evolve_delay",
    "exact_group_fidelity", "heating_adjusted_t1", "lindblad_rhs", "liouvillian",
    "outcome_distribution", "partition_into_clusters", "qubit_roles", "run_circuit",
    "sample_counts", "simulate_cluster",
]
