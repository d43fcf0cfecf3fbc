"""Reaction-network hypergraphs, mass-action flows, and their dual geometry."""

from .convex import (
    CoshDissipation,
    KLPotential,
    QuadraticDissipation,
    QuadraticPotential,
    legendre_gap,
    log_mean,
    stable_asinh,
)
from .dynamics import (
    RateSchedule,
    Trajectory,
    energy_dissipation_balance,
    lyapunov_monitor,
    simulate,
    simulate_timedep,
)
from .exact import integer_rank, kernel_basis
from .fileio import (
    NetworkParseError,
    ScenarioConfig,
    emit_report_json,
    emit_schedule_csv,
    emit_trajectory_csv,
    load_network,
    parse_network,
    serialize_network,
)
from .geometry import (
    complex_balance_force_split,
    cycle_dual,
    effective_equilibrium_rates,
    effective_steady_rates,
    equilibrium_point,
    flux_split,
    force_split,
    pseudo_hilbert_split,
    pythagoras_gap,
    velocity_dual,
)
from .kinetics import (
    ConvergenceError,
    EdgePair,
    KineticSplit,
    classify_state,
    entropy_production,
    find_steady_state,
    mass_action_flux,
    mass_action_force_activity,
    net_flux_raw,
    pseudo_entropy_production,
    wegscheider_check,
)
from .network import (
    ReactionNetwork,
    build_network,
    graph_laplacian,
    network_from_reactions,
    networks_equal,
)

__version__ = "0.1.0"

__all__ = [
    "CoshDissipation",
    "KLPotential",
    "QuadraticDissipation",
    "QuadraticPotential",
    "legendre_gap",
    "log_mean",
    "stable_asinh",
    "RateSchedule",
    "Trajectory",
    "energy_dissipation_balance",
    "lyapunov_monitor",
    "simulate",
    "simulate_timedep",
    "integer_rank",
    "kernel_basis",
    "NetworkParseError",
    "ScenarioConfig",
    "emit_report_json",
    "emit_schedule_csv",
    "emit_trajectory_csv",
    "load_network",
    "parse_network",
    "serialize_network",
    "complex_balance_force_split",
    "cycle_dual",
    "effective_equilibrium_rates",
    "effective_steady_rates",
    "equilibrium_point",
    "flux_split",
    "force_split",
    "pseudo_hilbert_split",
    "pythagoras_gap",
    "velocity_dual",
    "ConvergenceError",
    "EdgePair",
    "KineticSplit",
    "classify_state",
    "entropy_production",
    "find_steady_state",
    "mass_action_flux",
    "mass_action_force_activity",
    "net_flux_raw",
    "pseudo_entropy_production",
    "wegscheider_check",
    "ReactionNetwork",
    "build_network",
    "graph_laplacian",
    "network_from_reactions",
    "networks_equal",
]
