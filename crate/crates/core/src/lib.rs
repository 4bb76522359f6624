//! Exact tools for the network creation game with edge ownership: costs,
//! greedy and best responses, equilibrium checks, fixture constructions, the
//! facility-location view of best responses and improving-move dynamics.

pub mod constructions;
pub mod dynamics;
pub mod equilibria;
pub mod error;
pub mod families;
pub mod graph;
pub mod io;
pub mod rational;
pub mod response;
pub mod umfl;

pub use error::{Error, Result};
pub use graph::{
    agent_cost, apply_move, apply_strategy, distance_cost, distances_from, social_cost,
    validate_strategy, Cost, GameConfig, Move, Objective, OwnershipGraph, Strategy, Vertex,
};
pub use rational::{format_fraction, frac, int, parse_fraction, Extended, Rational};
pub use response::{
    agent_ratio, approx_ratio, best_greedy_move, best_j_swap, best_k_buy, best_k_delete,
    best_multi_swap, best_response, improving_moves, AgentRatio, BestResponse, MoveEvaluation,
    RatioReport, Search,
};
pub use equilibria::{
    check, detect_badly_connected, detect_cheap_star, max_tree_is_ne, one_center, one_median,
    sum_tree_certify, Concept, Deviation, EquilibriumReport, MaxTreeVerdict, MultiSwap, Subtree,
    SumTreeVerdict, TreeAnalysis, Violation,
};
pub use constructions::{Expectation, Fixture, NonlocalKind};
pub use umfl::{
    brute_force_optimum, local_search, reduce, umfl_cost, FacilityMove, FlInstance, FlObjective,
    FlSolution, ReductionMap,
};
pub use dynamics::{run, Policy, Schedule, Step, Trajectory};
pub use io::{ExpectationFile, InstanceFile};
