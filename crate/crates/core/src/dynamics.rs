//! Sequential greedy play: agents take their best single move until nobody
//! has one left or the round budget runs out.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{
    agent_cost, apply_move, social_cost, Cost, GameConfig, Move, OwnershipGraph, Vertex,
};
use crate::rational::Extended;
use crate::response::{best_greedy_move, MoveEvaluation};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum Policy {
    /// Agents in id order every round.
    RoundRobin,
    /// A fresh seeded permutation of the agents every round.
    Random { seed: u64 },
    /// One move per round, by the agent with the largest improvement (ties
    /// to the smallest id).
    MaxGain,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub policy: Policy,
    pub max_rounds: usize,
}

impl Schedule {
    pub fn new(policy: Policy, max_rounds: usize) -> Result<Self> {
        if max_rounds == 0 {
            return Err(Error::ParameterDomain("max_rounds must be at least 1".into()));
        }
        Ok(Schedule { policy, max_rounds })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub round: usize,
    pub agent: Vertex,
    #[serde(rename = "move")]
    pub mv: Move,
    pub cost_before: Cost,
    pub cost_after: Cost,
    /// Sum of all agents' costs after the move.
    pub social_cost: Extended,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trajectory {
    pub initial_social_cost: Extended,
    pub steps: Vec<Step>,
    pub terminal: OwnershipGraph,
    /// True when the last round found no improving move.
    pub converged: bool,
    pub rounds: usize,
}

/// Runs greedy dynamics from `g0`. Non-convergence within `max_rounds` is
/// reported in the trajectory, not as an error.
pub fn run(g0: &OwnershipGraph, cfg: &GameConfig, schedule: &Schedule) -> Trajectory {
    run_with(g0, cfg, schedule, |_, _| {})
}

/// Like [`run`], calling `observe` with every step and the graph it produced.
pub fn run_with(
    g0: &OwnershipGraph,
    cfg: &GameConfig,
    schedule: &Schedule,
    mut observe: impl FnMut(&Step, &OwnershipGraph),
) -> Trajectory {
    let n = g0.n();
    let mut g = g0.clone();
    let mut steps = Vec::new();
    let mut rng = match schedule.policy {
        Policy::Random { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
        _ => None,
    };
    let mut converged = false;
    let mut rounds = 0;
    while rounds < schedule.max_rounds {
        rounds += 1;
        let mut moved = false;
        let mut take = |g: &mut OwnershipGraph, v: Vertex, m: MoveEvaluation, steps: &mut Vec<Step>| {
            let before = agent_cost(g, cfg, v);
            *g = apply_move(g, v, m.mv).expect("engine moves are valid");
            let step = Step {
                round: rounds,
                agent: v,
                mv: m.mv,
                cost_before: before,
                cost_after: m.new_cost,
                social_cost: social_cost(g, cfg),
            };
            observe(&step, g);
            steps.push(step);
        };
        match schedule.policy {
            Policy::MaxGain => {
                let mut best: Option<(Vertex, MoveEvaluation)> = None;
                for v in 0..n {
                    if let Some(m) = best_greedy_move(&g, cfg, v) {
                        if best.as_ref().is_none_or(|(_, b)| m.improvement > b.improvement) {
                            best = Some((v, m));
                        }
                    }
                }
                if let Some((v, m)) = best {
                    take(&mut g, v, m, &mut steps);
                    moved = true;
                }
            }
            _ => {
                let mut order: Vec<Vertex> = (0..n).collect();
                if let Some(rng) = rng.as_mut() {
                    order.shuffle(rng);
                }
                for v in order {
                    if let Some(m) = best_greedy_move(&g, cfg, v) {
                        take(&mut g, v, m, &mut steps);
                        moved = true;
                    }
                }
            }
        }
        if !moved {
            converged = true;
            break;
        }
    }
    Trajectory {
        initial_social_cost: social_cost(g0, cfg),
        steps,
        terminal: g,
        converged,
        rounds,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria::{check, Concept};
    use crate::rational::{frac, int};
    use crate::response::Search;

    fn cycle5() -> OwnershipGraph {
        OwnershipGraph::new(5, (0..5).map(|i| (i, (i + 1) % 5))).unwrap()
    }

    #[test]
    fn equilibrium_start_is_a_fixed_point() {
        let t = run(&cycle5(), &GameConfig::sum(int(2)).unwrap(), &Schedule::new(Policy::RoundRobin, 10).unwrap());
        assert!(t.converged);
        assert!(t.steps.is_empty());
        assert_eq!(t.rounds, 1);
        assert_eq!(t.terminal, cycle5());
    }

    #[test]
    fn expensive_edges_get_deleted() {
        let cfg = GameConfig::sum(int(5)).unwrap();
        let t = run(&cycle5(), &cfg, &Schedule::new(Policy::RoundRobin, 50).unwrap());
        assert!(matches!(t.steps[0].mv, Move::Delete { .. }));
        assert!(t.converged);
        assert!(check(&t.terminal, &cfg, Concept::Ge, &Search::default()).unwrap().holds);
    }

    #[test]
    fn max_path_leaf_closes_the_triangle() {
        let g = OwnershipGraph::new(3, [(0, 1), (1, 2)]).unwrap();
        let cfg = GameConfig::max(frac(1, 4)).unwrap();
        let t = run(&g, &cfg, &Schedule::new(Policy::RoundRobin, 10).unwrap());
        assert_eq!(t.steps.len(), 1);
        assert_eq!((t.steps[0].agent, t.steps[0].mv), (0, Move::Buy { target: 2 }));
        assert_eq!(t.terminal.edge_count(), 3);
        assert!(t.converged);
    }

    #[test]
    fn runs_are_reproducible() {
        let g = OwnershipGraph::new(7, (0..6).map(|i| (i, i + 1))).unwrap();
        let cfg = GameConfig::sum(frac(3, 2)).unwrap();
        for policy in [Policy::RoundRobin, Policy::Random { seed: 7 }, Policy::MaxGain] {
            let s = Schedule::new(policy, 40).unwrap();
            let a = run(&g, &cfg, &s);
            assert_eq!(a, run(&g, &cfg, &s));
            for st in &a.steps {
                assert!(st.cost_after.total < st.cost_before.total);
            }
        }
        assert!(Schedule::new(Policy::MaxGain, 0).is_err());
    }
}
