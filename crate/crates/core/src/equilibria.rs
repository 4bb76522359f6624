//! Equilibrium checkers and the tree-specific deciders.

use std::collections::VecDeque;
use std::fmt;

use num_traits::One;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{
    agent_cost, apply_move, apply_strategy, distance_cost, Cost, GameConfig, Move, Objective,
    OwnershipGraph, Strategy, Vertex,
};
use crate::rational::{int, Extended};
use crate::response::{best_greedy_move, best_response, Search};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Concept {
    /// Greedy equilibrium: no single buy, delete or swap of an own edge helps.
    Ge,
    /// Nash equilibrium: no strategy change helps.
    Ne,
    /// Swap equilibrium: distance cost only, swaps of any incident edge.
    Se,
    /// Asymmetric swap equilibrium: distance cost only, swaps of own edges.
    Ase,
}

impl Concept {
    pub const ALL: [Concept; 4] = [Concept::Ge, Concept::Ne, Concept::Se, Concept::Ase];

    /// Whether the concept ignores edge costs.
    pub fn distance_only(self) -> bool {
        matches!(self, Concept::Se | Concept::Ase)
    }
}

impl fmt::Display for Concept {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Concept::Ge => "GE",
            Concept::Ne => "NE",
            Concept::Se => "SE",
            Concept::Ase => "ASE",
        })
    }
}

impl std::str::FromStr for Concept {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ge" => Ok(Concept::Ge),
            "ne" => Ok(Concept::Ne),
            "se" => Ok(Concept::Se),
            "ase" => Ok(Concept::Ase),
            _ => Err(Error::ParameterDomain(format!("unknown concept {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Deviation {
    Move(Move),
    Strategy(Strategy),
}

impl fmt::Display for Deviation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Deviation::Move(m) => write!(f, "{m}"),
            Deviation::Strategy(s) => write!(f, "strategy {:?}", s.targets),
        }
    }
}

/// An agent's strictly improving deviation. Costs are measured with the cost
/// function of the concept that produced it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub agent: Vertex,
    pub deviation: Deviation,
    pub old_cost: Extended,
    pub new_cost: Extended,
    pub improvement: Extended,
}

impl Violation {
    fn new(agent: Vertex, deviation: Deviation, old_cost: Extended, new_cost: Extended) -> Self {
        let improvement = old_cost
            .checked_sub(&new_cost)
            .expect("an improving deviation has a finite new cost");
        Violation {
            agent,
            deviation,
            old_cost,
            new_cost,
            improvement,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquilibriumReport {
    pub concept: Concept,
    pub holds: bool,
    /// At most one violation per agent, in agent order.
    pub violations: Vec<Violation>,
}

/// Checks `concept` for every agent.
///
/// Each violating agent contributes one violation: for GE her best greedy
/// move, for NE her best response, for SE and ASE her best single swap.
pub fn check(
    g: &OwnershipGraph,
    cfg: &GameConfig,
    concept: Concept,
    search: &Search,
) -> Result<EquilibriumReport> {
    let per_agent = (0..g.n())
        .into_par_iter()
        .map(|v| agent_violation(g, cfg, concept, v, search))
        .collect::<Result<Vec<_>>>()?;
    let violations: Vec<Violation> = per_agent.into_iter().flatten().collect();
    Ok(EquilibriumReport {
        concept,
        holds: violations.is_empty(),
        violations,
    })
}

/// The violation reported for a single agent, if any.
pub fn agent_violation(
    g: &OwnershipGraph,
    cfg: &GameConfig,
    concept: Concept,
    v: Vertex,
    search: &Search,
) -> Result<Option<Violation>> {
    Ok(match concept {
        Concept::Ge => {
            let old = agent_cost(g, cfg, v).total;
            best_greedy_move(g, cfg, v)
                .map(|m| Violation::new(v, Deviation::Move(m.mv), old, m.new_cost.total))
        }
        Concept::Ne => {
            let old = agent_cost(g, cfg, v).total;
            let br = best_response(g, cfg, v, search)?;
            (br.cost.total < old)
                .then(|| Violation::new(v, Deviation::Strategy(br.strategy), old, br.cost.total))
        }
        Concept::Se | Concept::Ase => best_swap(g, cfg.objective, concept, v),
    })
}

fn swap_targets(g: &OwnershipGraph, concept: Concept, v: Vertex) -> Vec<Vertex> {
    match concept {
        Concept::Ase => g.owned(v).to_vec(),
        _ => g.neighbors(v).to_vec(),
    }
}

fn best_swap(g: &OwnershipGraph, objective: Objective, concept: Concept, v: Vertex) -> Option<Violation> {
    let old = Extended::from(distance_cost(g, objective, v));
    let mut best: Option<Violation> = None;
    for a in swap_targets(g, concept, v) {
        for b in 0..g.n() {
            if b == v || g.adjacent(v, b) {
                continue;
            }
            let h = g
                .swap_incident_edge(v, a, b)
                .expect("swap endpoints were checked");
            let new = Extended::from(distance_cost(&h, objective, v));
            if new < old && best.as_ref().is_none_or(|x| new < x.new_cost) {
                best = Some(Violation::new(
                    v,
                    Deviation::Move(Move::Swap { old: a, new: b }),
                    old,
                    new,
                ));
            }
        }
    }
    best
}

/// Cost of `v` under the concept's cost function.
pub fn concept_cost(g: &OwnershipGraph, cfg: &GameConfig, concept: Concept, v: Vertex) -> Extended {
    if concept.distance_only() {
        distance_cost(g, cfg.objective, v).into()
    } else {
        agent_cost(g, cfg, v).total
    }
}

/// Applies a violation and confirms that it yields exactly the recorded,
/// strictly lower cost.
pub fn revalidate(
    g: &OwnershipGraph,
    cfg: &GameConfig,
    concept: Concept,
    violation: &Violation,
) -> Result<bool> {
    let v = violation.agent;
    let h = match (&violation.deviation, concept) {
        (Deviation::Move(Move::Swap { old, new }), Concept::Se) => {
            g.swap_incident_edge(v, *old, *new)?
        }
        (Deviation::Move(m), _) => apply_move(g, v, *m)?,
        (Deviation::Strategy(s), _) => apply_strategy(g, s)?,
    };
    let old = concept_cost(g, cfg, concept, v);
    let new = concept_cost(&h, cfg, concept, v);
    Ok(old == violation.old_cost && new == violation.new_cost && new < old)
}

/// The part of a tree considered by the median and center routines.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subtree {
    Whole,
    /// The component containing `root` once the edge to `parent` is removed.
    Hanging { root: Vertex, parent: Vertex },
}

fn members(t: &OwnershipGraph, sub: Subtree) -> Vec<bool> {
    match sub {
        Subtree::Whole => vec![true; t.n()],
        Subtree::Hanging { root, parent } => {
            let mut inside = vec![false; t.n()];
            inside[root] = true;
            let mut queue = VecDeque::from([root]);
            while let Some(x) = queue.pop_front() {
                for &y in t.neighbors(x) {
                    if y != parent && !inside[y] {
                        inside[y] = true;
                        queue.push_back(y);
                    }
                }
            }
            inside
        }
    }
}

/// BFS restricted to `inside`; returns distances and BFS parents.
fn bfs_within(t: &OwnershipGraph, inside: &[bool], src: Vertex) -> (Vec<Option<u32>>, Vec<Vertex>) {
    let mut dist = vec![None; t.n()];
    let mut parent = vec![src; t.n()];
    dist[src] = Some(0);
    let mut queue = VecDeque::from([src]);
    while let Some(x) = queue.pop_front() {
        let d = dist[x].unwrap();
        for &y in t.neighbors(x) {
            if inside[y] && dist[y].is_none() {
                dist[y] = Some(d + 1);
                parent[y] = x;
                queue.push_back(y);
            }
        }
    }
    (dist, parent)
}

fn farthest(dist: &[Option<u32>]) -> (Vertex, u32) {
    let mut best = (0, 0);
    let mut found = false;
    for (w, d) in dist.iter().enumerate() {
        if let Some(d) = *d {
            if !found || d > best.1 {
                best = (w, d);
                found = true;
            }
        }
    }
    best
}

/// Vertices of minimum total distance within the subtree, found with the
/// rule that `x` is a median iff no component of the subtree minus `x` holds
/// more than half of its vertices.
pub fn one_median(t: &OwnershipGraph, sub: Subtree) -> Result<Vec<Vertex>> {
    if !t.is_tree() {
        return Err(Error::NotATree);
    }
    let inside = members(t, sub);
    let total = inside.iter().filter(|&&b| b).count();
    let mut out = Vec::new();
    for x in (0..t.n()).filter(|&x| inside[x]) {
        let mut largest = 0;
        for &y in t.neighbors(x) {
            if inside[y] {
                let part = members(t, Subtree::Hanging { root: y, parent: x });
                let size = part.iter().zip(&inside).filter(|(a, b)| **a && **b).count();
                largest = largest.max(size);
            }
        }
        if 2 * largest <= total {
            out.push(x);
        }
    }
    Ok(out)
}

/// Vertices of minimum eccentricity within the subtree (the middle of a
/// longest path) together with that eccentricity.
pub fn one_center(t: &OwnershipGraph, sub: Subtree) -> Result<(Vec<Vertex>, u32)> {
    if !t.is_tree() {
        return Err(Error::NotATree);
    }
    let inside = members(t, sub);
    let start = match sub {
        Subtree::Whole if t.n() == 0 => return Ok((Vec::new(), 0)),
        Subtree::Whole => 0,
        Subtree::Hanging { root, .. } => root,
    };
    let (d0, _) = bfs_within(t, &inside, start);
    let (b, _) = farthest(&d0);
    let (db, parent) = bfs_within(t, &inside, b);
    let (c, len) = farthest(&db);
    let mut path = vec![c];
    let mut x = c;
    while x != b {
        x = parent[x];
        path.push(x);
    }
    let half = len as usize / 2;
    let mut centers = if len % 2 == 0 {
        vec![path[half]]
    } else {
        vec![path[half], path[half + 1]]
    };
    centers.sort_unstable();
    Ok((centers, len.div_ceil(2)))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FarSubtree {
    /// Neighbor of the agent that roots the subtree.
    pub root: Vertex,
    /// Whether the agent owns the arc towards `root`.
    pub owned: bool,
    pub centers: Vec<Vertex>,
    pub radius: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TreeAnalysis {
    pub agent: Vertex,
    pub max_dist: u32,
    /// Vertices at distance `max_dist` from the agent.
    pub far_set: Vec<Vertex>,
    /// Subtrees hanging at the agent that contain a vertex of `far_set`.
    pub far_subtrees: Vec<FarSubtree>,
}

pub fn analyze_agent(t: &OwnershipGraph, u: Vertex) -> Result<TreeAnalysis> {
    if !t.is_tree() {
        return Err(Error::NotATree);
    }
    let (dist, _) = bfs_within(t, &vec![true; t.n()], u);
    let max_dist = dist.iter().flatten().copied().max().unwrap_or(0);
    let far_set: Vec<Vertex> = (0..t.n()).filter(|&w| dist[w] == Some(max_dist) && max_dist > 0).collect();
    let mut far_subtrees = Vec::new();
    for &y in t.neighbors(u) {
        let sub = Subtree::Hanging { root: y, parent: u };
        let inside = members(t, sub);
        if far_set.iter().any(|&w| inside[w]) {
            let (centers, radius) = one_center(t, sub)?;
            far_subtrees.push(FarSubtree {
                root: y,
                owned: t.owns(u, y),
                centers,
                radius,
            });
        }
    }
    Ok(TreeAnalysis {
        agent: u,
        max_dist,
        far_set,
        far_subtrees,
    })
}

/// An improving multi-swap of `agent`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MultiSwap {
    pub agent: Vertex,
    pub strategy: Strategy,
    pub old_cost: Cost,
    pub new_cost: Cost,
}

fn require_max_tree(t: &OwnershipGraph, cfg: &GameConfig) -> Result<()> {
    if cfg.objective != Objective::Max {
        return Err(Error::WrongObjective("max"));
    }
    if !t.is_tree() {
        return Err(Error::NotATree);
    }
    Ok(())
}

fn first_ge_violation(t: &OwnershipGraph, cfg: &GameConfig) -> Option<Violation> {
    check(t, cfg, Concept::Ge, &Search::default())
        .expect("greedy checks never hit enumeration limits")
        .violations
        .into_iter()
        .next()
}

/// Looks for an agent who improves by moving every arc into a subtree that
/// holds a farthest vertex onto a 1-center of that subtree. Returns the
/// first such agent.
///
/// The tree must be in Max-GE; otherwise `NotGreedyEquilibrium` is returned.
pub fn detect_badly_connected(t: &OwnershipGraph, cfg: &GameConfig) -> Result<Option<MultiSwap>> {
    require_max_tree(t, cfg)?;
    if let Some(v) = first_ge_violation(t, cfg) {
        return Err(Error::NotGreedyEquilibrium { agent: v.agent });
    }
    find_multi_swap(t, cfg)
}

fn find_multi_swap(t: &OwnershipGraph, cfg: &GameConfig) -> Result<Option<MultiSwap>> {
    if t.diameter().unwrap_or(0) <= 2 {
        return Ok(None);
    }
    for u in 0..t.n() {
        let a = analyze_agent(t, u)?;
        let qualifies = a.far_subtrees.len() >= 2
            && a
                .far_subtrees
                .iter()
                .all(|s| s.owned && 1 + s.radius < a.max_dist);
        if !qualifies {
            continue;
        }
        let targets = t.owned(u).iter().map(|&x| {
            a.far_subtrees
                .iter()
                .find(|s| s.root == x)
                .map_or(x, |s| s.centers[0])
        });
        let strategy = Strategy::new(u, targets);
        let h = apply_strategy(t, &strategy)?;
        return Ok(Some(MultiSwap {
            agent: u,
            old_cost: agent_cost(t, cfg, u),
            new_cost: agent_cost(&h, cfg, u),
            strategy,
        }));
    }
    Ok(None)
}

/// True iff the tree is a star on at least four vertices and
/// `alpha < 1/(n-2)`.
pub fn detect_cheap_star(t: &OwnershipGraph, cfg: &GameConfig) -> bool {
    let n = t.n();
    n >= 4 && t.diameter().is_some_and(|d| d <= 2) && cfg.alpha * int(n as i128 - 2) < One::one()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum MaxTreeVerdict {
    Ne,
    CheapStar { witness: Violation },
    BadlyConnected { witness: MultiSwap },
    NotGe { violation: Violation },
}

impl MaxTreeVerdict {
    pub fn is_ne(&self) -> bool {
        matches!(self, MaxTreeVerdict::Ne)
    }
}

/// Decides Max-NE for a tree without enumerating strategies.
pub fn max_tree_is_ne(t: &OwnershipGraph, cfg: &GameConfig) -> Result<MaxTreeVerdict> {
    require_max_tree(t, cfg)?;
    if let Some(violation) = first_ge_violation(t, cfg) {
        return Ok(MaxTreeVerdict::NotGe { violation });
    }
    let n = t.n();
    if n <= 3 {
        return Ok(MaxTreeVerdict::Ne);
    }
    if detect_cheap_star(t, cfg) {
        let leaf = (0..n).find(|&v| t.degree(v) == 1).expect("a star has leaves");
        let old = agent_cost(t, cfg, leaf).total;
        let extra = (0..n).filter(|&w| w != leaf && !t.adjacent(leaf, w));
        let strategy = Strategy::new(leaf, t.owned(leaf).iter().copied().chain(extra));
        let new = agent_cost(&apply_strategy(t, &strategy)?, cfg, leaf).total;
        return Ok(MaxTreeVerdict::CheapStar {
            witness: Violation::new(leaf, Deviation::Strategy(strategy), old, new),
        });
    }
    Ok(match find_multi_swap(t, cfg)? {
        Some(witness) => MaxTreeVerdict::BadlyConnected { witness },
        None => MaxTreeVerdict::Ne,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum SumTreeVerdict {
    GeAndNe,
    NotGe { violation: Violation },
}

/// For Sum trees, greedy equilibrium already implies Nash equilibrium; only
/// the greedy check is run.
pub fn sum_tree_certify(t: &OwnershipGraph, cfg: &GameConfig) -> Result<SumTreeVerdict> {
    if cfg.objective != Objective::Sum {
        return Err(Error::WrongObjective("sum"));
    }
    if !t.is_tree() {
        return Err(Error::NotATree);
    }
    Ok(match first_ge_violation(t, cfg) {
        Some(violation) => SumTreeVerdict::NotGe { violation },
        None => SumTreeVerdict::GeAndNe,
    })
}
