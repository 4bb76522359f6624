//! Ownership-annotated networks and exact agent costs.
//!
//! A network is a set of arcs `(owner, target)`: the owner paid for the
//! undirected edge `{owner, target}`. Connectivity is always undirected.

use std::collections::VecDeque;
use std::fmt::{self, Write as _};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{format_fraction, int, Extended, Rational};

pub type Vertex = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    /// Distance cost is the sum of distances to all vertices.
    Sum,
    /// Distance cost is the eccentricity.
    Max,
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Objective::Sum => "sum",
            Objective::Max => "max",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GameConfig {
    pub alpha: Rational,
    pub objective: Objective,
}

impl GameConfig {
    pub fn new(alpha: Rational, objective: Objective) -> Result<Self> {
        if alpha <= Rational::zero() {
            return Err(Error::NonPositiveAlpha(format_fraction(&alpha)));
        }
        Ok(GameConfig { alpha, objective })
    }

    pub fn sum(alpha: Rational) -> Result<Self> {
        Self::new(alpha, Objective::Sum)
    }

    pub fn max(alpha: Rational) -> Result<Self> {
        Self::new(alpha, Objective::Max)
    }

    pub fn with_alpha(&self, alpha: Rational) -> Result<Self> {
        Self::new(alpha, self.objective)
    }
}

/// The full set of vertices an agent buys edges towards.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Strategy {
    pub agent: Vertex,
    pub targets: Vec<Vertex>,
}

impl Strategy {
    pub fn new(agent: Vertex, targets: impl IntoIterator<Item = Vertex>) -> Self {
        let mut targets: Vec<Vertex> = targets.into_iter().collect();
        targets.sort_unstable();
        targets.dedup();
        Strategy { agent, targets }
    }
}

/// A single greedy change of one own edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Move {
    Buy { target: Vertex },
    Delete { target: Vertex },
    Swap { old: Vertex, new: Vertex },
}

impl Move {
    /// Canonical tie-break order: buys, then deletions, then swaps, each by
    /// target id.
    pub fn order_key(&self) -> (u8, Vertex, Vertex) {
        match *self {
            Move::Buy { target } => (0, target, 0),
            Move::Delete { target } => (1, target, 0),
            Move::Swap { old, new } => (2, old, new),
        }
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Move::Buy { target } => write!(f, "buy {target}"),
            Move::Delete { target } => write!(f, "delete {target}"),
            Move::Swap { old, new } => write!(f, "swap {old}->{new}"),
        }
    }
}

/// An agent's exact cost: `edge_part + dist_part`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cost {
    #[serde(with = "crate::rational::fraction")]
    pub edge_part: Rational,
    pub dist_part: Extended,
    pub total: Extended,
}

impl Cost {
    pub fn new(edge_part: Rational, dist_part: Extended) -> Self {
        Cost {
            edge_part,
            dist_part,
            total: dist_part + edge_part,
        }
    }

    pub fn from_parts(alpha: Rational, edges: usize, dist: Option<u64>) -> Self {
        Cost::new(alpha * int(edges as i128), dist.into())
    }

    pub fn is_finite(&self) -> bool {
        self.total.is_finite()
    }
}

/// Serialized as `{"n": .., "arcs": [[owner, target], ..]}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "GraphRepr", into = "GraphRepr")]
pub struct OwnershipGraph {
    n: usize,
    arcs: Vec<(Vertex, Vertex)>,
    owned: Vec<Vec<Vertex>>,
    adj: Vec<Vec<Vertex>>,
}

#[derive(Serialize, Deserialize)]
struct GraphRepr {
    n: usize,
    arcs: Vec<(Vertex, Vertex)>,
}

impl TryFrom<GraphRepr> for OwnershipGraph {
    type Error = Error;

    fn try_from(r: GraphRepr) -> Result<Self> {
        OwnershipGraph::new(r.n, r.arcs)
    }
}

impl From<OwnershipGraph> for GraphRepr {
    fn from(g: OwnershipGraph) -> Self {
        GraphRepr { n: g.n, arcs: g.arcs }
    }
}

impl OwnershipGraph {
    pub fn new(n: usize, arcs: impl IntoIterator<Item = (Vertex, Vertex)>) -> Result<Self> {
        let mut arcs: Vec<(Vertex, Vertex)> = arcs.into_iter().collect();
        for &(o, t) in &arcs {
            for v in [o, t] {
                if v >= n {
                    return Err(Error::VertexOutOfRange { vertex: v, n });
                }
            }
            if o == t {
                return Err(Error::SelfArc(o));
            }
        }
        arcs.sort_unstable();
        if let Some(w) = arcs.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateArc(w[0].0, w[0].1));
        }
        for &(o, t) in &arcs {
            if o < t && arcs.binary_search(&(t, o)).is_ok() {
                return Err(Error::AntiparallelArcs(o, t));
            }
        }
        Ok(Self::from_sorted_unchecked(n, arcs))
    }

    fn from_sorted_unchecked(n: usize, arcs: Vec<(Vertex, Vertex)>) -> Self {
        let mut owned = vec![Vec::new(); n];
        let mut adj = vec![Vec::new(); n];
        for &(o, t) in &arcs {
            owned[o].push(t);
            adj[o].push(t);
            adj[t].push(o);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        OwnershipGraph { n, arcs, owned, adj }
    }

    /// Builds a graph from undirected edges, each owned by its first endpoint.
    pub fn from_edges(n: usize, edges: &[(Vertex, Vertex)]) -> Result<Self> {
        Self::new(n, edges.iter().copied())
    }

    pub fn edgeless(n: usize) -> Self {
        Self::from_sorted_unchecked(n, Vec::new())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Arcs in canonical (sorted) order.
    pub fn arcs(&self) -> &[(Vertex, Vertex)] {
        &self.arcs
    }

    pub fn edge_count(&self) -> usize {
        self.arcs.len()
    }

    /// Sorted targets of arcs owned by `v`.
    pub fn owned(&self, v: Vertex) -> &[Vertex] {
        &self.owned[v]
    }

    /// Sorted undirected neighbors of `v`.
    pub fn neighbors(&self, v: Vertex) -> &[Vertex] {
        &self.adj[v]
    }

    pub fn owns(&self, owner: Vertex, target: Vertex) -> bool {
        self.owned[owner].binary_search(&target).is_ok()
    }

    pub fn adjacent(&self, a: Vertex, b: Vertex) -> bool {
        self.adj[a].binary_search(&b).is_ok()
    }

    /// Owners of arcs pointing at `v`, sorted.
    pub fn incoming_owners(&self, v: Vertex) -> Vec<Vertex> {
        self.adj[v]
            .iter()
            .copied()
            .filter(|&w| self.owns(w, v))
            .collect()
    }

    pub fn strategy_of(&self, v: Vertex) -> Strategy {
        Strategy {
            agent: v,
            targets: self.owned[v].clone(),
        }
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.adj[v].len()
    }

    pub fn is_connected(&self) -> bool {
        self.n <= 1 || distances_from(self, 0).iter().all(Option::is_some)
    }

    pub fn is_tree(&self) -> bool {
        self.n >= 1 && self.arcs.len() == self.n - 1 && self.is_connected()
    }

    /// Largest eccentricity, `None` when disconnected.
    pub fn diameter(&self) -> Option<u32> {
        let mut best = 0;
        for v in 0..self.n {
            for d in distances_from(self, v) {
                best = best.max(d?);
            }
        }
        Some(best)
    }

    /// Replaces the undirected edge `{v, old}` (whoever owns it) by an arc
    /// `(v, new)`. This is the swap available to agents when ownership is
    /// ignored.
    pub fn swap_incident_edge(&self, v: Vertex, old: Vertex, new: Vertex) -> Result<Self> {
        let invalid = |reason: &str| Error::InvalidMove {
            agent: v,
            reason: reason.to_string(),
        };
        if new >= self.n || old >= self.n {
            return Err(invalid("vertex out of range"));
        }
        if !self.adjacent(v, old) {
            return Err(invalid("old endpoint is not a neighbor"));
        }
        if new == v || self.adjacent(v, new) {
            return Err(invalid("new endpoint is the agent or already a neighbor"));
        }
        let arcs: Vec<_> = self
            .arcs
            .iter()
            .copied()
            .filter(|&a| a != (v, old) && a != (old, v))
            .chain(std::iter::once((v, new)))
            .collect();
        Self::new(self.n, arcs)
    }

    /// Graphviz rendering with edges drawn owner -> target.
    pub fn to_dot(&self, name: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "digraph \"{}\" {{", name.replace('"', "'"));
        for v in 0..self.n {
            let _ = writeln!(out, "  {v};");
        }
        for &(o, t) in &self.arcs {
            let _ = writeln!(out, "  {o} -> {t};");
        }
        out.push_str("}\n");
        out
    }
}

/// Hop distances from `v` in the undirected graph; `None` where unreachable.
pub fn distances_from(g: &OwnershipGraph, v: Vertex) -> Vec<Option<u32>> {
    let mut dist = vec![None; g.n];
    let mut queue = VecDeque::new();
    dist[v] = Some(0);
    queue.push_back(v);
    while let Some(x) = queue.pop_front() {
        let d = dist[x].unwrap() + 1;
        for &y in &g.adj[x] {
            if dist[y].is_none() {
                dist[y] = Some(d);
                queue.push_back(y);
            }
        }
    }
    dist
}

/// Distance cost (sum or eccentricity) of `v`, `None` if some vertex is
/// unreachable.
pub fn distance_cost(g: &OwnershipGraph, objective: Objective, v: Vertex) -> Option<u64> {
    let dist = distances_from(g, v);
    let mut acc = 0u64;
    for d in dist {
        let d = d? as u64;
        acc = match objective {
            Objective::Sum => acc + d,
            Objective::Max => acc.max(d),
        };
    }
    Some(acc)
}

pub fn agent_cost(g: &OwnershipGraph, cfg: &GameConfig, v: Vertex) -> Cost {
    Cost::from_parts(
        cfg.alpha,
        g.owned[v].len(),
        distance_cost(g, cfg.objective, v),
    )
}

/// Sum of all agents' costs.
pub fn social_cost(g: &OwnershipGraph, cfg: &GameConfig) -> Extended {
    (0..g.n).fold(Extended::zero(), |acc, v| acc + agent_cost(g, cfg, v).total)
}

pub fn apply_move(g: &OwnershipGraph, v: Vertex, m: Move) -> Result<OwnershipGraph> {
    let invalid = |reason: String| Error::InvalidMove { agent: v, reason };
    if v >= g.n {
        return Err(invalid(format!("agent {v} out of range")));
    }
    let check_new = |t: Vertex, ignore: Option<Vertex>| -> Result<()> {
        if t >= g.n {
            return Err(invalid(format!("target {t} out of range")));
        }
        if t == v {
            return Err(invalid("cannot buy a self-loop".into()));
        }
        if Some(t) != ignore && g.owns(v, t) {
            return Err(invalid(format!("already owns an edge to {t}")));
        }
        if g.owns(t, v) {
            return Err(invalid(format!("{t} already owns an edge to the agent (multi-edge)")));
        }
        Ok(())
    };
    let mut arcs = g.arcs.clone();
    match m {
        Move::Buy { target } => {
            check_new(target, None)?;
            arcs.push((v, target));
        }
        Move::Delete { target } => {
            if !g.owns(v, target) {
                return Err(invalid(format!("does not own an edge to {target}")));
            }
            arcs.retain(|&a| a != (v, target));
        }
        Move::Swap { old, new } => {
            if !g.owns(v, old) {
                return Err(invalid(format!("does not own an edge to {old}")));
            }
            if old == new {
                return Err(invalid("swap must change the endpoint".into()));
            }
            check_new(new, Some(old))?;
            arcs.retain(|&a| a != (v, old));
            arcs.push((v, new));
        }
    }
    arcs.sort_unstable();
    Ok(OwnershipGraph::from_sorted_unchecked(g.n, arcs))
}

/// Checks that `s` is a valid strategy against the arcs of all other agents.
pub fn validate_strategy(g: &OwnershipGraph, s: &Strategy) -> Result<()> {
    let invalid = |reason: String| Error::InvalidStrategy {
        agent: s.agent,
        reason,
    };
    if s.agent >= g.n {
        return Err(invalid(format!("agent {} out of range", s.agent)));
    }
    for (i, &t) in s.targets.iter().enumerate() {
        if t >= g.n {
            return Err(invalid(format!("target {t} out of range")));
        }
        if t == s.agent {
            return Err(invalid("contains the agent itself".into()));
        }
        if i > 0 && s.targets[i - 1] >= t {
            return Err(invalid("targets must be sorted and distinct".into()));
        }
        if g.owns(t, s.agent) {
            return Err(invalid(format!(
                "{t} owns an edge towards the agent (multi-edge)"
            )));
        }
    }
    Ok(())
}

pub fn apply_strategy(g: &OwnershipGraph, s: &Strategy) -> Result<OwnershipGraph> {
    validate_strategy(g, s)?;
    let mut arcs: Vec<(Vertex, Vertex)> = g
        .arcs
        .iter()
        .copied()
        .filter(|&(o, _)| o != s.agent)
        .chain(s.targets.iter().map(|&t| (s.agent, t)))
        .collect();
    arcs.sort_unstable();
    Ok(OwnershipGraph::from_sorted_unchecked(g.n, arcs))
}

/// Lower bound on the distance cost of an agent whose neighborhood has
/// exactly `neighbors` vertices out of `n`.
pub(crate) fn distance_lower_bound(objective: Objective, n: usize, neighbors: usize) -> Rational {
    if n <= 1 {
        return Rational::zero();
    }
    let others = (n - 1) as i128;
    let near = (neighbors as i128).min(others);
    match objective {
        Objective::Sum => int(near + 2 * (others - near)),
        Objective::Max if near == others => Rational::one(),
        Objective::Max => int(2),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::frac;

    fn path(n: usize) -> OwnershipGraph {
        OwnershipGraph::new(n, (0..n - 1).map(|i| (i, i + 1))).unwrap()
    }

    fn cycle(n: usize) -> OwnershipGraph {
        OwnershipGraph::new(n, (0..n).map(|i| (i, (i + 1) % n))).unwrap()
    }

    #[test]
    fn rejects_malformed_arc_sets() {
        assert!(matches!(
            OwnershipGraph::new(2, [(0, 1), (1, 0)]),
            Err(Error::AntiparallelArcs(0, 1))
        ));
        assert!(matches!(OwnershipGraph::new(2, [(0, 0)]), Err(Error::SelfArc(0))));
        assert!(matches!(
            OwnershipGraph::new(3, [(0, 1), (0, 1)]),
            Err(Error::DuplicateArc(0, 1))
        ));
        assert!(matches!(
            OwnershipGraph::new(2, [(0, 2)]),
            Err(Error::VertexOutOfRange { vertex: 2, n: 2 })
        ));
        assert!(GameConfig::sum(int(0)).is_err());
    }

    #[test]
    fn bfs_distances() {
        assert_eq!(distances_from(&path(3), 0), vec![Some(0), Some(1), Some(2)]);
        assert_eq!(distances_from(&OwnershipGraph::edgeless(2), 1), vec![None, Some(0)]);
        let c5 = cycle(5);
        for v in 0..5 {
            let mut d: Vec<u32> = distances_from(&c5, v).into_iter().map(Option::unwrap).collect();
            d.sort();
            assert_eq!(d, vec![0, 1, 1, 2, 2]);
        }
    }

    #[test]
    fn small_costs() {
        let pair = OwnershipGraph::new(2, [(0, 1)]).unwrap();
        let cost = agent_cost(&pair, &GameConfig::sum(int(3)).unwrap(), 0);
        assert_eq!(cost.total, Extended::Finite(int(4)));

        let p3 = OwnershipGraph::new(3, [(1, 0), (1, 2)]).unwrap();
        let cost = agent_cost(&p3, &GameConfig::max(int(1)).unwrap(), 1);
        assert_eq!(cost.total, Extended::Finite(int(3)));

        let cost = agent_cost(&OwnershipGraph::edgeless(2), &GameConfig::sum(int(1)).unwrap(), 0);
        assert_eq!(cost.dist_part, Extended::Infinite);
        assert_eq!(cost.total, Extended::Infinite);
    }

    #[test]
    fn moves() {
        let g = OwnershipGraph::edgeless(2);
        let g = apply_move(&g, 0, Move::Buy { target: 1 }).unwrap();
        assert_eq!(g.arcs(), &[(0, 1)]);

        let p = path(3);
        let swapped = apply_move(&p, 0, Move::Swap { old: 1, new: 2 }).unwrap();
        assert_eq!(swapped.arcs(), &[(0, 2), (1, 2)]);
        assert_eq!(p.arcs(), &[(0, 1), (1, 2)]);

        assert!(matches!(
            apply_move(&p, 2, Move::Delete { target: 1 }),
            Err(Error::InvalidMove { agent: 2, .. })
        ));
        assert!(apply_move(&p, 1, Move::Buy { target: 0 }).is_err());
        assert!(apply_move(&p, 0, Move::Buy { target: 1 }).is_err());
    }

    #[test]
    fn strategies() {
        let p = path(3);
        let rewired = apply_strategy(&p, &Strategy::new(0, [2])).unwrap();
        assert_eq!(rewired.arcs(), &[(0, 2), (1, 2)]);

        let cut = apply_strategy(&p, &Strategy::new(1, [])).unwrap();
        assert!(!cut.is_connected());
        let cfg = GameConfig::sum(frac(1, 2)).unwrap();
        assert_eq!(agent_cost(&cut, &cfg, 0).total, Extended::Infinite);

        assert!(matches!(
            apply_strategy(&p, &Strategy::new(1, [0])),
            Err(Error::InvalidStrategy { agent: 1, .. })
        ));
    }

    #[test]
    fn structure_queries() {
        assert!(path(4).is_tree());
        assert!(!cycle(4).is_tree());
        assert_eq!(cycle(5).diameter(), Some(2));
        assert_eq!(OwnershipGraph::edgeless(3).diameter(), None);
        assert_eq!(cycle(5).incoming_owners(0), vec![4]);
        let dot = path(2).to_dot("p");
        assert!(dot.contains("0 -> 1;"));
    }

    #[test]
    fn incident_swap_ignores_ownership() {
        let p = path(3);
        let g = p.swap_incident_edge(1, 0, 2);
        assert!(g.is_err());
        let g = p.swap_incident_edge(2, 1, 0).unwrap();
        assert_eq!(g.arcs(), &[(0, 1), (2, 0)]);
    }
}
