//! Uncapacitated metric facility location and the reduction of a single
//! agent's strategy choice to it.
//!
//! Facilities and clients are both the vertices other than the agent. The
//! service distance from facility `i` to client `j` is `d'(i, j) + 1`, with
//! `d'` measured in the network without the agent's own arcs, so a vertex
//! serves its own copy at distance 1. Owners of arcs towards the agent open
//! for free, every other facility costs `alpha`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{
    apply_strategy, distances_from, GameConfig, Objective, OwnershipGraph, Strategy, Vertex,
};
use crate::rational::{fraction_vec, Extended, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FlObjective {
    Sum,
    MinMax,
}

impl From<Objective> for FlObjective {
    fn from(o: Objective) -> Self {
        match o {
            Objective::Sum => FlObjective::Sum,
            Objective::Max => FlObjective::MinMax,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawInstance", into = "RawInstance")]
pub struct FlInstance {
    opening: Vec<Rational>,
    /// `dist[f][c]`.
    dist: Vec<Vec<Extended>>,
    objective: FlObjective,
}

#[derive(Serialize, Deserialize)]
struct RawInstance {
    facilities: usize,
    clients: usize,
    #[serde(with = "fraction_vec")]
    opening: Vec<Rational>,
    dist: Vec<Vec<Extended>>,
    objective: FlObjective,
}

impl TryFrom<RawInstance> for FlInstance {
    type Error = Error;

    fn try_from(r: RawInstance) -> Result<Self> {
        if r.opening.len() != r.facilities || r.dist.len() != r.facilities {
            return Err(Error::InvalidInstance(format!(
                "expected {} facilities in opening costs and distance rows",
                r.facilities
            )));
        }
        if r.dist.iter().any(|row| row.len() != r.clients) {
            return Err(Error::InvalidInstance(format!(
                "every distance row needs {} entries",
                r.clients
            )));
        }
        FlInstance::new(r.opening, r.dist, r.objective)
    }
}

impl From<FlInstance> for RawInstance {
    fn from(i: FlInstance) -> Self {
        RawInstance {
            facilities: i.facilities(),
            clients: i.clients(),
            opening: i.opening,
            dist: i.dist,
            objective: i.objective,
        }
    }
}

impl FlInstance {
    pub fn new(opening: Vec<Rational>, dist: Vec<Vec<Extended>>, objective: FlObjective) -> Result<Self> {
        let clients = dist.first().map_or(0, Vec::len);
        if opening.len() != dist.len() || dist.iter().any(|r| r.len() != clients) {
            return Err(Error::InvalidInstance("ragged distance matrix".into()));
        }
        if opening.iter().any(|o| *o < Rational::from_integer(0)) {
            return Err(Error::InvalidInstance("negative opening cost".into()));
        }
        if dist.iter().flatten().any(|d| !d.is_positive() && *d != Extended::zero()) {
            return Err(Error::InvalidInstance("negative distance".into()));
        }
        Ok(FlInstance {
            opening,
            dist,
            objective,
        })
    }

    pub fn facilities(&self) -> usize {
        self.opening.len()
    }

    pub fn clients(&self) -> usize {
        self.dist.first().map_or(0, Vec::len)
    }

    pub fn opening(&self, f: usize) -> Rational {
        self.opening[f]
    }

    pub fn dist(&self, f: usize, c: usize) -> Extended {
        self.dist[f][c]
    }

    pub fn objective(&self) -> FlObjective {
        self.objective
    }

    pub fn zero_cost(&self) -> Vec<usize> {
        (0..self.facilities())
            .filter(|&f| self.opening[f] == Rational::from_integer(0))
            .collect()
    }

    /// Checks `d(f,c) <= d(f,c') + d(f',c') + d(f',c)` over all finite
    /// entries.
    pub fn is_metric(&self) -> bool {
        let (nf, nc) = (self.facilities(), self.clients());
        for f in 0..nf {
            for c in 0..nc {
                let direct = self.dist[f][c];
                for f2 in 0..nf {
                    for c2 in 0..nc {
                        let detour = self.dist[f][c2] + self.dist[f2][c2] + self.dist[f2][c];
                        if detour.is_finite() && direct > detour {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FlSolution {
    /// Sorted open facilities.
    pub open: Vec<usize>,
    /// Nearest open facility per client, ties to the smallest id.
    pub assignment: Vec<usize>,
    pub cost: Extended,
}

fn normalized(open: &[usize]) -> Vec<usize> {
    let mut v = open.to_vec();
    v.sort_unstable();
    v.dedup();
    v
}

/// Opening costs plus the sum (or maximum) of client service distances.
pub fn umfl_cost(inst: &FlInstance, open: &[usize]) -> Result<Extended> {
    Ok(solution(inst, open)?.cost)
}

pub fn solution(inst: &FlInstance, open: &[usize]) -> Result<FlSolution> {
    let open = normalized(open);
    if open.is_empty() {
        return Err(Error::EmptyOpenSet);
    }
    if let Some(&f) = open.iter().find(|&&f| f >= inst.facilities()) {
        return Err(Error::InvalidInstance(format!("no facility {f}")));
    }
    let mut assignment = Vec::with_capacity(inst.clients());
    let mut service = Extended::zero();
    for c in 0..inst.clients() {
        let &f = open
            .iter()
            .min_by_key(|&&f| inst.dist[f][c])
            .expect("open set is nonempty");
        assignment.push(f);
        let d = inst.dist[f][c];
        service = match inst.objective {
            FlObjective::Sum => service + d,
            FlObjective::MinMax => service.max(d),
        };
    }
    let opening: Rational = open.iter().map(|&f| inst.opening[f]).sum();
    Ok(FlSolution {
        cost: service + opening,
        open,
        assignment,
    })
}

/// Index bookkeeping between an agent's strategies and open sets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReductionMap {
    pub agent: Vertex,
    /// Facility/client index to vertex.
    pub vertices: Vec<Vertex>,
    /// Owners of arcs towards the agent.
    pub zero_set: Vec<Vertex>,
}

impl ReductionMap {
    pub fn index_of(&self, v: Vertex) -> Option<usize> {
        self.vertices.binary_search(&v).ok()
    }

    /// The open set `S ∪ Z` of a strategy.
    pub fn open_set(&self, s: &Strategy) -> Result<Vec<usize>> {
        if s.agent != self.agent {
            return Err(Error::InvalidStrategy {
                agent: s.agent,
                reason: format!("map is for agent {}", self.agent),
            });
        }
        let mut open = Vec::new();
        for &v in s.targets.iter().chain(&self.zero_set) {
            open.push(self.index_of(v).ok_or_else(|| Error::InvalidStrategy {
                agent: self.agent,
                reason: format!("target {v} is not a facility"),
            })?);
        }
        Ok(normalized(&open))
    }

    /// The strategy of an open set; the set must contain every zero-cost
    /// facility.
    pub fn strategy_of(&self, open: &[usize]) -> Result<Strategy> {
        let vs: Vec<Vertex> = open
            .iter()
            .map(|&i| {
                self.vertices.get(i).copied().ok_or_else(|| {
                    Error::InvalidInstance(format!("no facility {i}"))
                })
            })
            .collect::<Result<_>>()?;
        if let Some(z) = self.zero_set.iter().find(|z| !vs.contains(z)) {
            return Err(Error::InvalidInstance(format!(
                "zero-cost facility of vertex {z} is closed"
            )));
        }
        Ok(Strategy::new(
            self.agent,
            vs.into_iter().filter(|v| !self.zero_set.contains(v)),
        ))
    }
}

/// Builds the facility location instance of agent `u`.
pub fn reduce(g: &OwnershipGraph, cfg: &GameConfig, u: Vertex) -> Result<(FlInstance, ReductionMap)> {
    if u >= g.n() {
        return Err(Error::VertexOutOfRange { vertex: u, n: g.n() });
    }
    let rest = apply_strategy(g, &Strategy::new(u, []))?;
    let vertices: Vec<Vertex> = (0..g.n()).filter(|&v| v != u).collect();
    let zero_set = g.incoming_owners(u);
    let mut dist = Vec::with_capacity(vertices.len());
    let mut opening = Vec::with_capacity(vertices.len());
    for &f in &vertices {
        let d = distances_from(&rest, f);
        dist.push(
            vertices
                .iter()
                .map(|&c| Extended::from(d[c].map(|x| x as u64 + 1)))
                .collect(),
        );
        opening.push(if zero_set.contains(&f) {
            Rational::from_integer(0)
        } else {
            cfg.alpha
        });
    }
    let inst = FlInstance::new(opening, dist, cfg.objective.into())?;
    Ok((
        inst,
        ReductionMap {
            agent: u,
            vertices,
            zero_set,
        },
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FacilityMove {
    Open { facility: usize },
    Close { facility: usize },
    Swap { out: usize, into: usize },
}

fn apply_facility_move(open: &[usize], m: FacilityMove) -> Vec<usize> {
    let mut v: Vec<usize> = match m {
        FacilityMove::Open { facility } => open.iter().copied().chain([facility]).collect(),
        FacilityMove::Close { facility } => open.iter().copied().filter(|&f| f != facility).collect(),
        FacilityMove::Swap { out, into } => open
            .iter()
            .copied()
            .filter(|&f| f != out)
            .chain([into])
            .collect(),
    };
    v.sort_unstable();
    v
}

/// First strictly improving single open, close or swap, scanning opens,
/// then closes, then swaps, each by facility id. Zero-cost facilities are
/// never closed or swapped out.
pub fn improving_move(inst: &FlInstance, open: &[usize]) -> Result<Option<(FacilityMove, Extended)>> {
    let open = normalized(open);
    let current = umfl_cost(inst, &open)?;
    let closed: Vec<usize> = (0..inst.facilities())
        .filter(|f| open.binary_search(f).is_err())
        .collect();
    let removable: Vec<usize> = open
        .iter()
        .copied()
        .filter(|&f| inst.opening[f] != Rational::from_integer(0))
        .collect();
    let mut candidates: Vec<FacilityMove> = closed
        .iter()
        .map(|&facility| FacilityMove::Open { facility })
        .collect();
    if open.len() > 1 {
        candidates.extend(removable.iter().map(|&facility| FacilityMove::Close { facility }));
    }
    for &out in &removable {
        candidates.extend(closed.iter().map(|&into| FacilityMove::Swap { out, into }));
    }
    for m in candidates {
        let cost = umfl_cost(inst, &apply_facility_move(&open, m))?;
        if cost < current {
            return Ok(Some((m, cost)));
        }
    }
    Ok(None)
}

/// Every zero-cost facility plus the single paid facility that gives the
/// lowest cost.
pub fn initial_solution(inst: &FlInstance) -> Result<FlSolution> {
    let zero = inst.zero_cost();
    let mut best: Option<FlSolution> = None;
    for f in 0..inst.facilities() {
        if zero.contains(&f) {
            continue;
        }
        let mut open = zero.clone();
        open.push(f);
        let s = solution(inst, &open)?;
        if best.as_ref().is_none_or(|b| s.cost < b.cost) {
            best = Some(s);
        }
    }
    match best {
        Some(b) => Ok(b),
        None => solution(inst, &zero),
    }
}

/// Single-move local search from `init`. Zero-cost facilities are opened
/// first; an empty start is replaced by [`initial_solution`].
pub fn local_search(inst: &FlInstance, init: &[usize]) -> Result<FlSolution> {
    let mut open = normalized(&[init, &inst.zero_cost()].concat());
    if open.is_empty() {
        open = initial_solution(inst)?.open;
    }
    while let Some((m, _)) = improving_move(inst, &open)? {
        open = apply_facility_move(&open, m);
    }
    solution(inst, &open)
}

pub const BRUTE_FORCE_MAX_FACILITIES: usize = 20;

/// Global optimum over all open sets containing every zero-cost facility;
/// ties go to the first set in bitmask order.
pub fn brute_force_optimum(inst: &FlInstance) -> Result<FlSolution> {
    let nf = inst.facilities();
    if nf > BRUTE_FORCE_MAX_FACILITIES {
        return Err(Error::TooLarge {
            space: 1u128 << nf,
            limit: 1u128 << BRUTE_FORCE_MAX_FACILITIES,
        });
    }
    let zero_mask: u32 = inst.zero_cost().iter().map(|&f| 1u32 << f).sum();
    let mut best: Option<FlSolution> = None;
    for mask in 1u32..(1u32 << nf) {
        if mask & zero_mask != zero_mask {
            continue;
        }
        let open: Vec<usize> = (0..nf).filter(|f| mask >> f & 1 == 1).collect();
        let s = solution(inst, &open)?;
        if best.as_ref().is_none_or(|b| s.cost < b.cost) {
            best = Some(s);
        }
    }
    best.ok_or(Error::EmptyOpenSet)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{agent_cost, apply_strategy};
    use crate::rational::{frac, int};

    fn fin(v: i128) -> Extended {
        Extended::Finite(int(v))
    }

    #[test]
    fn star_center_sees_infinite_distances() {
        let g = OwnershipGraph::new(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
        let (inst, map) = reduce(&g, &GameConfig::sum(int(1)).unwrap(), 0).unwrap();
        assert!(map.zero_set.is_empty());
        for f in 0..3 {
            for c in 0..3 {
                let want = if f == c { fin(1) } else { Extended::Infinite };
                assert_eq!(inst.dist(f, c), want);
            }
        }
        assert!(inst.is_metric());
        assert_eq!(umfl_cost(&inst, &[0, 1, 2]).unwrap(), fin(6));
        assert!(matches!(umfl_cost(&inst, &[]), Err(Error::EmptyOpenSet)));
    }

    #[test]
    fn zero_cost_facilities_are_incoming_owners() {
        let g = OwnershipGraph::new(4, [(1, 0), (0, 2), (2, 3), (3, 1)]).unwrap();
        let cfg = GameConfig::sum(frac(3, 2)).unwrap();
        let (inst, map) = reduce(&g, &cfg, 0).unwrap();
        assert_eq!(map.zero_set, vec![1]);
        assert_eq!(inst.zero_cost(), vec![0]);
        assert_eq!(inst.opening(1), frac(3, 2));
        let s = g.strategy_of(0);
        let open = map.open_set(&s).unwrap();
        assert_eq!(map.strategy_of(&open).unwrap(), s);
        assert_eq!(umfl_cost(&inst, &open).unwrap(), agent_cost(&g, &cfg, 0).total);
        assert!(map.strategy_of(&[1]).is_err());
    }

    #[test]
    fn cost_equality_on_small_cycle() {
        let g = OwnershipGraph::new(6, (0..6).map(|i| (i, (i + 1) % 6))).unwrap();
        for obj in [Objective::Sum, Objective::Max] {
            let cfg = GameConfig::new(int(2), obj).unwrap();
            let (inst, map) = reduce(&g, &cfg, 0).unwrap();
            for targets in [vec![1], vec![2], vec![3], vec![1, 3], vec![2, 4]] {
                let s = Strategy::new(0, targets);
                let h = apply_strategy(&g, &s).unwrap();
                let open = map.open_set(&s).unwrap();
                assert_eq!(umfl_cost(&inst, &open).unwrap(), agent_cost(&h, &cfg, 0).total);
            }
        }
    }

    #[test]
    fn local_search_and_brute_force() {
        // Two clusters; opening both clusters' centers is optimal.
        let inf = Extended::Infinite;
        let dist = vec![
            vec![fin(1), fin(2), inf, inf],
            vec![fin(2), fin(1), inf, inf],
            vec![inf, inf, fin(1), fin(2)],
            vec![inf, inf, fin(2), fin(1)],
        ];
        let inst = FlInstance::new(vec![int(1); 4], dist, FlObjective::Sum).unwrap();
        let opt = brute_force_optimum(&inst).unwrap();
        assert_eq!(opt.open, vec![0, 2]);
        assert_eq!(opt.cost, fin(8));
        let ls = local_search(&inst, &[]).unwrap();
        assert_eq!(ls.cost, fin(8));
        let unchanged = local_search(&inst, &opt.open).unwrap();
        assert_eq!(unchanged.open, opt.open);
        assert!(improving_move(&inst, &opt.open).unwrap().is_none());
    }

    #[test]
    fn single_free_colocated_facility() {
        let inst = FlInstance::new(vec![int(0)], vec![vec![fin(1)]], FlObjective::Sum).unwrap();
        let opt = brute_force_optimum(&inst).unwrap();
        assert_eq!((opt.open, opt.cost), (vec![0], fin(1)));
    }

    #[test]
    fn json_shape() {
        let inst = FlInstance::new(
            vec![int(0), frac(1, 2)],
            vec![vec![fin(1), Extended::Infinite], vec![fin(3), fin(1)]],
            FlObjective::MinMax,
        )
        .unwrap();
        let text = serde_json::to_string(&inst).unwrap();
        assert_eq!(
            text,
            r#"{"facilities":2,"clients":2,"opening":["0/1","1/2"],"dist":[["1/1","inf"],["3/1","1/1"]],"objective":"minmax"}"#
        );
        let back: FlInstance = serde_json::from_str(&text).unwrap();
        assert_eq!(back, inst);
        assert!(serde_json::from_str::<FlInstance>(
            r#"{"facilities":2,"clients":1,"opening":["0/1"],"dist":[["1/1"]],"objective":"sum"}"#
        )
        .is_err());
    }
}
