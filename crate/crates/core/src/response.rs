//! Greedy moves, brute-force best responses and approximation ratios.
//!
//! All searches go through [`AgentView`], which precomputes the distances of
//! the network with the agent's own arcs removed. The distance from the agent
//! to `w` under a strategy `S` is then `1 + min_{x in S ∪ Z} d'(x, w)`, where
//! `Z` are the owners of arcs pointing at the agent.

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{
    agent_cost, apply_strategy, distance_lower_bound, distances_from, Cost, GameConfig, Move,
    Objective, OwnershipGraph, Strategy, Vertex,
};
use crate::rational::{int, Extended, Rational};

/// Environment variable overriding the default enumeration limit.
pub const ENUM_LIMIT_ENV: &str = "NCG_ENUM_LIMIT";

pub const DEFAULT_ENUM_LIMIT: u128 = 1 << 20;

/// Limits for the exhaustive searches.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Search {
    /// Only strategies with at most this many edges are searched.
    pub budget_cap: Option<usize>,
    /// Maximum number of candidate strategies a single search may evaluate.
    pub limit: u128,
}

impl Default for Search {
    fn default() -> Self {
        Search {
            budget_cap: None,
            limit: DEFAULT_ENUM_LIMIT,
        }
    }
}

impl Search {
    /// Default search with the limit taken from `NCG_ENUM_LIMIT` when set.
    pub fn from_env() -> Self {
        let limit = std::env::var(ENUM_LIMIT_ENV)
            .ok()
            .and_then(|s| s.trim().parse().ok())
            .unwrap_or(DEFAULT_ENUM_LIMIT);
        Search {
            budget_cap: None,
            limit,
        }
    }

    pub fn with_budget_cap(mut self, cap: usize) -> Self {
        self.budget_cap = Some(cap);
        self
    }

    pub fn with_limit(mut self, limit: u128) -> Self {
        self.limit = limit;
        self
    }
}

const UNREACHABLE: u32 = u32::MAX;

/// One agent's strategy space over a fixed rest of the network.
pub(crate) struct AgentView {
    n: usize,
    agent: Vertex,
    objective: Objective,
    /// Owners of arcs towards the agent; always adjacent.
    pub zero: Vec<Vertex>,
    /// Vertices the agent may buy edges towards.
    pub candidates: Vec<Vertex>,
    /// The agent's current targets.
    pub current: Vec<Vertex>,
    rest: Vec<u32>,
}

impl AgentView {
    pub fn new(g: &OwnershipGraph, objective: Objective, agent: Vertex) -> Self {
        let n = g.n();
        let zero = g.incoming_owners(agent);
        let candidates = (0..n)
            .filter(|&w| w != agent && zero.binary_search(&w).is_err())
            .collect();
        let without = apply_strategy(g, &Strategy::new(agent, []))
            .expect("the empty strategy is always valid");
        let mut rest = vec![UNREACHABLE; n * n];
        for x in 0..n {
            for (w, d) in distances_from(&without, x).into_iter().enumerate() {
                if let Some(d) = d {
                    rest[x * n + w] = d;
                }
            }
        }
        AgentView {
            n,
            agent,
            objective,
            zero,
            candidates,
            current: g.owned(agent).to_vec(),
            rest,
        }
    }

    /// Distance cost when the agent's neighborhood is `zero` plus every
    /// vertex in `parts`. `None` means some vertex is unreachable.
    pub fn distance_cost(&self, parts: &[&[Vertex]]) -> Option<u64> {
        let n = self.n;
        let mut acc = 0u64;
        for w in 0..n {
            if w == self.agent {
                continue;
            }
            let mut best = UNREACHABLE;
            for &x in self.zero.iter().chain(parts.iter().flat_map(|p| p.iter())) {
                best = best.min(self.rest[x * n + w]);
            }
            if best == UNREACHABLE {
                return None;
            }
            let d = best as u64 + 1;
            acc = match self.objective {
                Objective::Sum => acc + d,
                Objective::Max => acc.max(d),
            };
        }
        Some(acc)
    }

    fn lower_bound(&self, alpha: Rational, size: usize) -> Rational {
        alpha * int(size as i128)
            + distance_lower_bound(self.objective, self.n, size + self.zero.len())
    }
}

/// Advances `idx` to the next `k`-combination of `0..m` in lexicographic
/// order; returns `false` after the last one.
fn next_combination(idx: &mut [usize], m: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] < m - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

pub(crate) fn binomial(m: usize, k: usize) -> u128 {
    if k > m {
        return 0;
    }
    let k = k.min(m - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((m - i) as u128) / (i as u128 + 1);
    }
    acc
}

const PARALLEL_THRESHOLD: u128 = 4096;

/// Minimum distance cost over all `k`-subsets `A` of `pool`, with the agent
/// buying `fixed ∪ A`. Ties go to the lexicographically first subset.
fn min_over_subsets(
    view: &AgentView,
    fixed: &[Vertex],
    pool: &[Vertex],
    k: usize,
) -> Option<(Option<u64>, Vec<Vertex>)> {
    let m = pool.len();
    if k > m {
        return None;
    }
    if k == 0 {
        return Some((view.distance_cost(&[fixed]), Vec::new()));
    }
    let key = |d: Option<u64>| d.unwrap_or(u64::MAX);
    let scan_from = |first: usize| -> (Option<u64>, Vec<Vertex>) {
        let tail = &pool[first + 1..];
        let mut idx: Vec<usize> = (0..k - 1).collect();
        let mut chosen: Vec<Vertex> = Vec::with_capacity(k);
        let mut best: Option<(Option<u64>, Vec<Vertex>)> = None;
        loop {
            chosen.clear();
            chosen.push(pool[first]);
            chosen.extend(idx.iter().map(|&i| tail[i]));
            let d = view.distance_cost(&[fixed, &chosen]);
            if best.as_ref().is_none_or(|(b, _)| key(d) < key(*b)) {
                best = Some((d, chosen.clone()));
            }
            if k == 1 || !next_combination(&mut idx, tail.len()) {
                break;
            }
        }
        best.expect("at least one combination")
    };
    let firsts = 0..=m - k;
    if binomial(m, k) >= PARALLEL_THRESHOLD {
        firsts
            .into_par_iter()
            .map(scan_from)
            .min_by(|a, b| key(a.0).cmp(&key(b.0)).then_with(|| a.1.cmp(&b.1)))
    } else {
        firsts
            .map(scan_from)
            .min_by(|a, b| key(a.0).cmp(&key(b.0)).then_with(|| a.1.cmp(&b.1)))
    }
}

fn total(cfg: &GameConfig, size: usize, dist: Option<u64>) -> Cost {
    Cost::from_parts(cfg.alpha, size, dist)
}

fn merged(a: &[Vertex], b: &[Vertex]) -> Vec<Vertex> {
    let mut v: Vec<Vertex> = a.iter().chain(b).copied().collect();
    v.sort_unstable();
    v
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MoveEvaluation {
    #[serde(rename = "move")]
    pub mv: Move,
    pub new_cost: Cost,
    /// Old total minus new total; strictly positive.
    pub improvement: Extended,
}

/// Every strictly improving greedy move of `v`, in canonical order (buys,
/// deletions, swaps; each by target id).
pub fn improving_moves(g: &OwnershipGraph, cfg: &GameConfig, v: Vertex) -> Vec<MoveEvaluation> {
    let view = AgentView::new(g, cfg.objective, v);
    let current = agent_cost(g, cfg, v);
    let owned = &view.current;
    let fresh: Vec<Vertex> = view
        .candidates
        .iter()
        .copied()
        .filter(|t| owned.binary_search(t).is_err())
        .collect();
    let mut out = Vec::new();
    let mut consider = |mv: Move, size: usize, dist: Option<u64>| {
        let new_cost = total(cfg, size, dist);
        if new_cost.total < current.total {
            let improvement = current
                .total
                .checked_sub(&new_cost.total)
                .expect("new cost is finite");
            out.push(MoveEvaluation {
                mv,
                new_cost,
                improvement,
            });
        }
    };
    let k = owned.len();
    for &t in &fresh {
        consider(Move::Buy { target: t }, k + 1, view.distance_cost(&[owned, &[t]]));
    }
    for (i, &a) in owned.iter().enumerate() {
        let without: Vec<Vertex> = [&owned[..i], &owned[i + 1..]].concat();
        consider(Move::Delete { target: a }, k - 1, view.distance_cost(&[&without]));
    }
    for (i, &a) in owned.iter().enumerate() {
        let without: Vec<Vertex> = [&owned[..i], &owned[i + 1..]].concat();
        for &b in &fresh {
            consider(
                Move::Swap { old: a, new: b },
                k,
                view.distance_cost(&[&without, &[b]]),
            );
        }
    }
    out
}

/// The strictly improving greedy move with the largest improvement, ties
/// broken by the canonical move order.
pub fn best_greedy_move(g: &OwnershipGraph, cfg: &GameConfig, v: Vertex) -> Option<MoveEvaluation> {
    let mut best: Option<MoveEvaluation> = None;
    for m in improving_moves(g, cfg, v) {
        if best.as_ref().is_none_or(|b| m.improvement > b.improvement) {
            best = Some(m);
        }
    }
    best
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BestResponse {
    pub strategy: Strategy,
    pub cost: Cost,
    /// Number of strategies whose cost was evaluated.
    pub evaluated: u128,
}

/// Exact best response by exhaustive search, by increasing strategy size.
///
/// Ties go to the fewest edges, then to the lexicographically smallest
/// target set. Sizes whose cost lower bound (`size * alpha` plus the distance
/// cost of an agent with that many neighbors) cannot beat the best strategy
/// found so far are skipped; this never changes the result.
pub fn best_response(
    g: &OwnershipGraph,
    cfg: &GameConfig,
    v: Vertex,
    search: &Search,
) -> Result<BestResponse> {
    let view = AgentView::new(g, cfg.objective, v);
    let m = view.candidates.len();
    let cap = search.budget_cap.map_or(m, |c| c.min(m));

    // (total, size, targets)
    let mut best: Option<(Extended, usize, Vec<Vertex>)> = None;
    let consider = |best: &mut Option<(Extended, usize, Vec<Vertex>)>,
                        dist: Option<u64>,
                        targets: Vec<Vertex>| {
        let cost = total(cfg, targets.len(), dist).total;
        let better = match best {
            None => true,
            Some((bt, bs, btargets)) => {
                (cost, targets.len(), &targets) < (*bt, *bs, &*btargets)
            }
        };
        if better {
            *best = Some((cost, targets.len(), targets));
        }
    };

    let mut evaluated: u128 = 0;
    if view.current.len() <= cap {
        consider(&mut best, view.distance_cost(&[&view.current]), view.current.clone());
        evaluated += 1;
    }
    if m <= cap && m > 1 {
        consider(&mut best, view.distance_cost(&[&view.candidates]), view.candidates.clone());
        evaluated += 1;
    }
    for s in 0..=cap.min(1) {
        if let Some((d, t)) = min_over_subsets(&view, &[], &view.candidates, s) {
            consider(&mut best, d, t);
        }
        evaluated += binomial(m, s);
    }

    let upper = best.as_ref().map(|b| b.0).unwrap_or(Extended::Infinite);
    let admissible = |s: usize, bound: Extended| match bound {
        Extended::Infinite => true,
        Extended::Finite(b) => view.lower_bound(cfg.alpha, s) <= b,
    };
    let space: u128 = (2..=cap)
        .filter(|&s| admissible(s, upper))
        .map(|s| binomial(m, s))
        .fold(evaluated, u128::saturating_add);
    if space > search.limit {
        return Err(Error::TooLarge {
            space,
            limit: search.limit,
        });
    }

    for s in 2..=cap {
        let (bt, bs, _) = best.as_ref().expect("sizes 0 and 1 were searched");
        let lb = Extended::Finite(view.lower_bound(cfg.alpha, s));
        if lb > *bt || (lb == *bt && *bs < s) {
            continue;
        }
        if let Some((d, t)) = min_over_subsets(&view, &[], &view.candidates, s) {
            consider(&mut best, d, t);
        }
        evaluated += binomial(m, s);
    }

    let (_, _, targets) = best.expect("at least the empty strategy was searched");
    let dist = view.distance_cost(&[&targets]);
    Ok(BestResponse {
        cost: total(cfg, targets.len(), dist),
        strategy: Strategy { agent: v, targets },
        evaluated,
    })
}

fn check_space(space: u128, search: &Search) -> Result<()> {
    if space > search.limit {
        Err(Error::TooLarge {
            space,
            limit: search.limit,
        })
    } else {
        Ok(())
    }
}

fn fresh_targets(view: &AgentView) -> Vec<Vertex> {
    view.candidates
        .iter()
        .copied()
        .filter(|t| view.current.binary_search(t).is_err())
        .collect()
}

/// Best strictly improving purchase of exactly `k` additional edges.
pub fn best_k_buy(
    g: &OwnershipGraph,
    cfg: &GameConfig,
    v: Vertex,
    k: usize,
    search: &Search,
) -> Result<Option<(Vec<Vertex>, Cost)>> {
    if k == 0 {
        return Err(Error::ParameterDomain("k must be at least 1".into()));
    }
    let view = AgentView::new(g, cfg.objective, v);
    let pool = fresh_targets(&view);
    check_space(binomial(pool.len(), k), search)?;
    let current = agent_cost(g, cfg, v);
    Ok(
        min_over_subsets(&view, &view.current, &pool, k).and_then(|(d, added)| {
            let cost = total(cfg, view.current.len() + k, d);
            (cost.total < current.total).then_some((added, cost))
        }),
    )
}

/// Best strictly improving deletion of exactly `k` own edges.
pub fn best_k_delete(
    g: &OwnershipGraph,
    cfg: &GameConfig,
    v: Vertex,
    k: usize,
    search: &Search,
) -> Result<Option<(Vec<Vertex>, Cost)>> {
    if k == 0 {
        return Err(Error::ParameterDomain("k must be at least 1".into()));
    }
    let view = AgentView::new(g, cfg.objective, v);
    let owned = view.current.clone();
    check_space(binomial(owned.len(), k), search)?;
    if k > owned.len() {
        return Ok(None);
    }
    let current = agent_cost(g, cfg, v);
    let mut idx: Vec<usize> = (0..k).collect();
    let mut best: Option<(Vec<Vertex>, Cost)> = None;
    loop {
        let removed: Vec<Vertex> = idx.iter().map(|&i| owned[i]).collect();
        let kept: Vec<Vertex> = owned
            .iter()
            .copied()
            .filter(|t| removed.binary_search(t).is_err())
            .collect();
        let cost = total(cfg, kept.len(), view.distance_cost(&[&kept]));
        if cost.total < current.total && best.as_ref().is_none_or(|b| cost.total < b.1.total) {
            best = Some((removed, cost));
        }
        if !next_combination(&mut idx, owned.len()) {
            break;
        }
    }
    Ok(best)
}

/// Best strictly improving simultaneous swap of exactly `k` own edges.
pub fn best_j_swap(
    g: &OwnershipGraph,
    cfg: &GameConfig,
    v: Vertex,
    k: usize,
    search: &Search,
) -> Result<Option<(Strategy, Cost)>> {
    if k == 0 {
        return Err(Error::ParameterDomain("k must be at least 1".into()));
    }
    let view = AgentView::new(g, cfg.objective, v);
    let owned = view.current.clone();
    let pool = fresh_targets(&view);
    check_space(binomial(owned.len(), k).saturating_mul(binomial(pool.len(), k)), search)?;
    if k > owned.len() || k > pool.len() {
        return Ok(None);
    }
    let current = agent_cost(g, cfg, v);
    let mut idx: Vec<usize> = (0..k).collect();
    let mut best: Option<(Strategy, Cost)> = None;
    loop {
        let kept: Vec<Vertex> = owned
            .iter()
            .enumerate()
            .filter(|(i, _)| !idx.contains(i))
            .map(|(_, &t)| t)
            .collect();
        if let Some((d, added)) = min_over_subsets(&view, &kept, &pool, k) {
            let cost = total(cfg, owned.len(), d);
            if cost.total < current.total
                && best.as_ref().is_none_or(|b| cost.total < b.1.total)
            {
                best = Some((Strategy::new(v, merged(&kept, &added)), cost));
            }
        }
        if !next_combination(&mut idx, owned.len()) {
            break;
        }
    }
    Ok(best)
}

/// Best strictly improving strategy with as many edges as the current one.
pub fn best_multi_swap(
    g: &OwnershipGraph,
    cfg: &GameConfig,
    v: Vertex,
    search: &Search,
) -> Result<Option<(Strategy, Cost)>> {
    let view = AgentView::new(g, cfg.objective, v);
    let k = view.current.len();
    if k == 0 {
        return Ok(None);
    }
    check_space(binomial(view.candidates.len(), k), search)?;
    let current = agent_cost(g, cfg, v);
    Ok(
        min_over_subsets(&view, &[], &view.candidates, k).and_then(|(d, targets)| {
            let cost = total(cfg, k, d);
            (cost.total < current.total).then(|| (Strategy::new(v, targets), cost))
        }),
    )
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AgentRatio {
    pub agent: Vertex,
    pub cost: Cost,
    pub best: BestResponse,
    #[serde(with = "crate::rational::fraction")]
    pub ratio: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RatioReport {
    #[serde(with = "crate::rational::fraction")]
    pub beta: Rational,
    pub witness: Vertex,
    pub agents: Vec<AgentRatio>,
}

/// `c(v) / c*(v)` for a single agent of a connected network.
pub fn agent_ratio(
    g: &OwnershipGraph,
    cfg: &GameConfig,
    v: Vertex,
    search: &Search,
) -> Result<AgentRatio> {
    let cost = agent_cost(g, cfg, v);
    let best = best_response(g, cfg, v, search)?;
    let ratio = match (cost.total, best.cost.total) {
        (Extended::Finite(c), Extended::Finite(b)) if !b.is_zero() => c / b,
        (Extended::Finite(_), Extended::Finite(_)) => Rational::one(),
        _ => return Err(Error::Disconnected),
    };
    Ok(AgentRatio {
        agent: v,
        cost,
        best,
        ratio,
    })
}

/// Smallest `beta` such that every agent's cost is at most `beta` times her
/// best-response cost, with the first agent attaining it.
pub fn approx_ratio(g: &OwnershipGraph, cfg: &GameConfig, search: &Search) -> Result<RatioReport> {
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let agents = (0..g.n())
        .into_par_iter()
        .map(|v| agent_ratio(g, cfg, v, search))
        .collect::<Result<Vec<_>>>()?;
    let mut beta = Rational::one();
    let mut witness = 0;
    for a in &agents {
        if a.ratio > beta {
            beta = a.ratio;
            witness = a.agent;
        }
    }
    Ok(RatioReport {
        beta,
        witness,
        agents,
    })
}
