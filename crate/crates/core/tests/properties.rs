//! Randomized invariants checked against independent brute-force oracles.

use std::collections::{BTreeSet, VecDeque};

use ncg_core::equilibria::Subtree;
use ncg_core::umfl::improving_move;
use ncg_core::*;
use proptest::prelude::{any, prop, prop_assert, prop_assert_eq, prop_assume, proptest, ProptestConfig};
use proptest::strategy::Strategy as _;

const ALPHAS: [(i128, i128); 8] = [(1, 10), (1, 4), (1, 2), (1, 1), (3, 2), (2, 1), (4, 1), (7, 1)];

fn arb_config() -> impl proptest::strategy::Strategy<Value = GameConfig> {
    (0..ALPHAS.len(), any::<bool>()).prop_map(|(i, sum)| {
        let (p, q) = ALPHAS[i];
        let objective = if sum { Objective::Sum } else { Objective::Max };
        GameConfig::new(frac(p, q), objective).unwrap()
    })
}

/// A connected network: a random spanning tree, extra edges, random owners.
fn arb_connected(max_n: usize) -> impl proptest::strategy::Strategy<Value = OwnershipGraph> {
    (2..=max_n).prop_flat_map(|n| {
        let pairs = n * (n - 1) / 2;
        (
            proptest::collection::vec(any::<prop::sample::Index>(), n - 1),
            proptest::collection::vec(prop::bool::weighted(0.25), pairs),
            proptest::collection::vec(any::<bool>(), pairs),
        )
            .prop_map(move |(parents, extra, flip)| {
                let mut edges = BTreeSet::new();
                for (i, p) in parents.iter().enumerate() {
                    edges.insert((p.index(i + 1), i + 1));
                }
                let mut k = 0;
                for a in 0..n {
                    for b in a + 1..n {
                        if extra[k] {
                            edges.insert((a, b));
                        }
                        k += 1;
                    }
                }
                let arcs = edges.into_iter().enumerate().map(|(i, (a, b))| {
                    let i = i % flip.len();
                    if flip[i] {
                        (b, a)
                    } else {
                        (a, b)
                    }
                });
                OwnershipGraph::new(n, arcs).unwrap()
            })
    })
}

fn arb_tree(max_n: usize) -> impl proptest::strategy::Strategy<Value = OwnershipGraph> {
    (2..=max_n).prop_flat_map(|n| {
        (
            proptest::collection::vec(any::<prop::sample::Index>(), n - 1),
            proptest::collection::vec(any::<bool>(), n - 1),
        )
            .prop_map(move |(parents, flip)| {
                let arcs = parents.iter().enumerate().map(|(i, p)| {
                    let (a, b) = (p.index(i + 1), i + 1);
                    if flip[i] {
                        (b, a)
                    } else {
                        (a, b)
                    }
                });
                OwnershipGraph::new(n, arcs).unwrap()
            })
    })
}

/// Candidate targets of `v`: everyone except `v` and the owners of arcs
/// towards `v`.
fn candidates(g: &OwnershipGraph, v: Vertex) -> Vec<Vertex> {
    let zero = g.incoming_owners(v);
    (0..g.n()).filter(|&w| w != v && !zero.contains(&w)).collect()
}

/// Every strategy of `v`, each evaluated from scratch.
fn all_strategies(g: &OwnershipGraph, cfg: &GameConfig, v: Vertex) -> Vec<(ncg_core::Strategy, Cost)> {
    let cand = candidates(g, v);
    (0u32..1 << cand.len())
        .map(|mask| {
            let s = ncg_core::Strategy::new(
                v,
                cand.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &w)| w),
            );
            let h = apply_strategy(g, &s).unwrap();
            let c = agent_cost(&h, cfg, v);
            (s, c)
        })
        .collect()
}

/// Plain BFS over an explicit edge set restricted to `inside`.
fn bfs(g: &OwnershipGraph, inside: &[bool], src: Vertex) -> Vec<Option<u32>> {
    let mut dist = vec![None; g.n()];
    dist[src] = Some(0);
    let mut q = VecDeque::from([src]);
    while let Some(x) = q.pop_front() {
        for &(a, b) in g.arcs() {
            for (p, r) in [(a, b), (b, a)] {
                if p == x && inside[r] && dist[r].is_none() {
                    dist[r] = Some(dist[x].unwrap() + 1);
                    q.push_back(r);
                }
            }
        }
    }
    dist
}

fn subtree_members(g: &OwnershipGraph, root: Vertex, parent: Vertex) -> Vec<bool> {
    let mut inside = vec![true; g.n()];
    inside[parent] = false;
    let d = bfs(g, &inside, root);
    d.iter().map(Option::is_some).collect()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 96, ..ProptestConfig::default() })]

    #[test]
    fn best_response_matches_exhaustive_search(g in arb_connected(7), cfg in arb_config(), v in any::<prop::sample::Index>()) {
        let v = v.index(g.n());
        let all = all_strategies(&g, &cfg, v);
        let best = all.iter().map(|(_, c)| c.total).min().unwrap();
        let br = best_response(&g, &cfg, v, &Search::default()).unwrap();
        prop_assert_eq!(br.cost.total, best);
        let canonical = all
            .iter()
            .filter(|(_, c)| c.total == best)
            .map(|(s, _)| (s.targets.len(), s.targets.clone()))
            .min()
            .unwrap();
        prop_assert_eq!(br.strategy.targets, canonical.1);
        let capped = best_response(&g, &cfg, v, &Search::default().with_budget_cap(g.n() - 1)).unwrap();
        prop_assert_eq!(capped.cost, br.cost);
    }

    #[test]
    fn concept_containments(g in arb_connected(7), cfg in arb_config()) {
        let s = Search::default();
        let ne = check(&g, &cfg, Concept::Ne, &s).unwrap().holds;
        let ge = check(&g, &cfg, Concept::Ge, &s).unwrap().holds;
        let se = check(&g, &cfg, Concept::Se, &s).unwrap().holds;
        let ase = check(&g, &cfg, Concept::Ase, &s).unwrap().holds;
        prop_assert!(!ne || ge);
        prop_assert!(!ge || ase);
        prop_assert!(!se || ase);
    }

    #[test]
    fn reported_violations_revalidate(g in arb_connected(7), cfg in arb_config()) {
        for concept in Concept::ALL {
            let report = check(&g, &cfg, concept, &Search::default()).unwrap();
            prop_assert_eq!(report.holds, report.violations.is_empty());
            for v in &report.violations {
                prop_assert!(equilibria::revalidate(&g, &cfg, concept, v).unwrap());
            }
        }
    }

    #[test]
    fn greedy_moves_are_improving_and_maximal(g in arb_connected(7), cfg in arb_config(), v in any::<prop::sample::Index>()) {
        let v = v.index(g.n());
        let old = agent_cost(&g, &cfg, v).total;
        let moves = improving_moves(&g, &cfg, v);
        for m in &moves {
            let h = apply_move(&g, v, m.mv).unwrap();
            prop_assert_eq!(agent_cost(&h, &cfg, v), m.new_cost);
            prop_assert!(m.new_cost.total < old);
        }
        let best = best_greedy_move(&g, &cfg, v);
        prop_assert_eq!(best.is_some(), !moves.is_empty());
        if let Some(b) = best {
            prop_assert!(moves.iter().all(|m| m.new_cost.total >= b.new_cost.total));
        }
    }

    #[test]
    fn buy_then_delete_restores_cost(g in arb_connected(7), cfg in arb_config(), v in any::<prop::sample::Index>(), w in any::<prop::sample::Index>()) {
        let v = v.index(g.n());
        let w = w.index(g.n());
        prop_assume!(v != w && !g.adjacent(v, w));
        let h = apply_move(&g, v, Move::Buy { target: w }).unwrap();
        let back = apply_move(&h, v, Move::Delete { target: w }).unwrap();
        prop_assert_eq!(&back, &g);
        prop_assert_eq!(agent_cost(&back, &cfg, v), agent_cost(&g, &cfg, v));
    }

    #[test]
    fn medians_and_centers_match_brute_force(t in arb_tree(10), pick in any::<prop::sample::Index>()) {
        let n = t.n();
        let arc = t.arcs()[pick.index(t.arcs().len())];
        for sub in [Subtree::Whole, Subtree::Hanging { root: arc.1, parent: arc.0 }] {
            let inside = match sub {
                Subtree::Whole => vec![true; n],
                Subtree::Hanging { root, parent } => subtree_members(&t, root, parent),
            };
            let mut sums = Vec::new();
            let mut eccs = Vec::new();
            for x in (0..n).filter(|&x| inside[x]) {
                let d = bfs(&t, &inside, x);
                let ds: Vec<u32> = d.into_iter().flatten().collect();
                sums.push((ds.iter().sum::<u32>(), x));
                eccs.push((*ds.iter().max().unwrap(), x));
            }
            let min_sum = sums.iter().map(|p| p.0).min().unwrap();
            let medians: Vec<Vertex> = sums.iter().filter(|p| p.0 == min_sum).map(|p| p.1).collect();
            prop_assert_eq!(equilibria::one_median(&t, sub).unwrap(), medians);
            let radius = eccs.iter().map(|p| p.0).min().unwrap();
            let centers: Vec<Vertex> = eccs.iter().filter(|p| p.0 == radius).map(|p| p.1).collect();
            prop_assert_eq!(equilibria::one_center(&t, sub).unwrap(), (centers, radius));
        }
    }

    #[test]
    fn badly_connected_detection_agrees_with_multi_swaps(t in arb_tree(9), i in 0..ALPHAS.len()) {
        let cfg = GameConfig::max(frac(ALPHAS[i].0, ALPHAS[i].1)).unwrap();
        prop_assume!(check(&t, &cfg, Concept::Ge, &Search::default()).unwrap().holds);
        let found = detect_badly_connected(&t, &cfg).unwrap();
        if let Some(ms) = &found {
            let h = apply_strategy(&t, &ms.strategy).unwrap();
            prop_assert_eq!(agent_cost(&h, &cfg, ms.agent), ms.new_cost);
            prop_assert!(ms.new_cost.total < ms.old_cost.total);
            prop_assert_eq!(ms.strategy.targets.len(), t.owned(ms.agent).len());
        }
        // With the edge count fixed, the edge part is fixed, so a multi-swap
        // exists iff some same-size strategy lowers the distance cost.
        let any_swap = (0..t.n()).any(|v| {
            best_multi_swap(&t, &cfg, v, &Search::default()).unwrap().is_some()
        });
        if t.diameter().unwrap() > 2 {
            prop_assert_eq!(found.is_some(), any_swap);
        } else {
            prop_assert!(found.is_none());
        }
    }

    #[test]
    fn reduction_preserves_costs(g in arb_connected(8), cfg in arb_config(), u in any::<prop::sample::Index>(), bits in any::<u32>()) {
        let u = u.index(g.n());
        let (inst, map) = reduce(&g, &cfg, u).unwrap();
        let cand = candidates(&g, u);
        let s = ncg_core::Strategy::new(u, cand.iter().enumerate().filter(|(i, _)| bits >> i & 1 == 1).map(|(_, &w)| w));
        let game = agent_cost(&apply_strategy(&g, &s).unwrap(), &cfg, u).total;
        let open = map.open_set(&s).unwrap();
        if open.is_empty() {
            prop_assert!(!game.is_finite());
        } else {
            prop_assert_eq!(umfl_cost(&inst, &open).unwrap(), game);
            prop_assert_eq!(map.strategy_of(&open).unwrap(), s.clone());
        }
        let current = map.open_set(&g.strategy_of(u)).unwrap();
        if !current.is_empty() {
            prop_assert_eq!(
                improving_move(&inst, &current).unwrap().is_some(),
                best_greedy_move(&g, &cfg, u).is_some()
            );
        }
    }

    #[test]
    fn dynamics_bookkeeping(g in arb_connected(7), cfg in arb_config(), seed in any::<u64>()) {
        let schedule = Schedule::new(Policy::Random { seed }, 60).unwrap();
        let mut replay = g.clone();
        let mut ok = true;
        let t = dynamics::run_with(&g, &cfg, &schedule, |step, h| {
            let next = apply_move(&replay, step.agent, step.mv).unwrap();
            ok &= &next == h;
            ok &= agent_cost(h, &cfg, step.agent) == step.cost_after;
            ok &= step.cost_after.total < step.cost_before.total;
            ok &= social_cost(h, &cfg) == step.social_cost;
            replay = next;
        });
        prop_assert!(ok);
        prop_assert_eq!(&replay, &t.terminal);
        prop_assert_eq!(t.initial_social_cost, social_cost(&g, &cfg));
        if t.converged {
            prop_assert!(check(&t.terminal, &cfg, Concept::Ge, &Search::default()).unwrap().holds);
        }
    }

    #[test]
    fn instance_files_round_trip(g in arb_connected(9), cfg in arb_config()) {
        let file = InstanceFile::new(&g, &cfg);
        let back = InstanceFile::parse(&file.to_json()).unwrap();
        prop_assert_eq!(&back, &file);
        prop_assert_eq!(back.graph().unwrap(), g);
    }

    #[test]
    fn fractions_round_trip(p in -10_000i128..10_000, q in 1i128..10_000) {
        let r = frac(p, q);
        prop_assert_eq!(parse_fraction(&format_fraction(&r)).unwrap(), r);
    }
}
