//! Graph enumeration and random instances for exhaustive and sampled
//! checks.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::graph::{OwnershipGraph, Vertex};

pub type Edge = (Vertex, Vertex);

fn adjacency(n: usize, edges: &[Edge]) -> Vec<Vec<Vertex>> {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    adj
}

fn rooted_code(adj: &[Vec<Vertex>], v: Vertex, parent: Option<Vertex>) -> String {
    let mut kids: Vec<String> = adj[v]
        .iter()
        .filter(|&&w| Some(w) != parent)
        .map(|&w| rooted_code(adj, w, Some(v)))
        .collect();
    kids.sort();
    format!("({})", kids.concat())
}

fn tree_centers(adj: &[Vec<Vertex>]) -> Vec<Vertex> {
    let n = adj.len();
    if n <= 2 {
        return (0..n).collect();
    }
    let mut degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut leaves: Vec<Vertex> = (0..n).filter(|&v| degree[v] <= 1).collect();
    let mut left = n;
    while left > 2 {
        left -= leaves.len();
        let mut next = Vec::new();
        for &l in &leaves {
            degree[l] = 0;
        }
        for &l in &leaves {
            for &w in &adj[l] {
                if degree[w] > 0 {
                    degree[w] -= 1;
                    if degree[w] == 1 {
                        next.push(w);
                    }
                }
            }
        }
        leaves = next;
    }
    leaves.sort_unstable();
    leaves
}

/// Isomorphism-invariant code of a tree given by its edges.
pub fn tree_code(n: usize, edges: &[Edge]) -> String {
    let adj = adjacency(n, edges);
    tree_centers(&adj)
        .into_iter()
        .map(|c| rooted_code(&adj, c, None))
        .min()
        .unwrap_or_default()
}

/// One edge list per unlabeled tree on `n` vertices.
pub fn unlabeled_trees(n: usize) -> Vec<Vec<Edge>> {
    if n == 0 {
        return Vec::new();
    }
    let mut level: Vec<Vec<Edge>> = vec![Vec::new()];
    for size in 1..n {
        let mut seen = BTreeSet::new();
        let mut next = Vec::new();
        for t in &level {
            for v in 0..size {
                let mut e = t.clone();
                e.push((v, size));
                if seen.insert(tree_code(size + 1, &e)) {
                    next.push(e);
                }
            }
        }
        level = next;
    }
    level
}

fn edge_index(n: usize) -> Vec<Edge> {
    (0..n)
        .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
        .collect()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..n).collect();
    heap_permute(&mut p, n, &mut out);
    out
}

fn heap_permute(p: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k <= 1 {
        out.push(p.clone());
        return;
    }
    for i in 0..k {
        heap_permute(p, k - 1, out);
        let j = if k % 2 == 0 { i } else { 0 };
        p.swap(j, k - 1);
    }
}

fn is_connected(n: usize, edges: &[Edge]) -> bool {
    if n == 0 {
        return true;
    }
    let adj = adjacency(n, edges);
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// One edge list per unlabeled simple graph on `n <= 7` vertices,
/// optionally only the connected ones.
pub fn unlabeled_graphs(n: usize, connected_only: bool) -> Vec<Vec<Edge>> {
    assert!(n <= 7, "graph enumeration is limited to 7 vertices");
    let pairs = edge_index(n);
    let mut slot = vec![vec![0usize; n]; n];
    for (i, &(a, b)) in pairs.iter().enumerate() {
        slot[a][b] = i;
        slot[b][a] = i;
    }
    let perms = permutations(n);
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for mask in 0u32..(1u32 << pairs.len()) {
        let canon = perms
            .iter()
            .map(|p| {
                pairs
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .fold(0u32, |acc, (_, &(a, b))| acc | 1 << slot[p[a]][p[b]])
            })
            .min()
            .unwrap_or(mask);
        if canon != mask || !seen.insert(canon) {
            continue;
        }
        let edges: Vec<Edge> = pairs
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, &e)| e)
            .collect();
        if !connected_only || is_connected(n, &edges) {
            out.push(edges);
        }
    }
    out
}

/// The graph with edge `i` owned by its first endpoint when bit `i` of
/// `mask` is clear and by its second endpoint otherwise.
pub fn orient(n: usize, edges: &[Edge], mask: u64) -> OwnershipGraph {
    let arcs = edges
        .iter()
        .enumerate()
        .map(|(i, &(a, b))| if mask >> i & 1 == 0 { (a, b) } else { (b, a) });
    OwnershipGraph::new(n, arcs).expect("simple graphs have valid orientations")
}

/// Every ownership assignment of the edges when there are at most `limit`
/// of them, otherwise `limit` distinct random ones.
pub fn orientations<R: Rng>(n: usize, edges: &[Edge], limit: usize, rng: &mut R) -> Vec<OwnershipGraph> {
    let m = edges.len();
    assert!(m < 64, "too many edges to orient");
    let total: u128 = 1u128 << m;
    if total <= limit as u128 {
        return (0..total as u64).map(|mask| orient(n, edges, mask)).collect();
    }
    let mut masks = BTreeSet::new();
    while masks.len() < limit {
        masks.insert(rng.gen_range(0..total as u64));
    }
    masks.into_iter().map(|mask| orient(n, edges, mask)).collect()
}

/// A random connected graph: a random spanning tree plus every other pair
/// with probability `p`, each edge owned by a random endpoint.
pub fn random_connected<R: Rng>(n: usize, p: f64, rng: &mut R) -> OwnershipGraph {
    let mut order: Vec<Vertex> = (0..n).collect();
    order.shuffle(rng);
    let mut edges = BTreeSet::new();
    for i in 1..n {
        let j = rng.gen_range(0..i);
        let (a, b) = (order[i], order[j]);
        edges.insert((a.min(b), a.max(b)));
    }
    for (a, b) in edge_index(n) {
        if !edges.contains(&(a, b)) && rng.gen_bool(p) {
            edges.insert((a, b));
        }
    }
    let arcs = edges
        .into_iter()
        .map(|(a, b)| if rng.gen_bool(0.5) { (a, b) } else { (b, a) });
    OwnershipGraph::new(n, arcs).expect("random graphs are simple")
}

/// A uniformly random valid strategy for `v`.
pub fn random_strategy<R: Rng>(g: &OwnershipGraph, v: Vertex, rng: &mut R) -> crate::graph::Strategy {
    let zero = g.incoming_owners(v);
    let targets = (0..g.n()).filter(|&w| w != v && !zero.contains(&w) && rng.gen_bool(0.5));
    crate::graph::Strategy::new(v, targets)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn tree_counts() {
        let counts: Vec<usize> = (1..=8).map(|n| unlabeled_trees(n).len()).collect();
        assert_eq!(counts, vec![1, 1, 1, 2, 3, 6, 11, 23]);
        for t in unlabeled_trees(7) {
            let g = OwnershipGraph::from_edges(7, &t).unwrap();
            assert!(g.is_tree());
        }
    }

    #[test]
    fn graph_counts() {
        let all: Vec<usize> = (1..=5).map(|n| unlabeled_graphs(n, false).len()).collect();
        assert_eq!(all, vec![1, 2, 4, 11, 34]);
        let conn: Vec<usize> = (1..=6).map(|n| unlabeled_graphs(n, true).len()).collect();
        assert_eq!(conn, vec![1, 1, 2, 6, 21, 112]);
    }

    #[test]
    fn orientation_sampling() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let path: Vec<Edge> = (0..7).map(|i| (i, i + 1)).collect();
        assert_eq!(orientations(8, &path, 200, &mut rng).len(), 128);
        let star: Vec<Edge> = (1..10).map(|i| (0, i)).collect();
        let sample = orientations(10, &star, 200, &mut rng);
        assert_eq!(sample.len(), 200);
        let distinct: BTreeSet<_> = sample.iter().map(|g| g.arcs().to_vec()).collect();
        assert_eq!(distinct.len(), 200);
    }

    #[test]
    fn random_graphs_are_connected() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..10 {
            let g = random_connected(n, 0.3, &mut rng);
            assert!(g.is_connected());
            let s = random_strategy(&g, 0, &mut rng);
            assert!(crate::graph::validate_strategy(&g, &s).is_ok());
        }
    }
}
