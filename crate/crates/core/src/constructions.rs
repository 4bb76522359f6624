//! Parametric witness networks with their expected classifications.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::equilibria::Concept;
use crate::error::{Error, Result};
use crate::graph::{GameConfig, Objective, OwnershipGraph, Vertex};
use crate::rational::{frac, int, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Expectation {
    pub concept: Concept,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fixture {
    pub name: String,
    pub graph: OwnershipGraph,
    pub alpha: Rational,
    pub objective: Objective,
    pub expectations: Vec<Expectation>,
    /// Expected `c(v) / c*(v)` for `ratio_agent`.
    pub expected_ratio: Option<Rational>,
    pub ratio_agent: Option<Vertex>,
    /// Named vertices, e.g. `"u"`.
    pub labels: BTreeMap<String, Vertex>,
    /// Set when the drawing this network is modelled on could not be read
    /// off exactly; such fixtures are excluded from acceptance checks.
    pub unverified_figure: bool,
}

impl Fixture {
    fn new(name: impl Into<String>, graph: OwnershipGraph, alpha: Rational, objective: Objective) -> Self {
        Fixture {
            name: name.into(),
            graph,
            alpha,
            objective,
            expectations: Vec::new(),
            expected_ratio: None,
            ratio_agent: None,
            labels: BTreeMap::new(),
            unverified_figure: false,
        }
    }

    pub fn config(&self) -> GameConfig {
        GameConfig::new(self.alpha, self.objective).expect("fixtures use a positive alpha")
    }

    pub fn label(&self, name: &str) -> Vertex {
        self.labels[name]
    }

    pub fn expects(&self, concept: Concept) -> Option<bool> {
        self.expectations
            .iter()
            .find(|e| e.concept == concept)
            .map(|e| e.holds)
    }

    fn expect(mut self, concept: Concept, holds: bool) -> Self {
        self.expectations.push(Expectation { concept, holds });
        self
    }

    fn with_label(mut self, name: &str, v: Vertex) -> Self {
        self.labels.insert(name.to_string(), v);
        self
    }

    fn with_ratio(mut self, agent: Vertex, ratio: Rational) -> Self {
        self.ratio_agent = Some(agent);
        self.expected_ratio = Some(ratio);
        self
    }
}

fn positive(alpha: Rational) -> Result<()> {
    GameConfig::sum(alpha).map(|_| ())
}

fn build(n: usize, arcs: Vec<(Vertex, Vertex)>) -> OwnershipGraph {
    OwnershipGraph::new(n, arcs).expect("generators emit valid arc sets")
}

/// The 5-cycle. Edge `{i, i+1}` is owned by `i` when `pattern[i]` is set,
/// otherwise by `i+1` (indices mod 5).
pub fn c5(pattern: [bool; 5], alpha: Rational) -> Result<Fixture> {
    positive(alpha)?;
    let arcs = (0..5)
        .map(|i| if pattern[i] { (i, (i + 1) % 5) } else { ((i + 1) % 5, i) })
        .collect();
    let ge = int(1) <= alpha && alpha <= int(4);
    let uniform = pattern.iter().all(|&p| p) || pattern.iter().all(|&p| !p);
    let mut f = Fixture::new("c5", build(5, arcs), alpha, Objective::Sum)
        .expect(Concept::Ge, ge)
        .expect(Concept::Se, true)
        .expect(Concept::Ase, true);
    if uniform {
        f = f.expect(Concept::Ne, ge);
    }
    Ok(f)
}

/// C5 with every agent owning exactly one edge.
pub fn c5_uniform(alpha: Rational) -> Result<Fixture> {
    c5([true; 5], alpha)
}

/// C5 where agent 0 owns both of her edges and agent 4 owns none.
pub fn c5_double_owner(alpha: Rational) -> Result<Fixture> {
    let mut f = c5([true, true, true, true, false], alpha)?;
    f.name = "c5-double-owner".into();
    if alpha == int(3) {
        f = f.expect(Concept::Ne, false);
    }
    f.unverified_figure = true;
    Ok(f.with_label("u", 0))
}

/// A 5-cycle `0..5` with a pendant leaf `5 + i` at every cycle vertex `i`.
/// Cycle vertex `i` owns the arc to her leaf and the arc to `i + 1`.
pub fn cycle_with_leaves(alpha: Rational) -> Result<Fixture> {
    positive(alpha)?;
    let mut arcs = Vec::new();
    for i in 0..5 {
        arcs.push((i, 5 + i));
        arcs.push((i, (i + 1) % 5));
    }
    let ge = int(6) <= alpha && alpha <= int(8);
    let mut f = Fixture::new("cycle-with-leaves", build(10, arcs), alpha, Objective::Sum)
        .expect(Concept::Ge, ge)
        .expect(Concept::Se, false)
        .expect(Concept::Ase, true)
        .with_label("u", 0)
        .with_label("l_u", 5);
    if alpha == int(7) {
        f = f.expect(Concept::Ne, true);
    }
    if !ge {
        f = f.expect(Concept::Ne, false);
    }
    Ok(f)
}

/// C5 plus a pendant leaf 5 at vertex 0; agent 0 owns both of her cycle
/// edges and the leaf owns its edge.
///
/// Chosen by search among all ownerships of that graph as one matching the
/// described behavior: GE for `3 <= alpha <= 4`, neither SE nor NE at 7/2.
pub fn c5_with_pendant(alpha: Rational) -> Result<Fixture> {
    positive(alpha)?;
    let arcs = H4_ARCS.to_vec();
    let ge = int(3) <= alpha && alpha <= int(4);
    let mut f = Fixture::new("c5-with-pendant", build(6, arcs), alpha, Objective::Sum)
        .expect(Concept::Ge, ge)
        .expect(Concept::Se, false)
        .with_label("leaf", 5);
    if alpha == frac(7, 2) {
        f = f.expect(Concept::Ne, false);
    }
    f.unverified_figure = true;
    Ok(f)
}

const H4_ARCS: [(Vertex, Vertex); 6] = [(0, 1), (0, 4), (1, 2), (3, 2), (4, 3), (5, 0)];

/// Vertex layout of [`sum_lower_bound`].
pub mod sum_layout {
    use crate::graph::Vertex;

    pub const U: Vertex = 0;
    pub const W: Vertex = 1;
    pub const X: Vertex = 2;

    /// `y_i` for `1 <= i <= k`.
    pub fn y(i: usize) -> Vertex {
        2 + i
    }

    /// `z_i^j` for `1 <= i, j <= k`.
    pub fn z(k: usize, i: usize, j: usize) -> Vertex {
        3 + k + (i - 1) * k + (j - 1)
    }
}

/// Sum-GE network at `alpha = k + 1` whose agent `u` improves by a factor
/// tending to 3/2 when switching to a single edge towards `x`.
pub fn sum_lower_bound(k: usize) -> Result<Fixture> {
    use sum_layout::*;
    if k < 2 {
        return Err(Error::ParameterDomain("sum_lower_bound needs k >= 2".into()));
    }
    let n = k * k + k + 3;
    let mut arcs = vec![(W, X), (W, U)];
    for i in 1..=k {
        arcs.push((U, y(i)));
        for j in 1..=k {
            arcs.push((z(k, i, j), X));
            arcs.push((z(k, i, j), y(i)));
        }
    }
    // Circulant ownership of the y-clique: y_i owns the edges to the next
    // (k-1)/2 vertices, plus the diametral one when k is even.
    for i in 0..k {
        for d in 1..=(k - 1) / 2 {
            arcs.push((y(i + 1), y((i + d) % k + 1)));
        }
        if k % 2 == 0 && i < k / 2 {
            arcs.push((y(i + 1), y(i + k / 2 + 1)));
        }
    }
    let k = k as i128;
    let ratio = frac(3 * k * k + 2 * k + 3, 2 * k * k + 4 * k + 3);
    Ok(
        Fixture::new(format!("sum-lower-bound-{k}"), build(n, arcs), int(k + 1), Objective::Sum)
            .expect(Concept::Ge, true)
            .expect(Concept::Ne, false)
            .with_ratio(U, ratio)
            .with_label("u", U)
            .with_label("w", W)
            .with_label("x", X),
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NonlocalKind {
    Star,
    Clique,
    Spider,
}

impl std::str::FromStr for NonlocalKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "star" => Ok(NonlocalKind::Star),
            "clique" => Ok(NonlocalKind::Clique),
            "spider" => Ok(NonlocalKind::Spider),
            _ => Err(Error::ParameterDomain(format!("unknown kind {s:?}"))),
        }
    }
}

/// Max networks where agent `u` improves by buying, deleting or swapping
/// exactly `k` edges at once but by no operation on fewer edges.
///
/// * Star: `k + 2` vertices, center 0 owns every edge, `u` is leaf 1,
///   `alpha = 1/(2k)`.
/// * Clique: `k + 2` vertices, `u = 0` owns her edges to `1..=k`, vertex
///   `k + 1` owns the edge to `u`, `alpha = 1/(k-1)`.
/// * Spider: center `u = 0` owns arcs to `a_i`, `a_i` to `b_i`, `b_i` to
///   `c_i`; `alpha = 3`.
pub fn max_nonlocal(kind: NonlocalKind, k: usize) -> Result<Fixture> {
    if k < 2 {
        return Err(Error::ParameterDomain("max_nonlocal needs k >= 2".into()));
    }
    let (name, n, arcs, alpha) = match kind {
        NonlocalKind::Star => (
            "nonlocal-star",
            k + 2,
            (1..k + 2).map(|l| (0, l)).collect(),
            frac(1, 2 * k as i128),
        ),
        NonlocalKind::Clique => {
            let n = k + 2;
            let mut arcs = vec![(k + 1, 0)];
            for i in 0..n {
                for j in i + 1..n {
                    if !(i == 0 && j == k + 1) {
                        arcs.push((i, j));
                    }
                }
            }
            ("nonlocal-clique", n, arcs, frac(1, k as i128 - 1))
        }
        NonlocalKind::Spider => {
            let mut arcs = Vec::new();
            for i in 0..k {
                let a = 1 + 3 * i;
                arcs.extend([(0, a), (a, a + 1), (a + 1, a + 2)]);
            }
            ("nonlocal-spider", 1 + 3 * k, arcs, int(3))
        }
    };
    let u = if kind == NonlocalKind::Star { 1 } else { 0 };
    Ok(Fixture::new(format!("{name}-{k}"), build(n, arcs), alpha, Objective::Max).with_label("u", u))
}

/// Vertex layout of [`badly_connected_tree`] for a given `k`.
#[derive(Clone, Copy, Debug)]
pub struct TreeLayout {
    pub k: usize,
}

impl TreeLayout {
    pub const U: Vertex = 0;

    pub fn half(&self) -> usize {
        self.k.div_ceil(2)
    }

    /// `i`-th vertex (1-based) on path `side` (0 or 1).
    pub fn path(&self, side: usize, i: usize) -> Vertex {
        side * self.k + i
    }

    /// `i`-th vertex (1-based) of the branch hanging at the middle of path
    /// `side`.
    pub fn branch(&self, side: usize, i: usize) -> Vertex {
        2 * self.k + side * (self.half() - 1) + i
    }

    pub fn n(&self) -> usize {
        1 + 2 * self.k + 2 * (self.half() - 1)
    }
}

/// Max tree at `alpha = k + 1`: two paths of length `k` leave `u`, and a
/// path of length `ceil(k/2) - 1` hangs at the middle vertex of each. Every
/// arc is owned by the endpoint closer to `u`.
pub fn badly_connected_tree(k: usize) -> Result<Fixture> {
    if k < 3 || k % 2 == 0 {
        return Err(Error::ParameterDomain(
            "badly_connected_tree needs an odd k >= 3".into(),
        ));
    }
    let lay = TreeLayout { k };
    let h = lay.half();
    let mut arcs = Vec::new();
    for side in 0..2 {
        arcs.push((TreeLayout::U, lay.path(side, 1)));
        for i in 1..k {
            arcs.push((lay.path(side, i), lay.path(side, i + 1)));
        }
        let mut prev = lay.path(side, h);
        for i in 1..h {
            arcs.push((prev, lay.branch(side, i)));
            prev = lay.branch(side, i);
        }
    }
    let alpha = int(k as i128 + 1);
    let ratio = (int(2) * alpha + int(k as i128)) / (int(2) * alpha + int(h as i128));
    Ok(
        Fixture::new(format!("badly-connected-tree-{k}"), build(lay.n(), arcs), alpha, Objective::Max)
            .expect(Concept::Ge, true)
            .expect(Concept::Ne, false)
            .with_ratio(TreeLayout::U, ratio)
            .with_label("u", TreeLayout::U)
            .with_label("p1", lay.path(0, h))
            .with_label("p2", lay.path(1, h))
            .with_label("l1", lay.path(0, k))
            .with_label("l2", lay.path(1, k)),
    )
}

/// The 24-vertex Max network of diameter 4 that stays in GE for every
/// `alpha <= 1`: a directed 8-cycle `u_i = i`, and for every `j` an agent
/// `v_j = 8 + j` owning arcs to `u_j` and `w_j = 16 + j`, where `w_j` owns
/// an arc to `u_{j+4}`.
pub fn cheap_network(alpha: Rational) -> Result<Fixture> {
    positive(alpha)?;
    let mut arcs = Vec::new();
    for i in 0..8 {
        arcs.push((i, (i + 1) % 8));
        arcs.push((8 + i, i));
        arcs.push((8 + i, 16 + i));
        arcs.push((16 + i, (i + 4) % 8));
    }
    let mut f = Fixture::new("cheap-network", build(24, arcs), alpha, Objective::Max)
        .with_label("u0", 0)
        .with_label("v0", 8)
        .with_label("w0", 16);
    if alpha <= int(1) {
        f = f.expect(Concept::Ge, true);
    }
    Ok(f)
}

/// Vertex layout of [`max_lower_bound`].
pub mod max_layout {
    use crate::graph::Vertex;

    pub const U: Vertex = 0;
    pub const V: Vertex = 1;
    pub const L: [Vertex; 2] = [2, 3];
    pub const A: [Vertex; 2] = [4, 5];
    pub const B: [Vertex; 2] = [6, 7];

    /// `x_j` for `j >= 1`.
    pub fn x(j: usize) -> Vertex {
        8 + 2 * (j - 1)
    }

    /// `y_j` for `j >= 1`.
    pub fn y(j: usize) -> Vertex {
        9 + 2 * (j - 1)
    }
}

/// Max-GE network (for `1 <= alpha <= 2`) on `2k + 8` vertices in which `u`
/// owns `k + 2` edges but would rather own the single edge to `v`.
pub fn max_lower_bound(k: usize, alpha: Rational) -> Result<Fixture> {
    use max_layout::*;
    positive(alpha)?;
    if k < 1 {
        return Err(Error::ParameterDomain("max_lower_bound needs k >= 1".into()));
    }
    let mut arcs = vec![(U, A[0]), (U, A[1])];
    for i in 0..2 {
        arcs.extend([(B[i], V), (B[i], A[i]), (L[i], B[i])]);
    }
    for j in 1..=k {
        arcs.extend([(U, x(j)), (y(j), x(j)), (y(j), V)]);
    }
    let in_range = int(1) <= alpha && alpha <= int(2);
    let mut f = Fixture::new(format!("max-lower-bound-{k}"), build(2 * k + 8, arcs), alpha, Objective::Max)
        .with_label("u", U)
        .with_label("v", V);
    if in_range {
        let ratio = (alpha * int(2 + k as i128) + int(3)) / (alpha + int(3));
        f = f
            .expect(Concept::Ge, true)
            .expect(Concept::Ne, false)
            .with_ratio(U, ratio);
    }
    Ok(f)
}

/// A Max star on `n` vertices with `alpha < 1/(n-2)`. Either the center owns
/// every edge or every leaf owns her edge.
pub fn cheap_star(n: usize, alpha: Rational, center_owned: bool) -> Result<Fixture> {
    positive(alpha)?;
    if n < 4 {
        return Err(Error::ParameterDomain("a cheap star needs n >= 4".into()));
    }
    let m = int(n as i128 - 2);
    if alpha * m >= int(1) {
        return Err(Error::ParameterDomain(format!(
            "a cheap star on {n} vertices needs alpha < 1/{}",
            n - 2
        )));
    }
    let arcs = (1..n)
        .map(|l| if center_owned { (0, l) } else { (l, 0) })
        .collect();
    let ratio = if center_owned {
        int(2) / (m * alpha + int(1))
    } else {
        (alpha + int(2)) / ((m + int(1)) * alpha + int(1))
    };
    Ok(
        Fixture::new(format!("cheap-star-{n}"), build(n, arcs), alpha, Objective::Max)
            .expect(Concept::Ge, true)
            .expect(Concept::Ne, false)
            .with_ratio(1, ratio)
            .with_label("center", 0)
            .with_label("leaf", 1),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_sizes() {
        for k in 2..=6 {
            let f = sum_lower_bound(k).unwrap();
            assert_eq!(f.graph.n(), k * k + k + 3);
            assert_eq!(f.graph.edge_count(), 2 + k + k * (k - 1) / 2 + 2 * k * k);
        }
        for k in [3, 5, 7, 9, 11] {
            let f = badly_connected_tree(k).unwrap();
            assert!(f.graph.is_tree());
            assert_eq!(f.graph.n(), 1 + 2 * k + 2 * (k.div_ceil(2) - 1));
        }
        for k in 1..=5 {
            let f = max_lower_bound(k, int(2)).unwrap();
            assert_eq!(f.graph.n(), 2 * k + 8);
            assert_eq!(f.graph.owned(0).len(), k + 2);
        }
        let g = cheap_network(int(1)).unwrap().graph;
        assert_eq!((g.n(), g.edge_count()), (24, 32));
        assert_eq!(cycle_with_leaves(int(7)).unwrap().graph.edge_count(), 10);
    }

    #[test]
    fn ratios_in_closed_form() {
        assert_eq!(sum_lower_bound(3).unwrap().expected_ratio, Some(frac(36, 33)));
        assert_eq!(badly_connected_tree(7).unwrap().expected_ratio, Some(frac(23, 20)));
        assert_eq!(max_lower_bound(1, int(2)).unwrap().expected_ratio, Some(frac(9, 5)));
        assert_eq!(
            cheap_star(6, frac(1, 100), true).unwrap().expected_ratio,
            Some(frac(200, 104))
        );
    }

    #[test]
    fn parameter_domains() {
        assert!(cheap_star(4, frac(1, 2), true).is_err());
        assert!(cheap_star(3, frac(1, 100), true).is_err());
        assert!(badly_connected_tree(4).is_err());
        assert!(sum_lower_bound(1).is_err());
        assert!(max_nonlocal(NonlocalKind::Clique, 1).is_err());
        assert!(c5_uniform(int(0)).is_err());
    }

    #[test]
    fn nonlocal_clique_ownership() {
        let f = max_nonlocal(NonlocalKind::Clique, 3).unwrap();
        assert_eq!(f.graph.owned(0), &[1, 2, 3]);
        assert!(f.graph.owns(4, 0));
        assert_eq!(f.graph.edge_count(), 10);
        assert_eq!(f.alpha, frac(1, 2));
    }
}
