//! Weighted graphs: representation, parsing, and the edge operations
//! (contraction, deletion, minor-realizing weightings).
//!
//! Vertices are 0-based in the API. Graph files and JSON output use 1-based
//! labels.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{fmt_rational, int, parse_rational, Rational};

/// Unordered vertex pair stored with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
}

impl Edge {
    pub fn new(a: usize, b: usize) -> Self {
        if a <= b {
            Edge { u: a, v: b }
        } else {
            Edge { u: b, v: a }
        }
    }

    pub fn other(&self, x: usize) -> usize {
        if x == self.u {
            self.v
        } else {
            self.u
        }
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{},{}}}", self.u + 1, self.v + 1)
    }
}

/// Simple connected undirected graph topology. Edges are kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    edges: Vec<Edge>,
}

impl Graph {
    /// Builds a validated topology from 0-based vertex pairs.
    pub fn new(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut edges = Vec::new();
        for (a, b) in pairs {
            for x in [a, b] {
                if x >= n {
                    return Err(Error::VertexOutOfRange { vertex: x + 1, n });
                }
            }
            if a == b {
                return Err(Error::Loop { line: 0, vertex: a + 1 });
            }
            edges.push(Edge::new(a, b));
        }
        edges.sort();
        if let Some(w) = edges.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::ParallelEdge { line: 0, u: w[0].u + 1, v: w[0].v + 1 });
        }
        let components = count_components(n, &edges);
        if components != 1 {
            return Err(Error::Disconnected { components });
        }
        Ok(Graph { n, edges })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        self.edges.binary_search(&Edge::new(a, b)).ok()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edge_index(a, b).is_some()
    }

    /// Neighbor lists in ascending order.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for e in &self.edges {
            adj[e.u].push(e.v);
            adj[e.v].push(e.u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for e in &self.edges {
            deg[e.u] += 1;
            deg[e.v] += 1;
        }
        deg
    }
}

pub(crate) fn count_components(n: usize, edges: &[Edge]) -> usize {
    let mut dsu = Dsu::new(n);
    for e in edges {
        dsu.union(e.u, e.v);
    }
    (0..n).filter(|&x| dsu.find(x) == x).count()
}

pub(crate) struct Dsu {
    parent: Vec<usize>,
}

impl Dsu {
    pub(crate) fn new(n: usize) -> Self {
        Dsu { parent: (0..n).collect() }
    }

    pub(crate) fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = x;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    /// Unions keeping the smaller label as root.
    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// A graph topology together with a nonnegative exact weighting, aligned
/// with `graph().edges()`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WeightedGraph {
    graph: Graph,
    weights: Vec<Rational>,
}

impl WeightedGraph {
    pub fn new(graph: Graph, weights: Vec<Rational>) -> Result<Self> {
        if weights.len() != graph.edge_count() {
            return Err(Error::WeightingLength { expected: graph.edge_count(), got: weights.len() });
        }
        if let Some(w) = weights.iter().find(|w| w.is_negative()) {
            return Err(Error::NegativeWeight { line: 0, weight: fmt_rational(w) });
        }
        Ok(WeightedGraph { graph, weights })
    }

    pub fn unit(graph: Graph) -> Self {
        let weights = vec![int(1); graph.edge_count()];
        WeightedGraph { graph, weights }
    }

    /// Builds from 0-based `(u, v, w)` triples.
    pub fn from_triples(n: usize, triples: &[(usize, usize, Rational)]) -> Result<Self> {
        let graph = Graph::new(n, triples.iter().map(|(a, b, _)| (*a, *b)))?;
        let mut weights = vec![int(0); graph.edge_count()];
        for (a, b, w) in triples {
            weights[graph.edge_index(*a, *b).expect("edge just inserted")] = w.clone();
        }
        WeightedGraph::new(graph, weights)
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn n(&self) -> usize {
        self.graph.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.graph.edges
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn weight(&self, a: usize, b: usize) -> Option<&Rational> {
        self.graph.edge_index(a, b).map(|i| &self.weights[i])
    }

    /// Same topology, new weighting.
    pub fn reweighted(&self, weights: Vec<Rational>) -> Result<Self> {
        WeightedGraph::new(self.graph.clone(), weights)
    }

    pub fn scaled(&self, c: &Rational) -> Result<Self> {
        self.reweighted(self.weights.iter().map(|w| w * c).collect())
    }

    pub fn is_all_zero(&self) -> bool {
        self.weights.iter().all(Zero::is_zero)
    }

    /// Serializes in the graph file format.
    pub fn to_graph_file(&self) -> String {
        let mut out = format!("graph {}\n", self.n());
        for (e, w) in self.edges().iter().zip(&self.weights) {
            out.push_str(&format!("{} {} {}\n", e.u + 1, e.v + 1, fmt_rational(w)));
        }
        out
    }
}

/// Parses the graph file format: `#` comments, a `graph <n>` header, then
/// `<u> <v> <w>` lines with 1-based labels and decimal weights.
pub fn parse_graph(text: &str) -> Result<WeightedGraph> {
    let mut lines =
        text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (header_line, header) =
        lines.next().ok_or(Error::Malformed { line: 0, msg: "missing `graph <n>` header".into() })?;
    let mut tokens = header.split_whitespace();
    let n: usize = match (tokens.next(), tokens.next(), tokens.next()) {
        (Some("graph"), Some(n), None) => {
            n.parse().map_err(|_| Error::Malformed { line: header_line, msg: format!("bad vertex count `{n}`") })?
        }
        _ => return Err(Error::Malformed { line: header_line, msg: "expected `graph <n>`".into() }),
    };
    if n == 0 {
        return Err(Error::Malformed { line: header_line, msg: "graph needs at least one vertex".into() });
    }

    let mut edges: BTreeMap<Edge, (usize, Rational)> = BTreeMap::new();
    for (line, content) in lines {
        let tokens: Vec<&str> = content.split_whitespace().collect();
        if tokens.len() != 3 {
            return Err(Error::Malformed { line, msg: "expected `<u> <v> <w>`".into() });
        }
        let mut ends = [0usize; 2];
        for (slot, tok) in ends.iter_mut().zip(&tokens[..2]) {
            let x: usize =
                tok.parse().map_err(|_| Error::Malformed { line, msg: format!("bad vertex label `{tok}`") })?;
            if x == 0 || x > n {
                return Err(Error::VertexOutOfRange { vertex: x, n });
            }
            *slot = x - 1;
        }
        let w = parse_rational(tokens[2])
            .ok_or_else(|| Error::Malformed { line, msg: format!("bad weight `{}`", tokens[2]) })?;
        if ends[0] == ends[1] {
            return Err(Error::Loop { line, vertex: ends[0] + 1 });
        }
        if w.is_negative() {
            return Err(Error::NegativeWeight { line, weight: tokens[2].to_string() });
        }
        let e = Edge::new(ends[0], ends[1]);
        if edges.insert(e, (line, w)).is_some() {
            return Err(Error::ParallelEdge { line, u: e.u + 1, v: e.v + 1 });
        }
    }
    let list: Vec<Edge> = edges.keys().copied().collect();
    let components = count_components(n, &list);
    if components != 1 {
        return Err(Error::Disconnected { components });
    }
    let weights = edges.into_values().map(|(_, w)| w).collect();
    Ok(WeightedGraph { graph: Graph { n, edges: list }, weights })
}

fn require_edge(g: &Graph, a: usize, b: usize) -> Result<usize> {
    g.edge_index(a, b).ok_or(Error::EdgeAbsent { u: a + 1, v: b + 1 })
}

/// Contracts `{a, b}`. The merged vertex keeps the smaller label and labels
/// above the larger one shift down by one. Parallel edges keep the minimum
/// weight.
pub fn contract_edge(g: &WeightedGraph, a: usize, b: usize) -> Result<WeightedGraph> {
    let idx = require_edge(&g.graph, a, b)?;
    let Edge { u: keep, v: gone } = g.edges()[idx];
    let relabel = |x: usize| -> usize {
        if x == gone {
            keep
        } else if x > gone {
            x - 1
        } else {
            x
        }
    };
    let mut merged: BTreeMap<Edge, Rational> = BTreeMap::new();
    for (i, (e, w)) in g.edges().iter().zip(&g.weights).enumerate() {
        if i == idx {
            continue;
        }
        let image = Edge::new(relabel(e.u), relabel(e.v));
        merged
            .entry(image)
            .and_modify(|cur| {
                if w < cur {
                    *cur = w.clone();
                }
            })
            .or_insert_with(|| w.clone());
    }
    let edges: Vec<Edge> = merged.keys().copied().collect();
    let weights = merged.into_values().collect();
    Ok(WeightedGraph { graph: Graph { n: g.n() - 1, edges }, weights })
}

/// Removes `{a, b}`; fails if that disconnects the graph.
pub fn delete_edge(g: &WeightedGraph, a: usize, b: usize) -> Result<WeightedGraph> {
    let idx = require_edge(&g.graph, a, b)?;
    let mut edges = g.edges().to_vec();
    let mut weights = g.weights.clone();
    let e = edges.remove(idx);
    weights.remove(idx);
    if count_components(g.n(), &edges) != 1 {
        return Err(Error::DeletionDisconnects { u: e.u + 1, v: e.v + 1 });
    }
    Ok(WeightedGraph { graph: Graph { n: g.n(), edges }, weights })
}

/// Adds a new edge `{a, b}` of weight `w`.
pub fn add_edge(g: &WeightedGraph, a: usize, b: usize, w: Rational) -> Result<WeightedGraph> {
    let mut triples: Vec<(usize, usize, Rational)> =
        g.edges().iter().zip(&g.weights).map(|(e, w)| (e.u, e.v, w.clone())).collect();
    triples.push((a, b, w));
    WeightedGraph::from_triples(g.n(), &triples)
}

/// `(n - 1) * max edge weight`: any added edge at least this heavy leaves
/// all shortest-path distances unchanged.
pub fn heavy_weight(g: &WeightedGraph) -> Rational {
    let max = g.weights.iter().max().cloned().unwrap_or_else(|| int(0));
    max * int(g.n() as i64 - 1)
}

/// Which edges of a host graph to contract and delete, and the factor applied
/// to the minor's weights on the kept edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeOpPlan {
    pub contract: Vec<Edge>,
    pub delete: Vec<Edge>,
    pub scale: Rational,
}

impl EdgeOpPlan {
    pub fn identity(scale: Rational) -> Self {
        EdgeOpPlan { contract: Vec::new(), delete: Vec::new(), scale }
    }
}

/// Result of applying a plan to a topology.
#[derive(Debug, Clone)]
pub struct AppliedPlan {
    pub minor: Graph,
    /// Host vertex -> minor vertex.
    pub block_of: Vec<usize>,
    /// Host edge index -> minor edge index, for kept edges.
    pub image: Vec<Option<usize>>,
}

/// Deletes, then contracts. Block labels follow the deterministic
/// contraction relabeling (blocks ordered by smallest member).
pub fn apply_plan(h: &Graph, plan: &EdgeOpPlan) -> Result<AppliedPlan> {
    if plan.scale.is_negative() {
        return Err(Error::PlanMismatch("scale must be nonnegative".into()));
    }
    #[derive(Clone, Copy, PartialEq)]
    enum Role {
        Keep,
        Contract,
        Delete,
    }
    let mut role = vec![Role::Keep; h.edge_count()];
    for (set, r) in [(&plan.contract, Role::Contract), (&plan.delete, Role::Delete)] {
        for e in set.iter() {
            let i = require_edge(h, e.u, e.v)?;
            if role[i] != Role::Keep {
                return Err(Error::PlanMismatch(format!("edge {e} listed twice")));
            }
            role[i] = r;
        }
    }
    let remaining: Vec<Edge> =
        h.edges.iter().zip(&role).filter(|(_, r)| **r != Role::Delete).map(|(e, _)| *e).collect();
    if count_components(h.n, &remaining) != 1 {
        return Err(Error::PlanMismatch("deletions disconnect the graph".into()));
    }
    let mut dsu = Dsu::new(h.n);
    for (e, r) in h.edges.iter().zip(&role) {
        if *r == Role::Contract {
            dsu.union(e.u, e.v);
        }
    }
    let roots: Vec<usize> = (0..h.n).map(|x| dsu.find(x)).collect();
    let mut label = vec![usize::MAX; h.n];
    let mut next = 0;
    for x in 0..h.n {
        if roots[x] == x {
            label[x] = next;
            next += 1;
        }
    }
    let block_of: Vec<usize> = roots.iter().map(|&r| label[r]).collect();
    let mut minor_edges: Vec<Edge> = Vec::new();
    for (e, r) in h.edges.iter().zip(&role) {
        if *r != Role::Keep {
            continue;
        }
        let (bu, bv) = (block_of[e.u], block_of[e.v]);
        if bu == bv {
            return Err(Error::PlanMismatch(format!(
                "edge {e} lies inside a contracted block but is neither contracted nor deleted"
            )));
        }
        minor_edges.push(Edge::new(bu, bv));
    }
    minor_edges.sort();
    minor_edges.dedup();
    let image = h
        .edges
        .iter()
        .zip(&role)
        .map(|(e, r)| {
            (*r == Role::Keep).then(|| {
                minor_edges.binary_search(&Edge::new(block_of[e.u], block_of[e.v])).expect("kept edge has an image")
            })
        })
        .collect();
    Ok(AppliedPlan { minor: Graph { n: next, edges: minor_edges }, block_of, image })
}

/// Weighting of the host `h` whose distance spectrum is the minor's spectrum
/// scaled by `plan.scale`, padded with zeros: contracted edges get 0, kept
/// edges `scale * weight`, deleted edges one more than the heavy bound of the
/// kept weights.
pub fn minor_weighting(h: &Graph, plan: &EdgeOpPlan, minor: &WeightedGraph) -> Result<Vec<Rational>> {
    let applied = apply_plan(h, plan)?;
    if &applied.minor != minor.graph() {
        return Err(Error::PlanMismatch("plan applied to the host does not yield the minor's topology".into()));
    }
    let kept: Vec<Rational> = applied
        .image
        .iter()
        .map(|img| img.map(|j| &minor.weights()[j] * &plan.scale).unwrap_or_else(|| int(0)))
        .collect();
    let max_kept = kept.iter().max().cloned().unwrap_or_else(|| int(0));
    let heavy = max_kept * int(h.n() as i64 - 1) + int(1);
    let deleted: Vec<bool> = h.edges.iter().map(|e| plan.delete.contains(e)).collect();
    Ok(kept.into_iter().zip(deleted).map(|(w, del)| if del { heavy.clone() } else { w }).collect())
}
