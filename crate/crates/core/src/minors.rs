//! K2,3 subdivisions, brute-force minor testing, the K2,3 distance-minor test
//! and the weightings that force extra positive eigenvalues.

use std::collections::{HashSet, VecDeque};

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{apply_plan, minor_weighting, Edge, EdgeOpPlan, Graph, WeightedGraph};
use crate::lp::feasible_point;
use crate::metric::DistanceMatrix;
use crate::rational::{fmt_rational, frac, int, Rational};
use crate::splits::{decompose, Subset, DEFAULT_SPLIT_CAP};

/// Default bound on host size for [`has_minor`].
pub const DEFAULT_MINOR_CAP: usize = 12;

/// The K2,3 pattern: vertices 0, 1, 2 form the side of size three, 3 and 4
/// the side of size two, matching the row order of its distance matrix.
pub fn k23() -> Graph {
    complete_multipartite_topology(&[3, 2])
}

/// `[[0,2,2,1,1],[2,0,2,1,1],[2,2,0,1,1],[1,1,1,0,2],[1,1,1,2,0]]`.
pub fn k23_distance_matrix() -> DistanceMatrix {
    DistanceMatrix::from_flat_unchecked(
        5,
        (0..5)
            .flat_map(|i| (0..5).map(move |j| (i, j)))
            .map(|(i, j)| {
                if i == j {
                    int(0)
                } else if (i < 3) == (j < 3) {
                    int(2)
                } else {
                    int(1)
                }
            })
            .collect(),
    )
}

/// Complete multipartite graph with parts laid out consecutively in the
/// given order.
pub(crate) fn complete_multipartite_topology(parts: &[usize]) -> Graph {
    let mut part_of = Vec::new();
    for (p, &size) in parts.iter().enumerate() {
        part_of.extend(std::iter::repeat(p).take(size));
    }
    let n = part_of.len();
    let pairs = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).filter(|&(i, j)| part_of[i] != part_of[j]);
    Graph::new(n, pairs.collect::<Vec<_>>()).expect("complete multipartite graph with >= 2 parts is connected")
}

/// A subdivision model: pattern vertex `i` sits at host vertex `branch[i]`,
/// and pattern edge `pattern_edges[k]` runs along `paths[k]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MinorCertificate {
    pub branch: Vec<usize>,
    pub pattern_edges: Vec<Edge>,
    pub paths: Vec<Vec<usize>>,
}

impl MinorCertificate {
    /// Paths are internally vertex-disjoint, avoid branch vertices in their
    /// interiors, and follow host edges between the right endpoints.
    pub fn is_valid(&self, g: &Graph) -> bool {
        let mut used = vec![false; g.n()];
        for &b in &self.branch {
            if b >= g.n() || std::mem::replace(&mut used[b], true) {
                return false;
            }
        }
        for (e, path) in self.pattern_edges.iter().zip(&self.paths) {
            if path.len() < 2 || path[0] != self.branch[e.u] || path[path.len() - 1] != self.branch[e.v] {
                return false;
            }
            if !path.windows(2).all(|w| g.has_edge(w[0], w[1])) {
                return false;
            }
            for &x in &path[1..path.len() - 1] {
                if std::mem::replace(&mut used[x], true) {
                    return false;
                }
            }
        }
        self.paths.len() == self.pattern_edges.len()
    }

    /// 1-based JSON view.
    pub fn to_report(&self) -> CertificateReport {
        CertificateReport {
            branch: self.branch.iter().map(|x| x + 1).collect(),
            paths: self.paths.iter().map(|p| p.iter().map(|x| x + 1).collect()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CertificateReport {
    pub branch: Vec<usize>,
    pub paths: Vec<Vec<usize>>,
}

/// Finds a K2,3 subdivision if one exists.
///
/// A K2,3 subdivision is a pair of branch vertices `a, b` joined by three
/// internally disjoint paths, each with at least one interior vertex. For
/// each candidate pair (higher degrees first) the edge `ab` is ignored and
/// vertex-disjoint `a`-`b` paths are found by unit-capacity augmenting paths.
pub fn has_k23_subdivision(g: &Graph) -> Option<MinorCertificate> {
    let deg = g.degrees();
    let mut order: Vec<usize> = (0..g.n()).filter(|&v| deg[v] >= 3).collect();
    order.sort_by_key(|&v| (std::cmp::Reverse(deg[v]), v));
    let adj = g.adjacency();
    for (i, &a) in order.iter().enumerate() {
        for &b in &order[i + 1..] {
            if let Some(paths) = disjoint_paths(&adj, a, b, 3) {
                return Some(certificate_from_theta(a, b, paths));
            }
        }
    }
    None
}

fn certificate_from_theta(a: usize, b: usize, paths: Vec<Vec<usize>>) -> MinorCertificate {
    let mut branch = vec![0; 5];
    branch[3] = a;
    branch[4] = b;
    let mut to_a = Vec::new();
    let mut to_b = Vec::new();
    for (i, p) in paths.iter().enumerate() {
        // p = a, x, ..., b with the first interior vertex as the branch vertex.
        branch[i] = p[1];
        to_a.push(vec![p[1], a]);
        to_b.push(p[1..].to_vec());
    }
    let pattern_edges = k23().edges().to_vec();
    let paths = pattern_edges.iter().map(|e| if e.v == 3 { to_a[e.u].clone() } else { to_b[e.u].clone() }).collect();
    MinorCertificate { branch, pattern_edges, paths }
}

struct Arc {
    to: usize,
    cap: u8,
    rev: usize,
}

/// Up to `want` internally vertex-disjoint `a`-`b` paths of length >= 2, or
/// `None` if fewer exist.
fn disjoint_paths(adj: &[Vec<usize>], a: usize, b: usize, want: usize) -> Option<Vec<Vec<usize>>> {
    let n = adj.len();
    // Vertex v splits into v_in = 2v and v_out = 2v + 1.
    let mut arcs: Vec<Vec<Arc>> = (0..2 * n).map(|_| Vec::new()).collect();
    let add = |arcs: &mut Vec<Vec<Arc>>, from: usize, to: usize| {
        let rf = arcs[to].len();
        let rt = arcs[from].len();
        arcs[from].push(Arc { to, cap: 1, rev: rf });
        arcs[to].push(Arc { to: from, cap: 0, rev: rt });
    };
    for v in 0..n {
        if v != a && v != b {
            add(&mut arcs, 2 * v, 2 * v + 1);
        }
        for &w in &adj[v] {
            if (v == a && w == b) || (v == b && w == a) {
                continue;
            }
            add(&mut arcs, 2 * v + 1, 2 * w);
        }
    }
    let (source, sink) = (2 * a + 1, 2 * b);
    let mut flow = 0;
    while flow < want {
        let mut prev: Vec<Option<(usize, usize)>> = vec![None; 2 * n];
        let mut seen = vec![false; 2 * n];
        seen[source] = true;
        let mut queue = VecDeque::from([source]);
        while let Some(x) = queue.pop_front() {
            if x == sink {
                break;
            }
            for (k, arc) in arcs[x].iter().enumerate() {
                if arc.cap > 0 && !seen[arc.to] {
                    seen[arc.to] = true;
                    prev[arc.to] = Some((x, k));
                    queue.push_back(arc.to);
                }
            }
        }
        if !seen[sink] {
            return None;
        }
        let mut x = sink;
        while let Some((p, k)) = prev[x] {
            arcs[p][k].cap -= 1;
            let r = arcs[p][k].rev;
            arcs[x][r].cap += 1;
            x = p;
        }
        flow += 1;
    }
    // Trace saturated forward arcs out of a_out.
    let is_forward_used = |from: usize, arc: &Arc| arc.cap == 0 && from % 2 == 1 && arc.to % 2 == 0;
    let mut paths = Vec::with_capacity(want);
    let starts: Vec<usize> = arcs[source].iter().filter(|arc| is_forward_used(source, arc)).map(|arc| arc.to).collect();
    for first_in in starts {
        let mut path = vec![a];
        let mut cur_in = first_in;
        loop {
            let v = cur_in / 2;
            path.push(v);
            if v == b {
                break;
            }
            let out = 2 * v + 1;
            let next = arcs[out]
                .iter()
                .find(|arc| is_forward_used(out, arc) && arc.to != out - 1)
                .map(|arc| arc.to)
                .expect("flow is conserved");
            cur_in = next;
        }
        paths.push(path);
    }
    Some(paths)
}

/// Branch sets of a minor model: `block_of[host vertex] = pattern vertex`.
/// Every host vertex belongs to some branch set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MinorModel {
    pub block_of: Vec<usize>,
}

/// Searches for `pattern` as a minor of `host`.
///
/// Both graphs are connected, so a model can be grown until its branch sets
/// cover the host. The search therefore only contracts edges, memoizing the
/// vertex partitions it has visited, and at `|V(pattern)|` blocks tests
/// whether the quotient contains the pattern as a spanning subgraph.
pub fn minor_model(host: &Graph, pattern: &Graph, cap: usize) -> Result<Option<MinorModel>> {
    if host.n() > cap {
        return Err(Error::OverCap { n: host.n(), cap });
    }
    let k = pattern.n();
    if k > host.n() || pattern.edge_count() > host.edge_count() {
        return Ok(None);
    }
    let padj = pattern.adjacency();
    let mut search = MinorSearch { host, k, pattern_edges: pattern.edge_count(), padj: &padj, seen: HashSet::new() };
    let start: Vec<usize> = (0..host.n()).collect();
    Ok(search.visit(start).map(|block_of| MinorModel { block_of }))
}

pub fn has_minor(host: &Graph, pattern: &Graph, cap: usize) -> Result<bool> {
    Ok(minor_model(host, pattern, cap)?.is_some())
}

struct MinorSearch<'a> {
    host: &'a Graph,
    k: usize,
    pattern_edges: usize,
    padj: &'a [Vec<usize>],
    seen: HashSet<Vec<usize>>,
}

impl MinorSearch<'_> {
    /// `rep[v]` is the smallest host vertex in v's block.
    fn visit(&mut self, rep: Vec<usize>) -> Option<Vec<usize>> {
        if !self.seen.insert(rep.clone()) {
            return None;
        }
        let blocks: Vec<usize> = (0..rep.len()).filter(|&v| rep[v] == v).collect();
        let index_of = |v: usize| blocks.binary_search(&rep[v]).expect("representative is a block");
        let m = blocks.len();
        let mut qadj = vec![0u64; m];
        for e in self.host.edges() {
            let (x, y) = (index_of(e.u), index_of(e.v));
            if x != y {
                qadj[x] |= 1 << y;
                qadj[y] |= 1 << x;
            }
        }
        let edges: usize = qadj.iter().map(|x| x.count_ones() as usize).sum::<usize>() / 2;
        if edges < self.pattern_edges {
            return None;
        }
        if m == self.k {
            let map = spanning_embedding(self.padj, &qadj)?;
            // map[pattern vertex] = quotient block; invert onto host vertices.
            let mut pattern_of_block = vec![0; m];
            for (p, &q) in map.iter().enumerate() {
                pattern_of_block[q] = p;
            }
            return Some((0..rep.len()).map(|v| pattern_of_block[index_of(v)]).collect());
        }
        for x in 0..m {
            for y in x + 1..m {
                if qadj[x] >> y & 1 == 0 {
                    continue;
                }
                let (keep, gone) = (blocks[x], blocks[y]);
                let next: Vec<usize> = rep.iter().map(|&r| if r == gone { keep } else { r }).collect();
                if let Some(found) = self.visit(next) {
                    return Some(found);
                }
            }
        }
        None
    }
}

/// Injective map of pattern vertices onto quotient vertices (same count)
/// sending pattern edges to quotient edges.
fn spanning_embedding(padj: &[Vec<usize>], qadj: &[u64]) -> Option<Vec<usize>> {
    let k = padj.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by_key(|&v| std::cmp::Reverse(padj[v].len()));
    let qdeg: Vec<usize> = qadj.iter().map(|x| x.count_ones() as usize).collect();
    let mut map = vec![usize::MAX; k];
    let mut used = 0u64;
    fn go(
        depth: usize,
        order: &[usize],
        padj: &[Vec<usize>],
        qadj: &[u64],
        qdeg: &[usize],
        map: &mut [usize],
        used: &mut u64,
    ) -> bool {
        if depth == order.len() {
            return true;
        }
        let p = order[depth];
        for q in 0..qadj.len() {
            if *used >> q & 1 == 1 || qdeg[q] < padj[p].len() {
                continue;
            }
            let fits = padj[p].iter().all(|&r| map[r] == usize::MAX || qadj[q] >> map[r] & 1 == 1);
            if !fits {
                continue;
            }
            map[p] = q;
            *used |= 1 << q;
            if go(depth + 1, order, padj, qadj, qdeg, map, used) {
                return true;
            }
            map[p] = usize::MAX;
            *used &= !(1 << q);
        }
        false
    }
    go(0, &order, padj, qadj, &qdeg, &mut map, &mut used).then_some(map)
}

/// Turns a minor model into an edge plan: a spanning tree of every branch set
/// is contracted, one host edge per pattern edge is kept, the rest deleted.
/// Also returns the minor's topology as produced by the plan.
pub fn plan_from_model(host: &Graph, pattern: &Graph, model: &MinorModel) -> Result<(EdgeOpPlan, Graph)> {
    let mut contract = Vec::new();
    let mut dsu_parent: Vec<usize> = (0..host.n()).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        if p[x] != x {
            let r = find(p, p[x]);
            p[x] = r;
        }
        p[x]
    }
    for e in host.edges() {
        if model.block_of[e.u] == model.block_of[e.v] {
            let (ru, rv) = (find(&mut dsu_parent, e.u), find(&mut dsu_parent, e.v));
            if ru != rv {
                dsu_parent[ru] = rv;
                contract.push(*e);
            }
        }
    }
    let mut keep: Vec<Edge> = Vec::new();
    for pe in pattern.edges() {
        let chosen = host.edges().iter().find(|e| {
            let (bu, bv) = (model.block_of[e.u], model.block_of[e.v]);
            Edge::new(bu, bv) == *pe
        });
        match chosen {
            Some(e) => keep.push(*e),
            None => return Err(Error::PlanMismatch(format!("no host edge realizes pattern edge {pe}"))),
        }
    }
    let delete: Vec<Edge> =
        host.edges().iter().filter(|e| !contract.contains(e) && !keep.contains(e)).copied().collect();
    let plan = EdgeOpPlan { contract, delete, scale: int(1) };
    let applied = apply_plan(host, &plan)?;
    Ok((plan, applied.minor))
}

/// Weighting of `host` whose distance spectrum is that of the unit-weight
/// `pattern` padded with zeros, when `pattern` is a minor of `host`.
pub fn pattern_forcing_weighting(host: &Graph, pattern: &Graph, cap: usize) -> Result<Option<Vec<Rational>>> {
    let Some(model) = minor_model(host, pattern, cap)? else { return Ok(None) };
    let (plan, minor) = plan_from_model(host, pattern, &model)?;
    let unit = WeightedGraph::unit(minor);
    Ok(Some(minor_weighting(host, &plan, &unit)?))
}

/// A weighting for which the K2,3 distance matrix appears as a principal
/// submatrix on the certificate's branch vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct AdversarialWeighting {
    pub certificate: MinorCertificate,
    pub weights: Vec<Rational>,
}

/// Each subdivision path gets total length 1, split evenly over its edges;
/// every other edge gets `max(2, (n - 1) * max subdivision edge weight)`.
pub fn adversarial_weighting_k23(g: &Graph) -> Option<AdversarialWeighting> {
    let certificate = has_k23_subdivision(g)?;
    let mut weights: Vec<Option<Rational>> = vec![None; g.edge_count()];
    for path in &certificate.paths {
        let share = frac(1, path.len() as i64 - 1);
        for w in path.windows(2) {
            let i = g.edge_index(w[0], w[1]).expect("certificate follows host edges");
            weights[i] = Some(share.clone());
        }
    }
    let max_sub = weights.iter().flatten().max().cloned().unwrap_or_else(|| int(0));
    let heavy = std::cmp::max(int(2), max_sub * int(g.n() as i64 - 1));
    let weights = weights.into_iter().map(|w| w.unwrap_or_else(|| heavy.clone())).collect();
    Some(AdversarialWeighting { certificate, weights })
}

/// Witness that a positive multiple of the K2,3 metric is a distance minor:
/// `lambda0 * M0 + sum lambda_S delta(S)` restricted to `indices` (size-three
/// side first) equals `c` times the K2,3 distance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMinorWitness {
    pub indices: [usize; 5],
    pub c: Rational,
    pub lambda0: Rational,
    /// One coefficient per split of the metric, in split order.
    pub lambdas: Vec<(Subset, Rational)>,
}

impl DistanceMinorWitness {
    pub fn to_report(&self) -> WitnessReport {
        WitnessReport {
            indices: self.indices.iter().map(|i| i + 1).collect(),
            c: fmt_rational(&self.c),
            lambda0: fmt_rational(&self.lambda0),
            lambdas: self
                .lambdas
                .iter()
                .map(|(s, l)| LambdaReport { s: s.labels(), lambda: fmt_rational(l) })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaReport {
    #[serde(rename = "S")]
    pub s: Vec<usize>,
    pub lambda: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessReport {
    pub indices: Vec<usize>,
    pub c: String,
    pub lambda0: String,
    pub lambdas: Vec<LambdaReport>,
}

fn five_subsets(n: usize) -> impl Iterator<Item = [usize; 5]> {
    (0..n).flat_map(move |a| {
        (a + 1..n).flat_map(move |b| {
            (b + 1..n).flat_map(move |c| (c + 1..n).flat_map(move |d| (d + 1..n).map(move |e| [a, b, c, d, e])))
        })
    })
}

/// The ten ways to order a 5-set as (size-three side, size-two side).
fn side_assignments(s: [usize; 5]) -> impl Iterator<Item = [usize; 5]> {
    (0..5).flat_map(move |x| {
        (x + 1..5).map(move |y| {
            let mut out = [0; 5];
            let mut k = 0;
            for (i, &v) in s.iter().enumerate() {
                if i != x && i != y {
                    out[k] = v;
                    k += 1;
                }
            }
            out[3] = s[x];
            out[4] = s[y];
            out
        })
    })
}

fn pattern_entry(i: usize, j: usize) -> i64 {
    if (i < 3) == (j < 3) {
        2
    } else {
        1
    }
}

const PAIRS: [(usize, usize); 10] = [(0, 1), (0, 2), (0, 3), (0, 4), (1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)];

/// Decides whether some positive multiple of the K2,3 metric is a distance
/// minor of `m`.
///
/// Principal submatrices of `m` itself (all coefficients at their
/// decomposition values) are tried first, so a witness found there reports
/// the scale at which the pattern already appears. Otherwise, with `c`
/// normalized to 1, each ordered 5-subset is an exact LP feasibility
/// question in `lambda0` and one `lambda_S` per split of `m`.
pub fn k23_distance_minor_test(m: &DistanceMatrix, cap: usize) -> Result<Option<DistanceMinorWitness>> {
    let n = m.n();
    if n < 5 {
        return Ok(None);
    }
    let dec = decompose(m, cap)?;

    for s in five_subsets(n) {
        for idx in side_assignments(s) {
            let c = m.get(idx[0], idx[3]);
            if !c.is_positive() {
                continue;
            }
            let matches = PAIRS.iter().all(|&(i, j)| *m.get(idx[i], idx[j]) == c * int(pattern_entry(i, j)));
            if matches {
                return Ok(Some(DistanceMinorWitness {
                    indices: idx,
                    c: c.clone(),
                    lambda0: int(1),
                    lambdas: dec.splits.iter().map(|sp| (sp.subset, sp.alpha.clone())).collect(),
                }));
            }
        }
    }

    for s in five_subsets(n) {
        // Columns restricted to the 5-subset; splits with the same restricted
        // cut pattern are merged, all-zero columns dropped.
        let mut columns: Vec<(Vec<Rational>, Vec<usize>)> = Vec::new();
        let mut push_col = |col: Vec<Rational>, owner: usize| {
            if col.iter().all(Zero::is_zero) {
                return;
            }
            match columns.iter_mut().find(|(c, _)| *c == col) {
                Some((_, owners)) => owners.push(owner),
                None => columns.push((col, vec![owner])),
            }
        };
        let residue_col: Vec<Rational> = PAIRS.iter().map(|&(i, j)| dec.residue.get(s[i], s[j]).clone()).collect();
        push_col(residue_col, 0);
        for (k, sp) in dec.splits.iter().enumerate() {
            let col =
                PAIRS.iter().map(|&(i, j)| if sp.subset.separates(s[i], s[j]) { int(1) } else { int(0) }).collect();
            push_col(col, k + 1);
        }
        for idx in side_assignments(s) {
            // Row order follows `idx`; columns were built on `s`.
            let pos = |v: usize| s.iter().position(|&x| x == v).expect("idx permutes s");
            let mut a = Vec::with_capacity(10);
            let mut b = Vec::with_capacity(10);
            for &(i, j) in &PAIRS {
                let (pi, pj) = (pos(idx[i]), pos(idx[j]));
                let row_in_s = PAIRS
                    .iter()
                    .position(|&(x, y)| (x, y) == (pi.min(pj), pi.max(pj)))
                    .expect("pair of distinct positions");
                a.push(columns.iter().map(|(col, _)| col[row_in_s].clone()).collect::<Vec<_>>());
                b.push(int(pattern_entry(i, j)));
            }
            if let Some(x) = feasible_point(&a, &b) {
                let mut lambda = vec![int(0); dec.splits.len() + 1];
                for ((_, owners), value) in columns.iter().zip(x) {
                    lambda[owners[0]] = value;
                }
                return Ok(Some(DistanceMinorWitness {
                    indices: idx,
                    c: int(1),
                    lambda0: lambda[0].clone(),
                    lambdas: dec.splits.iter().zip(&lambda[1..]).map(|(sp, l)| (sp.subset, l.clone())).collect(),
                }));
            }
        }
    }
    Ok(None)
}

/// Convenience for [`k23_distance_minor_test`] with the default split cap.
pub fn k23_distance_minor(m: &DistanceMatrix) -> Result<Option<DistanceMinorWitness>> {
    k23_distance_minor_test(m, DEFAULT_SPLIT_CAP)
}

/// Reconstructs `lambda0 * M0 + sum lambda_S delta(S)` on the witness
/// indices.
pub fn witness_submatrix(m: &DistanceMatrix, w: &DistanceMinorWitness, cap: usize) -> Result<DistanceMatrix> {
    let dec = decompose(m, cap)?;
    let mut d = Vec::with_capacity(25);
    for &i in &w.indices {
        for &j in &w.indices {
            let mut v = dec.residue.get(i, j) * &w.lambda0;
            for (s, l) in &w.lambdas {
                if s.separates(i, j) {
                    v += l;
                }
            }
            d.push(v);
        }
    }
    Ok(DistanceMatrix::from_flat_unchecked(5, d))
}
