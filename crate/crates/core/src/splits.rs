//! Cut metrics, isolation indices and the split decomposition of a finite
//! semimetric, with the graph-side cut weightings that mirror them.
//!
//! All arithmetic is exact. A split is identified by its canonical side: the
//! one not containing the last point (index `n - 1`). Subsets are scanned in
//! ascending binary order, which fixes the order of splits everywhere.

use std::ops::{Add, Sub};

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::metric::{distance_matrix, DistanceMatrix, Norm, PointSet};
use crate::rational::{fmt_rational, int, scale_to_integers, Rational, Scaled};

/// Default bound on `n` for split enumeration (2^(n-1) subsets).
pub const DEFAULT_SPLIT_CAP: usize = 16;

/// Largest point count a [`Subset`] can index.
pub const MAX_SUBSET_POINTS: usize = 64;

/// Set of point indices, as a bit mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Subset(pub u64);

impl Subset {
    pub fn from_members(members: &[usize]) -> Result<Self> {
        let mut mask = 0u64;
        for &i in members {
            if i >= MAX_SUBSET_POINTS {
                return Err(Error::InvalidSubset(format!("index {} exceeds {MAX_SUBSET_POINTS}", i + 1)));
            }
            mask |= 1 << i;
        }
        Ok(Subset(mask))
    }

    pub fn contains(&self, i: usize) -> bool {
        i < MAX_SUBSET_POINTS && self.0 >> i & 1 == 1
    }

    pub fn members(&self) -> Vec<usize> {
        (0..MAX_SUBSET_POINTS).filter(|&i| self.contains(i)).collect()
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn complement(&self, n: usize) -> Subset {
        Subset(!self.0 & full_mask(n))
    }

    /// The side of the bipartition that excludes point `n - 1`.
    pub fn canonical(&self, n: usize) -> Subset {
        if self.contains(n - 1) {
            self.complement(n)
        } else {
            *self
        }
    }

    pub fn separates(&self, i: usize, j: usize) -> bool {
        self.contains(i) != self.contains(j)
    }

    /// 1-based sorted labels.
    pub fn labels(&self) -> Vec<usize> {
        self.members().into_iter().map(|i| i + 1).collect()
    }

    fn check_within(&self, n: usize) -> Result<()> {
        if n > MAX_SUBSET_POINTS || self.0 & !full_mask(n) != 0 {
            return Err(Error::InvalidSubset(format!("subset {:?} not within 1..={n}", self.labels())));
        }
        Ok(())
    }
}

fn full_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// A bipartition with positive isolation index.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Split {
    pub subset: Subset,
    pub alpha: Rational,
}

/// `delta(S)`: 1 where exactly one of `i, j` lies in `S`.
pub fn cut_metric(n: usize, s: Subset) -> DistanceMatrix {
    let mut d = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            d.push(if s.separates(i, j) { int(1) } else { int(0) });
        }
    }
    DistanceMatrix::from_flat_unchecked(n, d)
}

/// Metric entries under a common denominator, so the isolation-index scan
/// runs on integers.
struct ScaledMetric {
    n: usize,
    scale: BigInt,
    data: Scaled,
}

impl ScaledMetric {
    fn new(m: &DistanceMatrix) -> Self {
        let (scale, data) = scale_to_integers(m.entries());
        ScaledMetric { n: m.n(), scale, data }
    }

    fn isolation(&self, a: &[usize], b: &[usize]) -> Rational {
        let twice = match &self.data {
            Scaled::Small(d) => BigInt::from(isolation_kernel(d, self.n, a, b)),
            Scaled::Big(d) => isolation_kernel(d, self.n, a, b),
        };
        Rational::new(twice, &self.scale * 2)
    }
}

/// `min over a,a' in A, b,b' in B of max(d(a,b)+d(a',b')-d(a,a')-d(b,b'),
/// d(a,b')+d(a',b)-d(a,a')-d(b,b'), 0)`, i.e. twice the isolation index.
fn isolation_kernel<T>(d: &[T], n: usize, a: &[usize], b: &[usize]) -> T
where
    T: Clone + Ord + Zero + Add<Output = T> + Sub<Output = T>,
{
    let at = |i: usize, j: usize| d[i * n + j].clone();
    let mut best: Option<T> = None;
    for (x, &a1) in a.iter().enumerate() {
        for &a2 in &a[x..] {
            let daa = at(a1, a2);
            for (y, &b1) in b.iter().enumerate() {
                for &b2 in &b[y..] {
                    let base = daa.clone() + at(b1, b2);
                    let t1 = at(a1, b1) + at(a2, b2);
                    let t2 = at(a1, b2) + at(a2, b1);
                    let top = if t1 >= t2 { t1 } else { t2 };
                    let v = if top > base { top - base } else { T::zero() };
                    if v.is_zero() {
                        return v;
                    }
                    if best.as_ref().map_or(true, |cur| v < *cur) {
                        best = Some(v);
                    }
                }
            }
        }
    }
    best.unwrap_or_else(T::zero)
}

/// Isolation index `alpha_m(A, B)`.
pub fn isolation_index(m: &DistanceMatrix, a: &[usize], b: &[usize]) -> Result<Rational> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidSubset("isolation index needs nonempty sets".into()));
    }
    let sa = Subset::from_members(a)?;
    let sb = Subset::from_members(b)?;
    if sa.0 & sb.0 != 0 {
        return Err(Error::InvalidSubset("sets overlap".into()));
    }
    if let Some(&i) = a.iter().chain(b).find(|&&i| i >= m.n()) {
        return Err(Error::InvalidSubset(format!("index {} out of range", i + 1)));
    }
    Ok(ScaledMetric::new(m).isolation(&sa.members(), &sb.members()))
}

/// Isolation index of `S` against its complement.
pub fn split_index(m: &DistanceMatrix, s: Subset) -> Result<Rational> {
    s.check_within(m.n())?;
    let c = s.complement(m.n());
    if s.is_empty() || c.is_empty() {
        return Err(Error::InvalidSubset("subset must be a proper nonempty subset".into()));
    }
    Ok(ScaledMetric::new(m).isolation(&s.members(), &c.members()))
}

fn check_cap(n: usize, cap: usize) -> Result<()> {
    if n > cap || n > MAX_SUBSET_POINTS {
        return Err(Error::OverCap { n, cap: cap.min(MAX_SUBSET_POINTS) });
    }
    Ok(())
}

/// All splits of `m`, canonical sides in ascending binary order.
pub fn enumerate_splits(m: &DistanceMatrix, cap: usize) -> Result<Vec<Split>> {
    let n = m.n();
    check_cap(n, cap)?;
    if n < 2 {
        return Ok(Vec::new());
    }
    let scaled = ScaledMetric::new(m);
    let all = full_mask(n);
    let mut out = Vec::new();
    for mask in 1..(1u64 << (n - 1)) {
        let s = Subset(mask);
        let c = Subset(!mask & all);
        let alpha = scaled.isolation(&s.members(), &c.members());
        if alpha.is_positive() {
            out.push(Split { subset: s, alpha });
        }
    }
    Ok(out)
}

/// `m = residue + sum alpha_S delta(S)` with a split-prime residue.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitDecomposition {
    pub splits: Vec<Split>,
    pub residue: DistanceMatrix,
}

impl SplitDecomposition {
    pub fn is_totally_decomposable(&self) -> bool {
        self.residue.is_zero()
    }

    /// `residue + sum alpha_S delta(S)`.
    pub fn reconstruct(&self) -> DistanceMatrix {
        let n = self.residue.n();
        let mut d = self.residue.entries().to_vec();
        for sp in &self.splits {
            add_cut(&mut d, n, sp.subset, &sp.alpha);
        }
        DistanceMatrix::from_flat_unchecked(n, d)
    }

    pub fn to_report(&self) -> DecompositionReport {
        DecompositionReport {
            splits: self
                .splits
                .iter()
                .map(|s| SplitReport { s: s.subset.labels(), alpha: fmt_rational(&s.alpha) })
                .collect(),
            residue: self.residue.to_strings(),
            totally_decomposable: self.is_totally_decomposable(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplitReport {
    #[serde(rename = "S")]
    pub s: Vec<usize>,
    pub alpha: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecompositionReport {
    pub splits: Vec<SplitReport>,
    pub residue: Vec<Vec<String>>,
    pub totally_decomposable: bool,
}

fn add_cut(d: &mut [Rational], n: usize, s: Subset, coeff: &Rational) {
    for i in 0..n {
        for j in 0..n {
            if s.separates(i, j) {
                d[i * n + j] += coeff;
            }
        }
    }
}

/// Subtracts every split of the original metric in one pass, then checks the
/// residue is nonnegative and split-prime. A failed check is an error, never
/// clamped.
pub fn decompose(m: &DistanceMatrix, cap: usize) -> Result<SplitDecomposition> {
    let splits = enumerate_splits(m, cap)?;
    let n = m.n();
    let mut d = m.entries().to_vec();
    let minus_one = int(-1);
    for sp in &splits {
        add_cut(&mut d, n, sp.subset, &(&sp.alpha * &minus_one));
    }
    if let Some(pos) = d.iter().position(|x| x.is_negative()) {
        return Err(Error::DecompositionInvariant(format!(
            "residue entry ({},{}) = {} is negative",
            pos / n + 1,
            pos % n + 1,
            fmt_rational(&d[pos])
        )));
    }
    let residue = DistanceMatrix::from_flat_unchecked(n, d);
    if let Some(sp) = enumerate_splits(&residue, cap)?.first() {
        return Err(Error::DecompositionInvariant(format!(
            "residue has split {:?} with index {}",
            sp.subset.labels(),
            fmt_rational(&sp.alpha)
        )));
    }
    Ok(SplitDecomposition { splits, residue })
}

pub fn is_totally_decomposable(m: &DistanceMatrix, cap: usize) -> Result<bool> {
    Ok(decompose(m, cap)?.is_totally_decomposable())
}

/// ℓ1 coordinates for a totally decomposable metric: one axis per split,
/// point `i` sits at `alpha_S` on that axis when `i` is in `S`.
#[derive(Debug, Clone, PartialEq)]
pub struct L1Embedding {
    pub axes: Vec<Split>,
    pub points: PointSet,
}

pub fn l1_embed(m: &DistanceMatrix, cap: usize) -> Result<L1Embedding> {
    let dec = decompose(m, cap)?;
    if !dec.is_totally_decomposable() {
        return Err(Error::NotTotallyDecomposable);
    }
    let points = (0..m.n())
        .map(|i| dec.splits.iter().map(|sp| if sp.subset.contains(i) { sp.alpha.clone() } else { int(0) }).collect())
        .collect();
    let points = PointSet::new(dec.splits.len(), points, Norm::P(1.0))?;
    Ok(L1Embedding { axes: dec.splits, points })
}

/// 0/1 edge weighting that is 1 exactly on edges crossing `(S, S^c)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CutWeighting {
    pub subset: Subset,
    /// Aligned with the graph's edge list.
    pub weights: Vec<Rational>,
}

pub fn cut_weighting(g: &WeightedGraph, s: Subset) -> Result<CutWeighting> {
    s.check_within(g.n())?;
    let weights = g.edges().iter().map(|e| if s.separates(e.u, e.v) { int(1) } else { int(0) }).collect();
    Ok(CutWeighting { subset: s, weights })
}

/// Reweights `g` by `phi + x * Delta(S)` for a split `S` of its metric and
/// `x >= -alpha_S`.
pub fn apply_cut_shift(g: &WeightedGraph, s: Subset, x: &Rational) -> Result<WeightedGraph> {
    let d = distance_matrix(g);
    let alpha = split_index(&d, s)?;
    if !alpha.is_positive() {
        return Err(Error::NotASplit);
    }
    if *x < -alpha.clone() {
        return Err(Error::ShiftBelowIsolation { x: fmt_rational(x), alpha: fmt_rational(&alpha) });
    }
    let cut = cut_weighting(g, s)?;
    let mut weights = Vec::with_capacity(g.edges().len());
    for ((e, w), c) in g.edges().iter().zip(g.weights()).zip(&cut.weights) {
        let nw = w + c * x;
        if nw.is_negative() {
            return Err(Error::NegativeResultWeight { u: e.u + 1, v: e.v + 1, weight: fmt_rational(&nw) });
        }
        weights.push(nw);
    }
    g.reweighted(weights)
}

/// `psi = phi - sum alpha_S Delta(S)` over the splits of the graph's metric,
/// subtracted in canonical order in a single pass.
pub fn split_prime_residue_weighting(g: &WeightedGraph, cap: usize) -> Result<Vec<Rational>> {
    let d = distance_matrix(g);
    let splits = enumerate_splits(&d, cap)?;
    let mut psi = g.weights().to_vec();
    for sp in &splits {
        for (w, e) in psi.iter_mut().zip(g.edges()) {
            if sp.subset.separates(e.u, e.v) {
                *w -= &sp.alpha;
                if w.is_negative() {
                    return Err(Error::NegativeResultWeight { u: e.u + 1, v: e.v + 1, weight: fmt_rational(w) });
                }
            }
        }
    }
    Ok(psi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::parse_graph;

    fn p3() -> WeightedGraph {
        parse_graph("graph 3\n1 2 1\n2 3 1").unwrap()
    }

    fn k23() -> DistanceMatrix {
        DistanceMatrix::from_i64_rows(&[
            vec![0, 2, 2, 1, 1],
            vec![2, 0, 2, 1, 1],
            vec![2, 2, 0, 1, 1],
            vec![1, 1, 1, 0, 2],
            vec![1, 1, 1, 2, 0],
        ])
        .unwrap()
    }

    #[test]
    fn cut_metric_examples() {
        let d = cut_metric(3, Subset::from_members(&[0]).unwrap());
        assert_eq!(d, DistanceMatrix::from_i64_rows(&[vec![0, 1, 1], vec![1, 0, 0], vec![1, 0, 0]]).unwrap());
        assert!(cut_metric(3, Subset(0)).is_zero());
        assert!(cut_metric(3, Subset(0b111)).is_zero());
        for mask in 0..8u64 {
            assert_eq!(cut_metric(3, Subset(mask)), cut_metric(3, Subset(mask).complement(3)));
        }
    }

    #[test]
    fn isolation_index_examples() {
        let d = distance_matrix(&p3());
        assert_eq!(isolation_index(&d, &[0], &[1, 2]).unwrap(), int(1));
        assert_eq!(isolation_index(&d, &[1], &[0, 2]).unwrap(), int(0));
        assert_eq!(isolation_index(&DistanceMatrix::zero(3), &[0], &[1, 2]).unwrap(), int(0));
        assert!(isolation_index(&d, &[], &[1]).is_err());
        assert!(isolation_index(&d, &[0, 1], &[1]).is_err());
    }

    #[test]
    fn p3_splits_and_decomposition() {
        let d = distance_matrix(&p3());
        let splits = enumerate_splits(&d, DEFAULT_SPLIT_CAP).unwrap();
        assert_eq!(
            splits,
            vec![Split { subset: Subset(0b01), alpha: int(1) }, Split { subset: Subset(0b11), alpha: int(1) }]
        );
        let dec = decompose(&d, DEFAULT_SPLIT_CAP).unwrap();
        assert!(dec.residue.is_zero());
        assert!(is_totally_decomposable(&d, DEFAULT_SPLIT_CAP).unwrap());
    }

    #[test]
    fn k23_is_split_prime() {
        let m = k23();
        assert!(enumerate_splits(&m, DEFAULT_SPLIT_CAP).unwrap().is_empty());
        let dec = decompose(&m, DEFAULT_SPLIT_CAP).unwrap();
        assert_eq!(dec.residue, m);
        assert!(!dec.is_totally_decomposable());
        assert_eq!(l1_embed(&m, DEFAULT_SPLIT_CAP), Err(Error::NotTotallyDecomposable));
    }

    #[test]
    fn trivial_metrics() {
        assert!(enumerate_splits(&DistanceMatrix::zero(1), DEFAULT_SPLIT_CAP).unwrap().is_empty());
        let dec = decompose(&DistanceMatrix::zero(4), DEFAULT_SPLIT_CAP).unwrap();
        assert!(dec.splits.is_empty() && dec.residue.is_zero());
        let emb = l1_embed(&DistanceMatrix::zero(3), DEFAULT_SPLIT_CAP).unwrap();
        assert_eq!(emb.points.dim, 0);
        assert!(matches!(enumerate_splits(&DistanceMatrix::zero(17), 16), Err(Error::OverCap { n: 17, cap: 16 })));
    }

    #[test]
    fn p3_embedding() {
        let emb = l1_embed(&distance_matrix(&p3()), DEFAULT_SPLIT_CAP).unwrap();
        assert_eq!(emb.points.points, vec![vec![int(1), int(1)], vec![int(0), int(1)], vec![int(0), int(0)]]);
    }

    #[test]
    fn single_cut_embedding() {
        let s = Subset::from_members(&[0, 2]).unwrap();
        let emb = l1_embed(&cut_metric(4, s), DEFAULT_SPLIT_CAP).unwrap();
        assert_eq!(emb.points.dim, 1);
        let coords: Vec<Rational> = emb.points.points.iter().map(|p| p[0].clone()).collect();
        assert_eq!(coords, vec![int(1), int(0), int(1), int(0)]);
    }

    #[test]
    fn cut_weighting_examples() {
        let cw = cut_weighting(&p3(), Subset::from_members(&[0]).unwrap()).unwrap();
        assert_eq!(cw.weights, vec![int(1), int(0)]);
        assert_eq!(cut_weighting(&p3(), Subset(0)).unwrap().weights, vec![int(0), int(0)]);
        let k23g = parse_graph("graph 5\n1 4 1\n1 5 1\n2 4 1\n2 5 1\n3 4 1\n3 5 1").unwrap();
        let cw = cut_weighting(&k23g, Subset::from_members(&[3, 4]).unwrap()).unwrap();
        assert!(cw.weights.iter().all(|w| *w == int(1)));
    }

    #[test]
    fn cut_shift_examples() {
        let s = Subset::from_members(&[0]).unwrap();
        let down = apply_cut_shift(&p3(), s, &int(-1)).unwrap();
        assert_eq!(down.weights(), &[int(0), int(1)]);
        assert_eq!(
            distance_matrix(&down),
            DistanceMatrix::from_i64_rows(&[vec![0, 0, 1], vec![0, 0, 1], vec![1, 1, 0]]).unwrap()
        );
        assert_eq!(apply_cut_shift(&p3(), s, &int(0)).unwrap(), p3());
        let up = apply_cut_shift(&p3(), s, &int(5)).unwrap();
        assert_eq!(
            distance_matrix(&up),
            DistanceMatrix::from_i64_rows(&[vec![0, 6, 7], vec![6, 0, 1], vec![7, 1, 0]]).unwrap()
        );
        assert!(matches!(apply_cut_shift(&p3(), s, &int(-2)), Err(Error::ShiftBelowIsolation { .. })));
        let middle = Subset::from_members(&[1]).unwrap();
        assert_eq!(apply_cut_shift(&p3(), middle, &int(1)), Err(Error::NotASplit));
    }

    #[test]
    fn residue_weighting_examples() {
        let psi = split_prime_residue_weighting(&p3(), DEFAULT_SPLIT_CAP).unwrap();
        assert_eq!(psi, vec![int(0), int(0)]);
        let k23g = parse_graph("graph 5\n1 4 1\n1 5 1\n2 4 1\n2 5 1\n3 4 1\n3 5 1").unwrap();
        let psi = split_prime_residue_weighting(&k23g, DEFAULT_SPLIT_CAP).unwrap();
        assert_eq!(psi, k23g.weights());
    }

    #[test]
    fn report_uses_one_based_labels() {
        let rep = decompose(&distance_matrix(&p3()), DEFAULT_SPLIT_CAP).unwrap().to_report();
        assert_eq!(rep.splits[1].s, vec![1, 2]);
        assert_eq!(rep.splits[1].alpha, "1");
        assert!(rep.totally_decomposable);
    }
}
