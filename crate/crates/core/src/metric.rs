//! Exact distance matrices of weighted graphs, semimetric validation and
//! point-set metrics under ℓp norms.

use std::fmt;
use std::ops::Add;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::rational::{fmt_rational, int, parse_rational, scale_to_integers, to_f64, Rational, Scaled};
use crate::spectral::SymMatrix;

/// Hollow, symmetric, nonnegative matrix satisfying the triangle inequality.
/// Zero off-diagonal entries are allowed.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DistanceMatrix {
    n: usize,
    d: Vec<Rational>,
}

impl DistanceMatrix {
    /// Validates and wraps a square matrix.
    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let report = validate_semimetric(&rows)?;
        if let Some(fail) = report.first_failure() {
            return Err(Error::NotSemimetric(fail.to_string()));
        }
        let n = rows.len();
        Ok(DistanceMatrix { n, d: rows.into_iter().flatten().collect() })
    }

    pub fn from_i64_rows(rows: &[Vec<i64>]) -> Result<Self> {
        Self::from_rows(rows.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect())
    }

    pub(crate) fn from_flat_unchecked(n: usize, d: Vec<Rational>) -> Self {
        debug_assert_eq!(d.len(), n * n);
        DistanceMatrix { n, d }
    }

    pub fn zero(n: usize) -> Self {
        DistanceMatrix { n, d: vec![int(0); n * n] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.d[i * self.n + j]
    }

    pub fn entries(&self) -> &[Rational] {
        &self.d
    }

    pub fn rows(&self) -> Vec<Vec<Rational>> {
        self.d.chunks(self.n.max(1)).take(self.n).map(|r| r.to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.d.iter().all(Zero::is_zero)
    }

    pub fn max_entry(&self) -> Rational {
        self.d.iter().max().cloned().unwrap_or_else(|| int(0))
    }

    pub fn scaled(&self, c: &Rational) -> DistanceMatrix {
        assert!(!c.is_negative(), "scaling a metric by a negative factor");
        DistanceMatrix { n: self.n, d: self.d.iter().map(|x| x * c).collect() }
    }

    pub fn to_f64(&self) -> SymMatrix {
        SymMatrix::from_flat(self.n, self.d.iter().map(to_f64).collect())
    }

    /// Entries as exact fraction strings, row by row.
    pub fn to_strings(&self) -> Vec<Vec<String>> {
        self.rows().iter().map(|r| r.iter().map(fmt_rational).collect()).collect()
    }

    /// Serializes in the metric file format.
    pub fn to_metric_file(&self) -> String {
        let mut out = format!("metric {}\n", self.n);
        for row in self.to_strings() {
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }
}

impl fmt::Display for DistanceMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.to_strings() {
            writeln!(f, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

fn floyd_warshall<T>(n: usize, edges: impl Iterator<Item = (usize, usize, T)>) -> Vec<T>
where
    T: Clone + Ord + Zero + Add<Output = T>,
{
    let mut d: Vec<Option<T>> = vec![None; n * n];
    for i in 0..n {
        d[i * n + i] = Some(T::zero());
    }
    for (u, v, w) in edges {
        d[u * n + v] = Some(w.clone());
        d[v * n + u] = Some(w);
    }
    for k in 0..n {
        for i in 0..n {
            let Some(dik) = d[i * n + k].clone() else { continue };
            for j in 0..n {
                let Some(dkj) = &d[k * n + j] else { continue };
                let through = dik.clone() + dkj.clone();
                match &d[i * n + j] {
                    Some(cur) if *cur <= through => {}
                    _ => d[i * n + j] = Some(through),
                }
            }
        }
    }
    d.into_iter().map(|x| x.expect("graph is connected")).collect()
}

/// All-pairs shortest-path distances under the graph's weighting, exactly.
pub fn distance_matrix(g: &WeightedGraph) -> DistanceMatrix {
    let n = g.n();
    let (scale, ints) = scale_to_integers(g.weights());
    let edges = g.edges().iter().map(|e| (e.u, e.v));
    let d: Vec<Rational> = match ints {
        Scaled::Small(w) => floyd_warshall(n, edges.zip(w).map(|((u, v), w)| (u, v, w)))
            .into_iter()
            .map(|x| Rational::new(BigInt::from(x), scale.clone()))
            .collect(),
        Scaled::Big(w) => floyd_warshall(n, edges.zip(w).map(|((u, v), w)| (u, v, w)))
            .into_iter()
            .map(|x| Rational::new(x, scale.clone()))
            .collect(),
    };
    DistanceMatrix { n, d }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricInvariant {
    Hollow,
    Symmetric,
    Nonnegative,
    Triangle,
}

impl fmt::Display for MetricInvariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            MetricInvariant::Hollow => "hollow",
            MetricInvariant::Symmetric => "symmetric",
            MetricInvariant::Nonnegative => "nonnegative",
            MetricInvariant::Triangle => "triangle",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvariantCheck {
    pub invariant: MetricInvariant,
    pub passed: bool,
    /// First violation found, with 1-based indices.
    pub witness: Option<String>,
}

impl fmt::Display for InvariantCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.witness {
            Some(w) => write!(f, "{} failed: {}", self.invariant, w),
            None => write!(f, "{} passed", self.invariant),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SemimetricReport {
    pub checks: Vec<InvariantCheck>,
}

impl SemimetricReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&InvariantCheck> {
        self.checks.iter().find(|c| !c.passed)
    }

    pub fn check(&self, inv: MetricInvariant) -> &InvariantCheck {
        self.checks.iter().find(|c| c.invariant == inv).expect("all invariants reported")
    }
}

fn require_square<T>(rows: &[Vec<T>]) -> Result<usize> {
    let n = rows.len();
    if let Some((row, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
        return Err(Error::NotSquare { rows: n, row: row + 1, cols: r.len() });
    }
    Ok(n)
}

/// Checks each semimetric invariant and reports the first violation of each.
pub fn validate_semimetric(m: &[Vec<Rational>]) -> Result<SemimetricReport> {
    let n = require_square(m)?;
    let check = |inv, witness: Option<String>| InvariantCheck { invariant: inv, passed: witness.is_none(), witness };

    let hollow =
        (0..n).find(|&i| !m[i][i].is_zero()).map(|i| format!("d({0},{0}) = {1} != 0", i + 1, fmt_rational(&m[i][i])));
    let symmetric = pairs(n).find(|&(i, j)| m[i][j] != m[j][i]).map(|(i, j)| {
        format!(
            "d({},{}) = {} != d({},{}) = {}",
            i + 1,
            j + 1,
            fmt_rational(&m[i][j]),
            j + 1,
            i + 1,
            fmt_rational(&m[j][i])
        )
    });
    let nonnegative = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .find(|&(i, j)| m[i][j].is_negative())
        .map(|(i, j)| format!("d({},{}) = {} < 0", i + 1, j + 1, fmt_rational(&m[i][j])));
    let mut triangle = None;
    'outer: for i in 0..n {
        for k in 0..n {
            for j in 0..n {
                if m[i][k] > &m[i][j] + &m[j][k] {
                    triangle = Some(format!(
                        "d({},{}) = {} > d({},{}) + d({},{}) = {}",
                        i + 1,
                        k + 1,
                        fmt_rational(&m[i][k]),
                        i + 1,
                        j + 1,
                        j + 1,
                        k + 1,
                        fmt_rational(&(&m[i][j] + &m[j][k]))
                    ));
                    break 'outer;
                }
            }
        }
    }
    Ok(SemimetricReport {
        checks: vec![
            check(MetricInvariant::Hollow, hollow),
            check(MetricInvariant::Symmetric, symmetric),
            check(MetricInvariant::Nonnegative, nonnegative),
            check(MetricInvariant::Triangle, triangle),
        ],
    })
}

/// Float variant for ℓp metrics with irrational entries; `rel_tol` absorbs
/// rounding in the triangle and symmetry checks.
pub fn validate_semimetric_f64(m: &SymMatrix, rel_tol: f64) -> SemimetricReport {
    let n = m.n();
    let scale = m.max_abs().max(1.0);
    let eps = rel_tol * scale;
    let check = |inv, witness: Option<String>| InvariantCheck { invariant: inv, passed: witness.is_none(), witness };
    let hollow = (0..n).find(|&i| m.get(i, i) != 0.0).map(|i| format!("d({0},{0}) != 0", i + 1));
    let symmetric = pairs(n)
        .find(|&(i, j)| (m.get(i, j) - m.get(j, i)).abs() > eps)
        .map(|(i, j)| format!("d({},{}) != d({},{})", i + 1, j + 1, j + 1, i + 1));
    let nonnegative = pairs(n)
        .find(|&(i, j)| m.get(i, j) < 0.0 || m.get(j, i) < 0.0)
        .map(|(i, j)| format!("d({},{}) < 0", i + 1, j + 1));
    let mut triangle = None;
    for (i, k) in (0..n).flat_map(|i| (0..n).map(move |k| (i, k))) {
        if let Some(j) = (0..n).find(|&j| m.get(i, k) > m.get(i, j) + m.get(j, k) + eps) {
            triangle = Some(format!("d({},{}) > d({},{}) + d({},{})", i + 1, k + 1, i + 1, j + 1, j + 1, k + 1));
            break;
        }
    }
    SemimetricReport {
        checks: vec![
            check(MetricInvariant::Hollow, hollow),
            check(MetricInvariant::Symmetric, symmetric),
            check(MetricInvariant::Nonnegative, nonnegative),
            check(MetricInvariant::Triangle, triangle),
        ],
    }
}

fn pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
}

/// Parses the metric file format (`metric <n>` then `n` rows) without
/// validating semimetric invariants.
pub fn parse_matrix(text: &str) -> Result<Vec<Vec<Rational>>> {
    let mut lines =
        text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hl, header) = lines.next().ok_or(Error::Malformed { line: 0, msg: "missing `metric <n>` header".into() })?;
    let tokens: Vec<&str> = header.split_whitespace().collect();
    let n: usize = match tokens.as_slice() {
        ["metric", n] => n.parse().map_err(|_| Error::Malformed { line: hl, msg: format!("bad size `{n}`") })?,
        _ => return Err(Error::Malformed { line: hl, msg: "expected `metric <n>`".into() }),
    };
    let mut rows = Vec::with_capacity(n);
    for (line, content) in lines {
        let row = content
            .split_whitespace()
            .map(|t| parse_rational(t).ok_or_else(|| Error::Malformed { line, msg: format!("bad entry `{t}`") }))
            .collect::<Result<Vec<_>>>()?;
        if row.len() != n {
            return Err(Error::Malformed { line, msg: format!("expected {n} entries, found {}", row.len()) });
        }
        rows.push(row);
    }
    if rows.len() != n {
        return Err(Error::Malformed { line: 0, msg: format!("expected {n} rows, found {}", rows.len()) });
    }
    Ok(rows)
}

/// Parses and validates a metric file.
pub fn read_metric(text: &str) -> Result<DistanceMatrix> {
    DistanceMatrix::from_rows(parse_matrix(text)?)
}

/// Rows and columns restricted to `idx`, in the given order.
pub fn principal_submatrix(m: &DistanceMatrix, idx: &[usize]) -> Result<DistanceMatrix> {
    check_indices(m.n(), idx)?;
    let k = idx.len();
    let mut d = Vec::with_capacity(k * k);
    for &i in idx {
        for &j in idx {
            d.push(m.get(i, j).clone());
        }
    }
    Ok(DistanceMatrix { n: k, d })
}

pub(crate) fn check_indices(n: usize, idx: &[usize]) -> Result<()> {
    let mut seen = vec![false; n];
    for &i in idx {
        if i >= n {
            return Err(Error::InvalidIndices(format!("index {} out of range 1..={n}", i + 1)));
        }
        if std::mem::replace(&mut seen[i], true) {
            return Err(Error::InvalidIndices(format!("index {} repeated", i + 1)));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Norm {
    /// Finite p >= 1.
    P(f64),
    Infinity,
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Norm::P(p) => write!(f, "{p}"),
            Norm::Infinity => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    pub dim: usize,
    pub points: Vec<Vec<Rational>>,
    pub norm: Norm,
}

impl PointSet {
    pub fn new(dim: usize, points: Vec<Vec<Rational>>, norm: Norm) -> Result<Self> {
        if let Some(i) = points.iter().position(|p| p.len() != dim) {
            return Err(Error::InvalidIndices(format!("point {} has wrong dimension", i + 1)));
        }
        Ok(PointSet { dim, points, norm })
    }
}

/// ℓp metric of a point set. Exact for p = 1 and p = ∞.
#[derive(Debug, Clone, PartialEq)]
pub enum PointMetric {
    Exact(DistanceMatrix),
    Float(SymMatrix),
}

impl PointMetric {
    pub fn to_f64(&self) -> SymMatrix {
        match self {
            PointMetric::Exact(m) => m.to_f64(),
            PointMetric::Float(m) => m.clone(),
        }
    }
}

pub fn lp_point_metric(ps: &PointSet) -> Result<PointMetric> {
    let n = ps.points.len();
    let exact = |dist: &dyn Fn(&[Rational], &[Rational]) -> Rational| {
        let mut d = Vec::with_capacity(n * n);
        for a in &ps.points {
            for b in &ps.points {
                d.push(dist(a, b));
            }
        }
        PointMetric::Exact(DistanceMatrix { n, d })
    };
    match ps.norm {
        Norm::P(p) if !(p >= 1.0) || p.is_nan() => Err(Error::InvalidNorm(p.to_string())),
        Norm::P(p) if p == 1.0 => {
            Ok(exact(&|a, b| a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(int(0), |s, t| s + t)))
        }
        Norm::Infinity => {
            Ok(exact(&|a, b| a.iter().zip(b).map(|(x, y)| (x - y).abs()).max().unwrap_or_else(|| int(0))))
        }
        Norm::P(p) => {
            let pts: Vec<Vec<f64>> = ps.points.iter().map(|v| v.iter().map(to_f64).collect()).collect();
            let mut d = vec![0.0; n * n];
            for i in 0..n {
                for j in i + 1..n {
                    let diffs = pts[i].iter().zip(&pts[j]).map(|(x, y)| (x - y).abs());
                    let v = if p == 2.0 {
                        diffs.map(|t| t * t).sum::<f64>().sqrt()
                    } else {
                        // Factor out the largest component to keep powers in range.
                        let diffs: Vec<f64> = diffs.collect();
                        let top = diffs.iter().cloned().fold(0.0, f64::max);
                        if top == 0.0 {
                            0.0
                        } else {
                            top * diffs.iter().map(|t| (t / top).powf(p)).sum::<f64>().powf(1.0 / p)
                        }
                    };
                    d[i * n + j] = v;
                    d[j * n + i] = v;
                }
            }
            Ok(PointMetric::Float(SymMatrix::from_flat(n, d)))
        }
    }
}
