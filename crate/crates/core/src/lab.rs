//! Graph families, seeded random weightings and metrics, and the experiment
//! drivers for the positive-eigenvalue conjectures.
//!
//! Every random draw comes from a ChaCha stream keyed by `(seed, sample
//! index)`, so samples are independent pure functions of their index and can
//! be evaluated in parallel without changing the report.

use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Instant;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Graph, WeightedGraph};
use crate::metric::{distance_matrix, lp_point_metric, Norm, PointSet};
use crate::minors::{complete_multipartite_topology, has_minor, pattern_forcing_weighting};
use crate::rational::{frac, int, Rational};
use crate::spectral::{distance_inertia, inertia, Inertia};

/// Denominator of random dyadic weights and coordinates.
pub const DYADIC_BITS: u32 = 20;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum FamilySpec {
    Path {
        n: usize,
    },
    Cycle {
        n: usize,
    },
    Star {
        n: usize,
    },
    TreeRandom {
        n: usize,
        seed: u64,
    },
    /// Erdős–Rényi conditioned on connectivity; `p` defaults to `2 ln(n) / n`.
    ConnectedRandom {
        n: usize,
        p: Option<f64>,
        seed: u64,
    },
    /// Parts are laid out from the last listed to the first, so `[2, 3]`
    /// puts the size-three side on vertices 1..3.
    CompleteMultipartite {
        parts: Vec<usize>,
    },
    K4,
}

/// Unit-weight member of a family.
pub fn generate_family(spec: &FamilySpec) -> Result<WeightedGraph> {
    Ok(WeightedGraph::unit(family_topology(spec)?))
}

pub fn family_topology(spec: &FamilySpec) -> Result<Graph> {
    let bad = |msg: &str| Error::InvalidFamily(msg.to_string());
    match spec {
        FamilySpec::Path { n } => {
            if *n == 0 {
                return Err(bad("path needs n >= 1"));
            }
            Graph::new(*n, (1..*n).map(|i| (i - 1, i)))
        }
        FamilySpec::Cycle { n } => {
            if *n < 3 {
                return Err(bad("cycle needs n >= 3"));
            }
            Graph::new(*n, (0..*n).map(|i| (i, (i + 1) % n)))
        }
        FamilySpec::Star { n } => {
            if *n == 0 {
                return Err(bad("star needs n >= 1"));
            }
            Graph::new(*n, (1..*n).map(|i| (0, i)))
        }
        FamilySpec::TreeRandom { n, seed } => {
            if *n == 0 {
                return Err(bad("tree needs n >= 1"));
            }
            Ok(random_tree(*n, &mut sample_rng(*seed, 0)))
        }
        FamilySpec::ConnectedRandom { n, p, seed } => {
            if *n == 0 {
                return Err(bad("graph needs n >= 1"));
            }
            let p = p.unwrap_or_else(|| default_edge_probability(*n));
            if !(0.0..=1.0).contains(&p) {
                return Err(bad("edge probability must lie in [0, 1]"));
            }
            random_connected(*n, p, &mut sample_rng(*seed, 0))
        }
        FamilySpec::CompleteMultipartite { parts } => {
            if parts.len() < 2 || parts.iter().any(|&s| s == 0) {
                return Err(bad("need at least two nonempty parts"));
            }
            let reversed: Vec<usize> = parts.iter().rev().copied().collect();
            Ok(complete_multipartite_topology(&reversed))
        }
        FamilySpec::K4 => Graph::new(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]),
    }
}

/// `K_{2,3,...,3}` with `k` threes, size-three parts first.
pub fn k2_threes(k: usize) -> Graph {
    let mut parts = vec![3; k];
    parts.push(2);
    complete_multipartite_topology(&parts)
}

pub fn default_edge_probability(n: usize) -> f64 {
    if n < 2 {
        return 1.0;
    }
    (2.0 * (n as f64).ln() / n as f64).min(1.0)
}

/// Independent stream for sample `index`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Uniform labeled tree via a random Prüfer sequence.
pub fn random_tree(n: usize, rng: &mut impl Rng) -> Graph {
    if n <= 2 {
        return Graph::new(n, (1..n).map(|i| (0, i))).expect("tiny tree");
    }
    let seq: Vec<usize> = (0..n - 2).map(|_| rng.gen_range(0..n)).collect();
    let mut degree = vec![1usize; n];
    for &x in &seq {
        degree[x] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    for &x in &seq {
        let leaf = (0..n).find(|&v| degree[v] == 1).expect("a leaf remains");
        edges.push((leaf, x));
        degree[leaf] -= 1;
        degree[x] -= 1;
    }
    let rest: Vec<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
    edges.push((rest[0], rest[1]));
    Graph::new(n, edges).expect("Prüfer decoding yields a tree")
}

const MAX_REJECTIONS: usize = 100_000;

pub fn random_connected(n: usize, p: f64, rng: &mut impl Rng) -> Result<Graph> {
    for _ in 0..MAX_REJECTIONS {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if rng.gen_bool(p) {
                    edges.push((i, j));
                }
            }
        }
        if let Ok(g) = Graph::new(n, edges) {
            return Ok(g);
        }
    }
    Err(Error::InvalidFamily(format!("no connected G({n}, {p}) after {MAX_REJECTIONS} draws")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightLaw {
    /// Dyadic `k / 2^20`, `k` uniform in `1..=2^20`.
    Uniform,
    /// `k / 10`, `k` uniform in `0..=10`.
    Tenths,
    /// Exponential(1), truncated to a dyadic with 20-bit denominator.
    Exp,
}

impl WeightLaw {
    pub fn name(&self) -> &'static str {
        match self {
            WeightLaw::Uniform => "uniform(0,1]",
            WeightLaw::Tenths => "uniform{0..10}/10",
            WeightLaw::Exp => "exp(1)",
        }
    }

    pub fn draw(&self, rng: &mut impl Rng) -> Rational {
        let den = 1i64 << DYADIC_BITS;
        match self {
            WeightLaw::Uniform => frac(rng.gen_range(1..=den), den),
            WeightLaw::Tenths => frac(rng.gen_range(0..=10), 10),
            WeightLaw::Exp => {
                let x: f64 = Exp1.sample(rng);
                let k = (x * den as f64).floor();
                Rational::new(BigInt::from(k as i64), BigInt::from(den))
            }
        }
    }
}

pub fn weights_from(g: &Graph, law: WeightLaw, rng: &mut impl Rng) -> Vec<Rational> {
    (0..g.edge_count()).map(|_| law.draw(rng)).collect()
}

/// Deterministic in `(g, seed, law)`.
pub fn random_weighting(g: &Graph, seed: u64, law: WeightLaw) -> Vec<Rational> {
    weights_from(g, law, &mut sample_rng(seed, 0))
}

/// Stable 64-bit FNV-1a fingerprint of a graph's file form.
pub fn graph_id(g: &WeightedGraph) -> String {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in g.to_graph_file().bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    format!("{h:016x}")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleRecord {
    pub index: u64,
    pub seed: u64,
    pub graph_id: String,
    pub inertia: Inertia,
}

/// Full reproduction data for a sample that broke a claimed bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub experiment: &'static str,
    pub index: u64,
    pub seed: u64,
    pub inertia: Inertia,
    pub bound: usize,
    /// Graph file text with the sampled weighting, when the sample is a graph.
    pub graph: Option<String>,
    /// Metric file text of the sampled matrix, when exact.
    pub metric: Option<String>,
    pub points: Option<Vec<Vec<String>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ExperimentDetail {
    Weak {
        /// Inertia of unit-weight `K_{2,3,...,3}` when `n = 3k + 2`.
        extremal: Option<Inertia>,
    },
    Strong {
        threes: usize,
        minor_present: bool,
        /// Positive count under the minor-forcing weighting, when the minor
        /// is present.
        forced_i_plus: Option<usize>,
        /// Minor present but the forcing weighting did not exceed the bound.
        search_gap: bool,
    },
    Lp {
        p: String,
        dim: usize,
        above_one: usize,
        fraction_above_one: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub experiment: &'static str,
    pub n: usize,
    pub seed: u64,
    pub samples: usize,
    pub law: String,
    pub bound: usize,
    pub max_i_plus: usize,
    pub bound_attained: bool,
    pub violations: Vec<Violation>,
    pub detail: ExperimentDetail,
    pub records: Vec<SampleRecord>,
    pub wall_clock_ms: u64,
}

impl ExperimentReport {
    /// The report without its timing field, for reproducibility checks.
    pub fn without_timing(&self) -> ExperimentReport {
        ExperimentReport { wall_clock_ms: 0, ..self.clone() }
    }
}

/// Append-only newline-delimited JSON sink for violations. The file is
/// created on the first record.
pub struct ViolationLog {
    path: PathBuf,
    file: Mutex<Option<File>>,
}

impl ViolationLog {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        ViolationLog { path: path.into(), file: Mutex::new(None) }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn record(&self, v: &Violation) -> Result<()> {
        let line = serde_json::to_string(v).expect("violation serializes");
        let mut guard = self.file.lock().expect("violation log poisoned");
        if guard.is_none() {
            *guard = Some(OpenOptions::new().create(true).append(true).open(&self.path)?);
        }
        let f = guard.as_mut().expect("opened above");
        writeln!(f, "{line}")?;
        f.flush()?;
        Ok(())
    }
}

fn persist(log: Option<&ViolationLog>, v: &Violation) -> Result<()> {
    match log {
        Some(l) => l.record(v),
        None => Ok(()),
    }
}

/// `floor((n + 1) / 3)`.
pub fn weak_bound(n: usize) -> usize {
    (n + 1) / 3
}

/// Random graph metrics on `n` points; counts positive eigenvalues against
/// `floor((n + 1) / 3)`.
pub fn weak_conjecture_scan(
    n: usize,
    samples: usize,
    seed: u64,
    law: WeightLaw,
    log: Option<&ViolationLog>,
) -> Result<ExperimentReport> {
    if n == 0 {
        return Err(Error::InvalidFamily("n must be positive".into()));
    }
    let start = Instant::now();
    let bound = weak_bound(n);
    let p = default_edge_probability(n);
    let outcomes: Vec<(SampleRecord, Option<Violation>)> = (0..samples as u64)
        .into_par_iter()
        .map(|index| {
            let mut rng = sample_rng(seed, index);
            let g = random_connected(n, p, &mut rng)?;
            let weights = weights_from(&g, law, &mut rng);
            let wg = WeightedGraph::new(g, weights)?;
            let d = distance_matrix(&wg);
            let inertia = distance_inertia(&d, None);
            let record = SampleRecord { index, seed, graph_id: graph_id(&wg), inertia };
            let violation = (inertia.plus > bound).then(|| Violation {
                experiment: "weak",
                index,
                seed,
                inertia,
                bound,
                graph: Some(wg.to_graph_file()),
                metric: Some(d.to_metric_file()),
                points: None,
            });
            if let Some(v) = &violation {
                persist(log, v)?;
            }
            Ok((record, violation))
        })
        .collect::<Result<_>>()?;

    let extremal = (n >= 5 && n % 3 == 2).then(|| {
        let g = WeightedGraph::unit(k2_threes((n - 2) / 3));
        distance_inertia(&distance_matrix(&g), None)
    });
    let (records, violations): (Vec<_>, Vec<_>) = outcomes.into_iter().unzip();
    let violations: Vec<Violation> = violations.into_iter().flatten().collect();
    let max_i_plus = records.iter().map(|r| r.inertia.plus).max().unwrap_or(0);
    let best = max_i_plus.max(extremal.map_or(0, |i| i.plus));
    Ok(ExperimentReport {
        experiment: "weak",
        n,
        seed,
        samples,
        law: law.name().to_string(),
        bound,
        max_i_plus,
        bound_attained: best == bound,
        violations,
        detail: ExperimentDetail::Weak { extremal },
        records,
        wall_clock_ms: start.elapsed().as_millis() as u64,
    })
}

/// Samples weightings of a fixed topology against the bound `k`, alongside
/// whether `K_{2,3,...,3}` (k threes) is a minor.
pub fn strong_conjecture_scan(
    g: &Graph,
    samples: usize,
    seed: u64,
    k: usize,
    law: WeightLaw,
    cap: usize,
    log: Option<&ViolationLog>,
) -> Result<ExperimentReport> {
    if k == 0 {
        return Err(Error::InvalidFamily("need at least one part of size three".into()));
    }
    let start = Instant::now();
    let pattern = k2_threes(k);
    let minor_present = has_minor(g, &pattern, cap)?;
    let outcomes: Vec<(SampleRecord, Option<Violation>)> = (0..samples as u64)
        .into_par_iter()
        .map(|index| {
            let mut rng = sample_rng(seed, index);
            let wg = WeightedGraph::new(g.clone(), weights_from(g, law, &mut rng))?;
            let d = distance_matrix(&wg);
            let inertia = distance_inertia(&d, None);
            let record = SampleRecord { index, seed, graph_id: graph_id(&wg), inertia };
            let violation = (!minor_present && inertia.plus > k).then(|| Violation {
                experiment: "strong",
                index,
                seed,
                inertia,
                bound: k,
                graph: Some(wg.to_graph_file()),
                metric: Some(d.to_metric_file()),
                points: None,
            });
            if let Some(v) = &violation {
                persist(log, v)?;
            }
            Ok((record, violation))
        })
        .collect::<Result<_>>()?;

    let forced_i_plus = if minor_present {
        let psi = pattern_forcing_weighting(g, &pattern, cap)?.expect("minor was found");
        let wg = WeightedGraph::new(g.clone(), psi)?;
        Some(distance_inertia(&distance_matrix(&wg), None).plus)
    } else {
        None
    };
    let search_gap = forced_i_plus.is_some_and(|p| p <= k);
    let (records, violations): (Vec<_>, Vec<_>) = outcomes.into_iter().unzip();
    let violations: Vec<Violation> = violations.into_iter().flatten().collect();
    let max_i_plus = records.iter().map(|r| r.inertia.plus).max().unwrap_or(0);
    let best = max_i_plus.max(forced_i_plus.unwrap_or(0));
    Ok(ExperimentReport {
        experiment: "strong",
        n: g.n(),
        seed,
        samples,
        law: law.name().to_string(),
        bound: k,
        max_i_plus,
        bound_attained: best >= k,
        violations,
        detail: ExperimentDetail::Strong { threes: k, minor_present, forced_i_plus, search_gap },
        records,
        wall_clock_ms: start.elapsed().as_millis() as u64,
    })
}

/// Random point sets in `[0,1]^dim` (dyadic coordinates) under an ℓp norm;
/// records how many metrics have more than one positive eigenvalue. For
/// `p <= 2` such a sample is a violation.
pub fn lp_embeddable_scan(
    n: usize,
    dim: usize,
    norm: Norm,
    samples: usize,
    seed: u64,
    log: Option<&ViolationLog>,
) -> Result<ExperimentReport> {
    if let Norm::P(p) = norm {
        if !(p >= 1.0) {
            return Err(Error::InvalidNorm(p.to_string()));
        }
    }
    let start = Instant::now();
    let claimed = matches!(norm, Norm::P(p) if p <= 2.0);
    let den = 1i64 << DYADIC_BITS;
    let outcomes: Vec<(SampleRecord, Option<Violation>)> = (0..samples as u64)
        .into_par_iter()
        .map(|index| {
            let mut rng = sample_rng(seed, index);
            let points: Vec<Vec<Rational>> =
                (0..n).map(|_| (0..dim).map(|_| frac(rng.gen_range(0..=den), den)).collect()).collect();
            let ps = PointSet::new(dim, points, norm)?;
            let m = lp_point_metric(&ps)?.to_f64();
            let inertia = inertia(&m, None);
            let record = SampleRecord { index, seed, graph_id: String::new(), inertia };
            let violation = (claimed && inertia.plus > 1).then(|| Violation {
                experiment: "lp",
                index,
                seed,
                inertia,
                bound: 1,
                graph: None,
                metric: None,
                points: Some(ps.points.iter().map(|p| p.iter().map(crate::rational::fmt_rational).collect()).collect()),
            });
            if let Some(v) = &violation {
                persist(log, v)?;
            }
            Ok((record, violation))
        })
        .collect::<Result<_>>()?;
    let (records, violations): (Vec<_>, Vec<_>) = outcomes.into_iter().unzip();
    let violations: Vec<Violation> = violations.into_iter().flatten().collect();
    let max_i_plus = records.iter().map(|r| r.inertia.plus).max().unwrap_or(0);
    let above_one = records.iter().filter(|r| r.inertia.plus > 1).count();
    Ok(ExperimentReport {
        experiment: "lp",
        n,
        seed,
        samples,
        law: format!("uniform [0,1]^{dim}, dyadic 2^-{DYADIC_BITS}"),
        bound: 1,
        max_i_plus,
        bound_attained: max_i_plus >= 1,
        violations,
        detail: ExperimentDetail::Lp {
            p: norm.to_string(),
            dim,
            above_one,
            fraction_above_one: if samples == 0 { 0.0 } else { above_one as f64 / samples as f64 },
        },
        records,
        wall_clock_ms: start.elapsed().as_millis() as u64,
    })
}

/// Zero weighting of a topology.
pub fn zero_weighting(g: &Graph) -> Vec<Rational> {
    vec![int(0); g.edge_count()]
}
