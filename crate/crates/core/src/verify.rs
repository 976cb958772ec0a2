//! Executable identities relating edge operations, cut shifts and split
//! decompositions to distance matrices and their spectra. Each check returns a
//! pass flag with a human-readable detail rather than panicking, so the suites
//! can be run on arbitrary user graphs.

use num_traits::{Signed, Zero};
use rand::Rng;
use serde::Serialize;

use crate::error::Result;
use crate::graph::{
    add_edge, apply_plan, contract_edge, heavy_weight, minor_weighting, Dsu, Edge, EdgeOpPlan, Graph, WeightedGraph,
};
use crate::lab::{weights_from, WeightLaw};
use crate::metric::{distance_matrix, DistanceMatrix};
use crate::rational::{fmt_rational, frac, int, Rational};
use crate::spectral::{
    default_tolerance, distance_inertia, eigenvalues_symmetric, interlacing_check, perron_check, Inertia,
};
use crate::splits::{apply_cut_shift, cut_metric, decompose, enumerate_splits, Subset};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Outcome {
    pub passed: bool,
    pub detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: String) -> Self {
        Outcome { passed, detail }
    }
}

/// Largest gap between two spectra after sorting, or `None` if the lengths
/// differ.
pub fn spectral_gap(a: &[f64], b: &[f64]) -> Option<f64> {
    if a.len() != b.len() {
        return None;
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(|x, y| y.total_cmp(x));
    b.sort_by(|x, y| y.total_cmp(x));
    Some(a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
}

fn compare_spectra(d: &DistanceMatrix, expected: &[f64]) -> Outcome {
    let f = d.to_f64();
    let tol = default_tolerance(&f);
    let got = eigenvalues_symmetric(&f).eigenvalues;
    match spectral_gap(&got, expected) {
        Some(gap) => Outcome::new(gap <= tol, format!("max eigenvalue gap {gap:e} (tolerance {tol:e})")),
        None => Outcome::new(false, format!("spectrum sizes {} vs {}", got.len(), expected.len())),
    }
}

fn compare_inertia(d: &DistanceMatrix, expected: Inertia) -> Outcome {
    let got = distance_inertia(d, None);
    Outcome::new(got == expected, format!("inertia {got}, expected {expected}"))
}

fn zero_and_contract(g: &WeightedGraph, e: usize) -> Result<(DistanceMatrix, DistanceMatrix)> {
    let mut w = g.weights().to_vec();
    w[e] = int(0);
    let zeroed = g.reweighted(w)?;
    let edge = g.edges()[e];
    let contracted = contract_edge(&zeroed, edge.u, edge.v)?;
    Ok((distance_matrix(&zeroed), distance_matrix(&contracted)))
}

/// Eigenvalue form: after zeroing edge `e`, the spectrum should be the
/// contraction's spectrum plus one zero. This fails in general (a zero edge on
/// P3 gives `{sqrt 2, 0, -sqrt 2}` against `{1, 0, -1}`); it is kept so the
/// discrepancy stays measurable.
pub fn spectrum_padding_check(g: &WeightedGraph, e: usize) -> Result<Outcome> {
    let (full, contracted) = zero_and_contract(g, e)?;
    let mut expected = eigenvalues_symmetric(&contracted.to_f64()).eigenvalues;
    expected.push(0.0);
    Ok(compare_spectra(&full, &expected))
}

/// Inertia form: zeroing edge `e` gives the contraction's inertia with one
/// more zero. Duplicating a row and column keeps the rank, and interlacing
/// bounds both signed counts from below.
pub fn inertia_padding_check(g: &WeightedGraph, e: usize) -> Result<Outcome> {
    let (full, contracted) = zero_and_contract(g, e)?;
    let i = distance_inertia(&contracted, None);
    Ok(compare_inertia(&full, Inertia::new(i.plus, i.zero + 1, i.minus)))
}

/// Adding the non-edge `{a, b}` with weight `(n - 1) * max weight` leaves the
/// distance matrix unchanged.
pub fn heavy_edge_check(g: &WeightedGraph, a: usize, b: usize) -> Result<Outcome> {
    let w = heavy_weight(g);
    let before = distance_matrix(g);
    let after = distance_matrix(&add_edge(g, a, b, w.clone())?);
    Ok(Outcome::new(before == after, format!("added {{{},{}}} with weight {}", a + 1, b + 1, fmt_rational(&w))))
}

fn forced_host(h: &Graph, plan: &EdgeOpPlan, minor: &WeightedGraph) -> Result<DistanceMatrix> {
    let psi = minor_weighting(h, plan, minor)?;
    Ok(distance_matrix(&WeightedGraph::new(h.clone(), psi)?))
}

/// Eigenvalue form: the host weighted by `minor_weighting` should carry the
/// minor's spectrum times the scale, padded with zeros. Exact for plans
/// without contractions; contractions break it for the same reason as
/// [`spectrum_padding_check`].
pub fn minor_scaling_check(h: &Graph, plan: &EdgeOpPlan, minor: &WeightedGraph) -> Result<Outcome> {
    let host = forced_host(h, plan, minor)?;
    let r = crate::rational::to_f64(&plan.scale);
    let mut expected: Vec<f64> =
        eigenvalues_symmetric(&distance_matrix(minor).to_f64()).eigenvalues.iter().map(|x| x * r).collect();
    expected.resize(h.n(), 0.0);
    Ok(compare_spectra(&host, &expected))
}

/// Inertia form: the host gets the inertia of `scale * D_minor`, padded with
/// zeros.
pub fn minor_inertia_check(h: &Graph, plan: &EdgeOpPlan, minor: &WeightedGraph) -> Result<Outcome> {
    let host = forced_host(h, plan, minor)?;
    let i = distance_inertia(&distance_matrix(minor), None);
    let pad = h.n() - minor.n();
    let expected =
        if plan.scale.is_zero() { Inertia::new(0, h.n(), 0) } else { Inertia::new(i.plus, i.zero + pad, i.minus) };
    Ok(compare_inertia(&host, expected))
}

/// Shifting the bridges of a split `S` by `x` shifts the metric by
/// `x * delta(S)`, exactly.
pub fn cut_shift_check(g: &WeightedGraph, s: Subset, x: &Rational) -> Result<Outcome> {
    let d = distance_matrix(g);
    let shifted = distance_matrix(&apply_cut_shift(g, s, x)?);
    let delta = cut_metric(g.n(), s);
    let n = g.n();
    let ok = (0..n).all(|i| (0..n).all(|j| *shifted.get(i, j) == d.get(i, j) + x * delta.get(i, j)));
    Ok(Outcome::new(ok, format!("S = {:?}, x = {}", s.labels(), fmt_rational(x))))
}

/// `m = residue + sum alpha_S delta(S)` with a nonnegative split-prime
/// residue.
pub fn decomposition_check(m: &DistanceMatrix, cap: usize) -> Result<Outcome> {
    let dec = decompose(m, cap)?;
    let exact = dec.reconstruct() == *m;
    let nonneg = dec.residue.entries().iter().all(|x| !x.is_negative());
    let prime = enumerate_splits(&dec.residue, cap)?.is_empty();
    Ok(Outcome::new(
        exact && nonneg && prime,
        format!(
            "{} splits; reconstruction {}, residue nonnegative {nonneg}, residue split-prime {prime}",
            dec.splits.len(),
            if exact { "exact" } else { "differs" }
        ),
    ))
}

/// Random plan: a random forest is contracted, every other edge that would
/// end up inside a block is deleted, then further edges are deleted while the
/// graph stays connected. The scale is drawn from `{1/2, 1, 2, 3}`.
pub fn random_plan(h: &Graph, rng: &mut impl Rng) -> EdgeOpPlan {
    let mut dsu = Dsu::new(h.n());
    let mut contract = Vec::new();
    for e in h.edges() {
        if rng.gen_bool(0.3) && dsu.find(e.u) != dsu.find(e.v) {
            dsu.union(e.u, e.v);
            contract.push(*e);
        }
    }
    let mut delete: Vec<Edge> =
        h.edges().iter().filter(|e| !contract.contains(e) && dsu.find(e.u) == dsu.find(e.v)).copied().collect();
    for e in h.edges() {
        if contract.contains(e) || delete.contains(e) || !rng.gen_bool(0.3) {
            continue;
        }
        delete.push(*e);
        let trial = EdgeOpPlan { contract: contract.clone(), delete: delete.clone(), scale: int(1) };
        if apply_plan(h, &trial).is_err() {
            delete.pop();
        }
    }
    let scale = [frac(1, 2), int(1), int(2), int(3)][rng.gen_range(0..4)].clone();
    EdgeOpPlan { contract, delete, scale }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteResult {
    pub name: &'static str,
    pub checked: usize,
    pub failures: Vec<String>,
    /// Why the suite did not run, if it did not.
    pub skipped: Option<String>,
}

impl SuiteResult {
    fn new(name: &'static str) -> Self {
        SuiteResult { name, checked: 0, failures: Vec::new(), skipped: None }
    }

    fn add(&mut self, label: String, o: Outcome) {
        self.checked += 1;
        if !o.passed {
            self.failures.push(format!("{label}: {}", o.detail));
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub suites: Vec<SuiteResult>,
}

/// Shift values tried for every split.
pub fn shift_values(alpha: &Rational) -> Vec<Rational> {
    vec![-alpha.clone(), -alpha / int(2), int(0), int(1), frac(17, 3)]
}

/// Runs every suite on `g`. Minor weights for the edge-operation plans are
/// drawn from a fixed stream so the report is reproducible.
pub fn verify_graph(g: &WeightedGraph, cap: usize) -> Result<VerifyReport> {
    let n = g.n();
    let d = distance_matrix(g);
    let mut suites = Vec::new();

    let mut padding = SuiteResult::new("spectrum_padding");
    let mut padding_inertia = SuiteResult::new("inertia_padding");
    for (i, e) in g.edges().iter().enumerate() {
        padding.add(format!("edge {e}"), spectrum_padding_check(g, i)?);
        padding_inertia.add(format!("edge {e}"), inertia_padding_check(g, i)?);
    }
    suites.push(padding);
    suites.push(padding_inertia);

    let mut heavy = SuiteResult::new("heavy_edge");
    for a in 0..n {
        for b in a + 1..n {
            if !g.graph().has_edge(a, b) {
                heavy.add(format!("non-edge {{{},{}}}", a + 1, b + 1), heavy_edge_check(g, a, b)?);
            }
        }
    }
    suites.push(heavy);

    let mut scaling = SuiteResult::new("minor_scaling");
    let mut scaling_inertia = SuiteResult::new("minor_inertia");
    let mut rng = crate::lab::sample_rng(0, 0);
    let h = g.graph();
    let mut plans = vec![EdgeOpPlan::identity(int(2))];
    for e in h.edges() {
        plans.push(EdgeOpPlan { contract: vec![*e], delete: vec![], scale: int(1) });
        let del = EdgeOpPlan { contract: vec![], delete: vec![*e], scale: int(1) };
        if apply_plan(h, &del).is_ok() {
            plans.push(del);
        }
    }
    for plan in plans {
        let applied = apply_plan(h, &plan)?;
        let w = weights_from(&applied.minor, WeightLaw::Uniform, &mut rng);
        let minor = WeightedGraph::new(applied.minor, w)?;
        let label = format!(
            "contract {:?} delete {:?}",
            plan.contract.iter().map(ToString::to_string).collect::<Vec<_>>(),
            plan.delete.iter().map(ToString::to_string).collect::<Vec<_>>()
        );
        scaling.add(label.clone(), minor_scaling_check(h, &plan, &minor)?);
        scaling_inertia.add(label, minor_inertia_check(h, &plan, &minor)?);
    }
    suites.push(scaling);
    suites.push(scaling_inertia);

    let mut shift = SuiteResult::new("cut_shift");
    let mut decomposition = SuiteResult::new("decomposition");
    if n <= cap {
        for sp in enumerate_splits(&d, cap)? {
            for x in shift_values(&sp.alpha) {
                shift.add(format!("S = {:?}", sp.subset.labels()), cut_shift_check(g, sp.subset, &x)?);
            }
        }
        decomposition.add("distance matrix".into(), decomposition_check(&d, cap)?);
    } else {
        let why = format!("{n} vertices exceeds split cap {cap}");
        shift.skipped = Some(why.clone());
        decomposition.skipped = Some(why);
    }
    suites.push(shift);
    suites.push(decomposition);

    let mut perron = SuiteResult::new("perron");
    let report = perron_check(&d);
    if let Some(why) = report.skipped {
        perron.skipped = Some(why);
    }
    for c in report.checks {
        perron.add(c.name.to_string(), Outcome::new(c.passed, c.detail));
    }
    suites.push(perron);

    let mut interlacing = SuiteResult::new("interlacing");
    let f = d.to_f64();
    if n >= 2 {
        for v in 0..n {
            let idx: Vec<usize> = (0..n).filter(|&i| i != v).collect();
            let r = interlacing_check(&f, &idx)?;
            interlacing.add(format!("delete vertex {}", v + 1), Outcome::new(r.passed(), format!("{:?}", r.checks)));
        }
    } else {
        interlacing.skipped = Some("needs at least two vertices".into());
    }
    suites.push(interlacing);

    Ok(VerifyReport { passed: suites.iter().all(SuiteResult::passed), suites })
}
