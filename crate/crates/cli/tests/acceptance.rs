//! Acceptance criteria 1 to 10. Runs without the libtest harness so every
//! criterion prints one PASS/FAIL line; exits nonzero if any fails.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use graphmetric::graph::{apply_plan, Graph, WeightedGraph};
use graphmetric::lab::{
    family_topology, lp_embeddable_scan, random_connected, random_tree, sample_rng, weak_conjecture_scan, weights_from,
    ExperimentDetail, FamilySpec, ViolationLog, WeightLaw,
};
use graphmetric::metric::{distance_matrix, lp_point_metric, Norm, PointMetric, PointSet};
use graphmetric::minors::{
    adversarial_weighting_k23, has_k23_subdivision, has_minor, k23, k23_distance_minor_test, DEFAULT_MINOR_CAP,
};
use graphmetric::rational::Rational;
use graphmetric::spectral::{distance_inertia, Inertia};
use graphmetric::splits::{decompose, enumerate_splits, l1_embed, DEFAULT_SPLIT_CAP};
use graphmetric::verify::{
    cut_shift_check, decomposition_check, heavy_edge_check, inertia_padding_check, minor_inertia_check,
    minor_scaling_check, random_plan, shift_values, spectrum_padding_check,
};
use rand::Rng;
use serde_json::Value;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn within(elapsed: Duration, limit: Duration) -> bool {
    elapsed < limit
}

fn graph_file(g: &Graph) -> String {
    WeightedGraph::unit(g.clone()).to_graph_file()
}

fn criterion_1() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("k23.graph");
    std::fs::write(&path, graph_file(&k23())).unwrap();
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_graphmetric")).arg("analyze").arg(&path).arg("--json").output().unwrap();
    let elapsed = start.elapsed();
    if !out.status.success() {
        return outcome(false, format!("analyze exited with {}", out.status));
    }
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let want = [[0, 2, 2, 1, 1], [2, 0, 2, 1, 1], [2, 2, 0, 1, 1], [1, 1, 1, 0, 2], [1, 1, 1, 2, 0]];
    let want_rows: Vec<Vec<String>> = want.iter().map(|r| r.iter().map(|x| x.to_string()).collect()).collect();
    let got_rows: Vec<Vec<String>> = serde_json::from_value(v["distance_matrix"].clone()).unwrap();
    let matrix_ok = got_rows == want_rows;
    let inertia = &v["spectrum"]["inertia"];
    let inertia_ok = inertia["plus"] == 2 && inertia["zero"] == 0 && inertia["minus"] == 3;
    let s7 = 7f64.sqrt();
    let expect = [3.0 + s7, 3.0 - s7, -2.0, -2.0, -2.0];
    let ev: Vec<f64> = serde_json::from_value(v["spectrum"]["eigenvalues"].clone()).unwrap();
    let gap = ev.iter().zip(&expect).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let splits_ok = v["splits"].as_array().is_some_and(Vec::is_empty) && v["totally_decomposable"] == false;
    let fast = within(elapsed, Duration::from_secs(1));
    outcome(
        matrix_ok && inertia_ok && gap <= 1e-9 && splits_ok && fast,
        format!(
            "matrix exact {matrix_ok}, inertia (2,0,3) {inertia_ok}, max eigenvalue error {gap:.1e}, no splits {splits_ok}, {elapsed:.2?}"
        ),
    )
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut details = Vec::new();
    let mut ok = true;
    for k in 1..=3 {
        let mut parts = vec![2];
        parts.extend(std::iter::repeat(3).take(k));
        let g = family_topology(&FamilySpec::CompleteMultipartite { parts }).unwrap();
        let i = distance_inertia(&distance_matrix(&WeightedGraph::unit(g)), None);
        ok &= i == Inertia::new(k + 1, 0, 2 * k + 1);
        details.push(format!("k={k}: {i}"));
    }
    let elapsed = start.elapsed();
    ok &= within(elapsed, Duration::from_secs(5));
    outcome(ok, format!("{}, {elapsed:.2?}", details.join(", ")))
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let mut topologies: Vec<(String, Box<dyn Fn(u64) -> Graph>)> = Vec::new();
    for n in 1..=8 {
        topologies.push((format!("P{n}"), Box::new(move |_| family_topology(&FamilySpec::Path { n }).unwrap())));
        topologies.push((format!("tree{n}"), Box::new(move |s| random_tree(n, &mut sample_rng(s, 1_000_000)))));
    }
    for n in 3..=8 {
        topologies.push((format!("C{n}"), Box::new(move |_| family_topology(&FamilySpec::Cycle { n }).unwrap())));
    }
    topologies.push(("K4".into(), Box::new(|_| family_topology(&FamilySpec::K4).unwrap())));
    let mut failures = Vec::new();
    let mut runs = 0;
    for (ti, (name, make)) in topologies.iter().enumerate() {
        for s in 0..100u64 {
            let seed = (ti as u64) << 32 | s;
            let g = make(seed);
            let mut rng = sample_rng(seed, 0);
            let wg = WeightedGraph::new(g.clone(), weights_from(&g, WeightLaw::Uniform, &mut rng)).unwrap();
            let d = distance_matrix(&wg);
            runs += 1;
            let plus = distance_inertia(&d, None).plus;
            let embedded = match l1_embed(&d, DEFAULT_SPLIT_CAP) {
                Ok(e) => matches!(lp_point_metric(&e.points), Ok(PointMetric::Exact(m)) if m == d),
                Err(_) => false,
            };
            if plus > 1 || !embedded {
                failures.push(format!("{name} seed {s}: i_plus {plus}, embedded {embedded}"));
            }
        }
    }
    let elapsed = start.elapsed();
    let ok = failures.is_empty() && within(elapsed, Duration::from_secs(120));
    outcome(ok, format!("{runs} weighted graphs, {} failures {:?}, {elapsed:.2?}", failures.len(), failures.first()))
}

fn subdivide(g: &Graph, e: usize) -> Graph {
    let n = g.n();
    let mut pairs: Vec<(usize, usize)> = g.edges().iter().map(|x| (x.u, x.v)).collect();
    let (u, v) = pairs.remove(e);
    pairs.push((u, n));
    pairs.push((n, v));
    Graph::new(n + 1, pairs).unwrap()
}

fn complete_bipartite(a: usize, b: usize) -> Graph {
    family_topology(&FamilySpec::CompleteMultipartite { parts: vec![a, b] }).unwrap()
}

fn criterion_4() -> Outcome {
    let mut graphs = vec![("K2,3".to_string(), k23())];
    for e in 0..k23().edge_count() {
        graphs.push((format!("K2,3 with edge {} subdivided", k23().edges()[e]), subdivide(&k23(), e)));
    }
    graphs.push(("K3,3".into(), complete_bipartite(3, 3)));
    graphs.push(("K2,4".into(), complete_bipartite(2, 4)));
    let mut failures = Vec::new();
    let mut seen = Vec::new();
    for (name, g) in &graphs {
        let plus = adversarial_weighting_k23(g)
            .map(|a| distance_inertia(&distance_matrix(&WeightedGraph::new(g.clone(), a.weights).unwrap()), None).plus);
        seen.push(format!("{name}: {plus:?}"));
        if plus.map_or(true, |p| p < 2) {
            failures.push(name.clone());
        }
    }
    outcome(failures.is_empty(), format!("i_plus {}; failures {failures:?}", seen.join(", ")))
}

fn random_instance(seed: u64, index: u64, law: WeightLaw) -> (WeightedGraph, rand_chacha::ChaCha8Rng) {
    let mut rng = sample_rng(seed, index);
    let n = rng.gen_range(2..=8);
    let p = rng.gen_range(0.3..0.9);
    let g = random_connected(n, p, &mut rng).unwrap();
    let wg = WeightedGraph::new(g.clone(), weights_from(&g, law, &mut rng)).unwrap();
    (wg, rng)
}

fn criterion_5() -> Outcome {
    let (mut pad, mut pad_inertia, mut heavy, mut heavy_runs, mut scale, mut scale_inertia) = (0, 0, 0, 0, 0, 0);
    let mut scale_no_contract = (0, 0);
    let mut first = None;
    for index in 0..200 {
        let (g, mut rng) = random_instance(5, index, WeightLaw::Tenths);
        let e = rng.gen_range(0..g.edges().len());
        let o = spectrum_padding_check(&g, e).unwrap();
        if !o.passed {
            pad += 1;
            first.get_or_insert_with(|| {
                let file = g.to_graph_file();
                format!("zero edge {} on `{}`: {}", g.edges()[e], file.trim_end().replace('\n', "; "), o.detail)
            });
        }
        pad_inertia += usize::from(!inertia_padding_check(&g, e).unwrap().passed);
        let n = g.n();
        let non_edges: Vec<(usize, usize)> =
            (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).filter(|&(a, b)| !g.graph().has_edge(a, b)).collect();
        if !non_edges.is_empty() {
            let (a, b) = non_edges[rng.gen_range(0..non_edges.len())];
            heavy_runs += 1;
            heavy += usize::from(!heavy_edge_check(&g, a, b).unwrap().passed);
        }
        let plan = random_plan(g.graph(), &mut rng);
        let applied = apply_plan(g.graph(), &plan).unwrap();
        let minor =
            WeightedGraph::new(applied.minor.clone(), weights_from(&applied.minor, WeightLaw::Uniform, &mut rng))
                .unwrap();
        let failed = !minor_scaling_check(g.graph(), &plan, &minor).unwrap().passed;
        scale += usize::from(failed);
        scale_inertia += usize::from(!minor_inertia_check(g.graph(), &plan, &minor).unwrap().passed);
        if plan.contract.is_empty() {
            scale_no_contract.0 += 1;
            scale_no_contract.1 += usize::from(failed);
        }
    }
    let ok = pad == 0 && heavy == 0 && scale == 0;
    outcome(
        ok,
        format!(
            "200 instances: spectrum padding {pad} failures (inertia form {pad_inertia}), heavy edge {heavy}/{heavy_runs}, \
             minor scaling {scale} failures (inertia form {scale_inertia}; {}/{} without contractions); first: {}",
            scale_no_contract.1,
            scale_no_contract.0,
            first.unwrap_or_default()
        ),
    )
}

fn criterion_6() -> Outcome {
    let mut instances = 0;
    let mut checks = 0;
    let mut failures = Vec::new();
    let mut index = 0;
    while instances < 100 {
        let (g, _) = random_instance(6, index, WeightLaw::Uniform);
        index += 1;
        let splits = enumerate_splits(&distance_matrix(&g), DEFAULT_SPLIT_CAP).unwrap();
        if splits.is_empty() {
            continue;
        }
        instances += 1;
        for sp in splits {
            for x in shift_values(&sp.alpha) {
                checks += 1;
                let o = cut_shift_check(&g, sp.subset, &x).unwrap();
                if !o.passed {
                    failures.push(o.detail);
                }
            }
        }
    }
    outcome(failures.is_empty(), format!("{instances} instances, {checks} shifts, {} failures", failures.len()))
}

fn criterion_7() -> Outcome {
    let mut failures = Vec::new();
    let mut with_residue = 0;
    for index in 0..200u64 {
        let mut rng = sample_rng(7, index);
        let n = rng.gen_range(2..=10);
        let d = if index % 4 == 3 {
            let dim = rng.gen_range(1..=3);
            let pts: Vec<Vec<Rational>> =
                (0..n).map(|_| (0..dim).map(|_| WeightLaw::Tenths.draw(&mut rng)).collect()).collect();
            match lp_point_metric(&PointSet::new(dim, pts, Norm::P(1.0)).unwrap()).unwrap() {
                PointMetric::Exact(m) => m,
                PointMetric::Float(_) => unreachable!("l1 metrics are exact"),
            }
        } else {
            let law = [WeightLaw::Uniform, WeightLaw::Tenths, WeightLaw::Exp][index as usize % 3];
            let g = random_connected(n, rng.gen_range(0.3..0.9), &mut rng).unwrap();
            distance_matrix(&WeightedGraph::new(g.clone(), weights_from(&g, law, &mut rng)).unwrap())
        };
        let o = decomposition_check(&d, DEFAULT_SPLIT_CAP).unwrap();
        if !o.passed {
            failures.push(o.detail);
        }
        with_residue += usize::from(!decompose(&d, DEFAULT_SPLIT_CAP).unwrap().is_totally_decomposable());
    }
    outcome(
        failures.is_empty(),
        format!("200 metrics ({with_residue} with nonzero residue), {} failures", failures.len()),
    )
}

fn criterion_8() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let log = ViolationLog::new(dir.path().join("violations.ndjson"));
    let start = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for n in 4..=10 {
        let r = weak_conjecture_scan(n, 10_000, 8, WeightLaw::Uniform, Some(&log)).unwrap();
        ok &= r.violations.is_empty();
        let extremal = match r.detail {
            ExperimentDetail::Weak { extremal } => extremal,
            _ => None,
        };
        if n == 5 || n == 8 {
            ok &= r.bound_attained && extremal.is_some_and(|i| i.plus == r.bound);
        }
        parts.push(format!("n={n}: max {} / bound {} ({} violations)", r.max_i_plus, r.bound, r.violations.len()));
    }
    let persisted = log.path().exists();
    outcome(ok, format!("{}; violations file written: {persisted}; {:.2?}", parts.join(", "), start.elapsed()))
}

fn criterion_9() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (p, norm) in [("1", Norm::P(1.0)), ("2", Norm::P(2.0)), ("10", Norm::P(10.0))] {
        let r = lp_embeddable_scan(8, 3, norm, 1000, 9, None).unwrap();
        let (above, frac_above) = match r.detail {
            ExperimentDetail::Lp { above_one, fraction_above_one, .. } => (above_one, fraction_above_one),
            _ => unreachable!("lp scan"),
        };
        if p != "10" {
            ok &= above == 0;
        }
        parts.push(format!("p={p}: {above}/1000 with i_plus > 1 (fraction {frac_above:.3})"));
    }
    outcome(ok, parts.join(", "))
}

fn corpus() -> Vec<(&'static str, Graph)> {
    let g = |n: usize, e: &[(usize, usize)]| Graph::new(n, e.iter().copied()).unwrap();
    let fam = |s: FamilySpec| family_topology(&s).unwrap();
    let cycle = |n: usize| fam(FamilySpec::Cycle { n });
    let theta = |a: usize, b: usize, c: usize| {
        let mut edges = Vec::new();
        let mut next = 2;
        for len in [a, b, c] {
            let mut prev = 0;
            for _ in 1..len {
                edges.push((prev, next));
                prev = next;
                next += 1;
            }
            edges.push((prev, 1));
        }
        Graph::new(next, edges).unwrap()
    };
    let petersen = {
        let mut e = Vec::new();
        for i in 0..5 {
            e.push((i, (i + 1) % 5));
            e.push((i, i + 5));
            e.push((5 + i, 5 + (i + 2) % 5));
        }
        g(10, &e)
    };
    let grid = |r: usize, c: usize| {
        let mut e = Vec::new();
        for i in 0..r {
            for j in 0..c {
                if j + 1 < c {
                    e.push((i * c + j, i * c + j + 1));
                }
                if i + 1 < r {
                    e.push((i * c + j, (i + 1) * c + j));
                }
            }
        }
        g(r * c, &e)
    };
    let rc = |n: usize, p: f64, seed: u64| random_connected(n, p, &mut sample_rng(seed, 0)).unwrap();
    vec![
        ("P5", fam(FamilySpec::Path { n: 5 })),
        ("C5", cycle(5)),
        ("C10", cycle(10)),
        ("star7", fam(FamilySpec::Star { n: 7 })),
        ("K4", fam(FamilySpec::K4)),
        ("K2,3", k23()),
        ("K2,3 subdivided", subdivide(&k23(), 0)),
        ("K3,3", complete_bipartite(3, 3)),
        ("K2,4", complete_bipartite(2, 4)),
        ("wheel W5", g(6, &[(0, 1), (0, 2), (0, 3), (0, 4), (0, 5), (1, 2), (2, 3), (3, 4), (4, 5), (5, 1)])),
        ("K5", fam(FamilySpec::CompleteMultipartite { parts: vec![1, 1, 1, 1, 1] })),
        ("Petersen", petersen),
        (
            "cube Q3",
            g(8, &[(0, 1), (1, 2), (2, 3), (3, 0), (4, 5), (5, 6), (6, 7), (7, 4), (0, 4), (1, 5), (2, 6), (3, 7)]),
        ),
        ("prism", g(6, &[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3), (0, 3), (1, 4), (2, 5)])),
        ("fan F6", g(7, &[(0, 1), (0, 2), (0, 3), (0, 4), (0, 5), (0, 6), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6)])),
        ("random tree 10", random_tree(10, &mut sample_rng(10, 0))),
        ("C6 with chord", g(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0), (0, 3)])),
        ("K4 with pendant", g(5, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3), (3, 4)])),
        ("bowtie", g(5, &[(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 2)])),
        ("theta(1,2,3)", theta(1, 2, 3)),
        ("theta(2,3,3)", theta(2, 3, 3)),
        ("K4 subdivided", subdivide(&fam(FamilySpec::K4), 0)),
        ("ladder 2x4", grid(2, 4)),
        ("grid 3x3", grid(3, 3)),
        (
            "triangulated octagon",
            g(
                8,
                &[
                    (0, 1),
                    (1, 2),
                    (2, 3),
                    (3, 4),
                    (4, 5),
                    (5, 6),
                    (6, 7),
                    (7, 0),
                    (0, 2),
                    (0, 3),
                    (0, 4),
                    (4, 6),
                    (0, 6),
                ],
            ),
        ),
        ("K2,3 plus edge", g(5, &[(0, 3), (0, 4), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)])),
        ("random 10", rc(10, 0.3, 1)),
        ("random 9", rc(9, 0.35, 2)),
        ("random 7 sparse", rc(7, 0.25, 3)),
        ("triangle cactus", g(7, &[(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 2), (4, 5), (5, 6), (6, 4)])),
    ]
}

fn criterion_10() -> Outcome {
    let start = Instant::now();
    let mut disagreements = Vec::new();
    let corpus = corpus();
    let mut present = 0;
    for (index, (name, g)) in corpus.iter().enumerate() {
        let sub = has_k23_subdivision(g).is_some_and(|c| c.is_valid(g));
        let minor = has_minor(g, &k23(), DEFAULT_MINOR_CAP).unwrap();
        let unit = WeightedGraph::unit(g.clone());
        let dist = if sub {
            let unit_hit = k23_distance_minor_test(&distance_matrix(&unit), DEFAULT_SPLIT_CAP).unwrap().is_some();
            unit_hit
                || adversarial_weighting_k23(g).is_some_and(|a| {
                    let d = distance_matrix(&unit.reweighted(a.weights).unwrap());
                    k23_distance_minor_test(&d, DEFAULT_SPLIT_CAP).unwrap().is_some()
                })
        } else {
            let mut weightings = vec![unit.clone()];
            for s in 0..3 {
                weightings.push(
                    unit.reweighted(weights_from(g, WeightLaw::Uniform, &mut sample_rng(index as u64, s))).unwrap(),
                );
            }
            weightings
                .iter()
                .any(|w| k23_distance_minor_test(&distance_matrix(w), DEFAULT_SPLIT_CAP).unwrap().is_some())
        };
        present += usize::from(sub);
        if !(sub == minor && minor == dist) {
            disagreements.push(format!("{name}: subdivision {sub}, minor {minor}, distance minor {dist}"));
        }
    }
    outcome(
        disagreements.is_empty(),
        format!(
            "{} graphs ({present} with K2,3 minor), disagreements {disagreements:?}, {:.2?}",
            corpus.len(),
            start.elapsed()
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("K2,3 exactness", criterion_1),
        ("K_{2,3,...,3} inertia", criterion_2),
        ("minor-free families", criterion_3),
        ("adversarial weightings", criterion_4),
        ("edge-operation spectra", criterion_5),
        ("cut-shift identity", criterion_6),
        ("decomposition reconstruction", criterion_7),
        ("weak bound scan", criterion_8),
        ("lp scan", criterion_9),
        ("K2,3 cross-validation", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        failed += usize::from(!o.passed);
        println!("criterion {:>2} {:<30} {}  {}", i + 1, name, if o.passed { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
