use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use graphmetric::graph::{parse_graph, WeightedGraph};
use graphmetric::lab::{
    family_topology, k2_threes, lp_embeddable_scan, strong_conjecture_scan, weak_conjecture_scan, ExperimentReport,
    FamilySpec, ViolationLog, WeightLaw,
};
use graphmetric::metric::{distance_matrix, read_metric, DistanceMatrix, Norm};
use graphmetric::minors::{
    adversarial_weighting_k23, has_k23_subdivision, k23_distance_minor_test, minor_model, CertificateReport,
    WitnessReport, DEFAULT_MINOR_CAP,
};
use graphmetric::rational::fmt_rational;
use graphmetric::spectral::{eigenvalues_symmetric, Inertia, Spectrum};
use graphmetric::splits::{decompose, l1_embed, DecompositionReport, SplitReport, DEFAULT_SPLIT_CAP};
use graphmetric::verify::{verify_graph, VerifyReport};
use graphmetric::{Error, Result};

/// Exact distance matrices, splits, inertia and K2,3 minors of weighted graphs.
#[derive(Parser)]
#[command(name = "graphmetric", version)]
struct Cli {
    /// Zero tolerance for eigenvalue classification.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Cap on points for split enumeration and on host size for minor search.
    #[arg(long, global = true)]
    cap: Option<usize>,
    /// Emit JSON on standard output.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Distance matrix, spectrum, inertia and split decomposition of a graph.
    Analyze {
        graph: PathBuf,
        /// Also emit ℓ1 coordinates (totally decomposable metrics only).
        #[arg(long)]
        embed: bool,
    },
    /// Spectrum and inertia of a graph's distance matrix or of a metric file.
    Inertia(Input),
    /// Test for a K2,3 (or K_{2,3,...,3}) minor and print a certificate.
    Minor {
        graph: PathBuf,
        /// `k23`, or `k23s:<k>` for one part of size two and k of size three.
        #[arg(long, default_value = "k23")]
        pattern: String,
    },
    /// Test whether a multiple of the K2,3 metric is a distance minor.
    Distminor(Input),
    /// Weighting that realizes the K2,3 metric on a subdivision, if any.
    Adversary { graph: PathBuf },
    /// Run the edge-operation, cut-shift and decomposition suites on a graph.
    Verify { graph: PathBuf },
    /// Random search for counterexamples to the positive-eigenvalue bounds.
    Search(SearchArgs),
    /// Print a family member in the graph file format.
    Gen {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct Input {
    /// Graph file.
    #[arg(required_unless_present = "matrix", conflicts_with = "matrix")]
    graph: Option<PathBuf>,
    /// Metric file instead of a graph.
    #[arg(long)]
    matrix: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Path,
    Cycle,
    Star,
    TreeRandom,
    ConnectedRandom,
    CompleteMultipartite,
    K4,
}

#[derive(Args)]
struct FamilyArgs {
    #[arg(long, value_enum)]
    family: Option<Family>,
    #[arg(long)]
    n: Option<usize>,
    /// Part sizes, e.g. `2,3,3`.
    #[arg(long, value_delimiter = ',')]
    parts: Vec<usize>,
    /// Edge probability for connected-random.
    #[arg(long)]
    prob: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Conjecture {
    Weak,
    Strong,
    Lp,
}

#[derive(Clone, Copy, ValueEnum)]
enum Law {
    Uniform,
    Tenths,
    Exp,
}

impl From<Law> for WeightLaw {
    fn from(l: Law) -> Self {
        match l {
            Law::Uniform => WeightLaw::Uniform,
            Law::Tenths => WeightLaw::Tenths,
            Law::Exp => WeightLaw::Exp,
        }
    }
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long, value_enum)]
    conjecture: Conjecture,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "uniform")]
    law: Law,
    /// Number of threes in the forbidden minor (strong).
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// Fixed topology for the strong scan; otherwise the family flags apply.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Ambient dimension (lp).
    #[arg(long, default_value_t = 2)]
    dim: usize,
    /// Norm parameter (lp): a number >= 1 or `inf`.
    #[arg(long, default_value = "1")]
    p: String,
    /// Append violations here as newline-delimited JSON.
    #[arg(long, default_value = "violations.ndjson")]
    violations: PathBuf,
    #[command(flatten)]
    family: FamilyArgs,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn load_graph(path: &Path) -> Result<WeightedGraph> {
    parse_graph(&read(path)?)
}

fn load_input(input: &Input) -> Result<DistanceMatrix> {
    match (&input.graph, &input.matrix) {
        (_, Some(m)) => read_metric(&read(m)?),
        (Some(g), None) => Ok(distance_matrix(&load_graph(g)?)),
        (None, None) => unreachable!("clap requires one input"),
    }
}

fn family_spec(f: &FamilyArgs, seed: u64) -> Result<FamilySpec> {
    let need_n = || f.n.ok_or_else(|| Error::InvalidFamily("--n is required for this family".into()));
    Ok(match f.family {
        None => return Err(Error::InvalidFamily("--family is required".into())),
        Some(Family::Path) => FamilySpec::Path { n: need_n()? },
        Some(Family::Cycle) => FamilySpec::Cycle { n: need_n()? },
        Some(Family::Star) => FamilySpec::Star { n: need_n()? },
        Some(Family::TreeRandom) => FamilySpec::TreeRandom { n: need_n()?, seed },
        Some(Family::ConnectedRandom) => FamilySpec::ConnectedRandom { n: need_n()?, p: f.prob, seed },
        Some(Family::CompleteMultipartite) => FamilySpec::CompleteMultipartite { parts: f.parts.clone() },
        Some(Family::K4) => FamilySpec::K4,
    })
}

fn parse_norm(p: &str) -> Result<Norm> {
    if p == "inf" {
        return Ok(Norm::Infinity);
    }
    match p.parse::<f64>() {
        Ok(x) if x >= 1.0 => Ok(Norm::P(x)),
        _ => Err(Error::InvalidNorm(p.to_string())),
    }
}

#[derive(Serialize)]
struct SpectrumReport {
    eigenvalues: Vec<f64>,
    tolerance: f64,
    inertia: Inertia,
}

fn spectrum(d: &DistanceMatrix, tol: Option<f64>) -> SpectrumReport {
    let mut s: Spectrum = eigenvalues_symmetric(&d.to_f64());
    if let Some(t) = tol {
        s.tolerance = t;
    }
    SpectrumReport { inertia: s.inertia(), tolerance: s.tolerance, eigenvalues: s.eigenvalues }
}

#[derive(Serialize)]
struct EmbeddingReport {
    axes: Vec<SplitReport>,
    coordinates: Vec<Vec<String>>,
}

#[derive(Serialize)]
struct AnalyzeReport {
    n: usize,
    distance_matrix: Vec<Vec<String>>,
    spectrum: SpectrumReport,
    splits: Option<Vec<SplitReport>>,
    residue: Option<Vec<Vec<String>>>,
    totally_decomposable: Option<bool>,
    embedding: Option<EmbeddingReport>,
}

#[derive(Serialize)]
struct MinorReport {
    pattern: String,
    present: bool,
    /// Subdivision certificate (K2,3 only).
    certificate: Option<CertificateReport>,
    /// Branch sets, one list of host vertices per pattern vertex.
    branch_sets: Option<Vec<Vec<usize>>>,
}

#[derive(Serialize)]
struct DistMinorReport {
    present: bool,
    witness: Option<WitnessReport>,
}

#[derive(Serialize)]
struct AdversaryReport {
    present: bool,
    certificate: Option<CertificateReport>,
    graph: Option<String>,
    spectrum: Option<SpectrumReport>,
}

fn emit<T: Serialize>(json: bool, value: &T, human: impl FnOnce(&T) -> String) {
    if json {
        println!("{}", serde_json::to_string_pretty(value).expect("report serializes"));
    } else {
        print!("{}", human(value));
    }
}

fn human_spectrum(s: &SpectrumReport) -> String {
    let ev: Vec<String> = s.eigenvalues.iter().map(|x| format!("{x:.12}")).collect();
    format!("eigenvalues: {}\ninertia: {}\n", ev.join(" "), s.inertia)
}

fn human_splits(splits: &[SplitReport]) -> String {
    if splits.is_empty() {
        return "splits: none\n".into();
    }
    let mut out = String::from("splits:\n");
    for s in splits {
        out.push_str(&format!("  S = {:?}  alpha = {}\n", s.s, s.alpha));
    }
    out
}

fn rows_text(rows: &[Vec<String>]) -> String {
    rows.iter().map(|r| format!("  {}\n", r.join(" "))).collect()
}

fn run(cli: Cli) -> Result<()> {
    let json = cli.json;
    let split_cap = cli.cap.unwrap_or(DEFAULT_SPLIT_CAP);
    let minor_cap = cli.cap.unwrap_or(DEFAULT_MINOR_CAP);
    match cli.command {
        Command::Analyze { graph, embed } => {
            let d = distance_matrix(&load_graph(&graph)?);
            let mut report = AnalyzeReport {
                n: d.n(),
                distance_matrix: d.to_strings(),
                spectrum: spectrum(&d, cli.tol),
                splits: None,
                residue: None,
                totally_decomposable: None,
                embedding: None,
            };
            if d.n() <= split_cap {
                let DecompositionReport { splits, residue, totally_decomposable } =
                    decompose(&d, split_cap)?.to_report();
                report.splits = Some(splits);
                report.residue = Some(residue);
                report.totally_decomposable = Some(totally_decomposable);
                if embed && totally_decomposable {
                    let e = l1_embed(&d, split_cap)?;
                    report.embedding = Some(EmbeddingReport {
                        axes: e
                            .axes
                            .iter()
                            .map(|s| SplitReport { s: s.subset.labels(), alpha: fmt_rational(&s.alpha) })
                            .collect(),
                        coordinates: e.points.points.iter().map(|p| p.iter().map(fmt_rational).collect()).collect(),
                    });
                }
            } else if embed {
                return Err(Error::OverCap { n: d.n(), cap: split_cap });
            }
            emit(json, &report, |r| {
                let mut out = format!("distance matrix ({} points):\n{}", r.n, rows_text(&r.distance_matrix));
                out.push_str(&human_spectrum(&r.spectrum));
                match (&r.splits, &r.residue, r.totally_decomposable) {
                    (Some(s), Some(res), Some(td)) => {
                        out.push_str(&human_splits(s));
                        out.push_str(&format!("residue:\n{}totally decomposable: {td}\n", rows_text(res)));
                    }
                    _ => out.push_str(&format!("splits: skipped ({} points exceeds cap {split_cap})\n", r.n)),
                }
                if embed && r.totally_decomposable == Some(false) {
                    out.push_str("l1 embedding: none (metric is not totally decomposable)\n");
                }
                if let Some(e) = &r.embedding {
                    out.push_str("l1 coordinates:\n");
                    out.push_str(&rows_text(&e.coordinates));
                }
                out
            });
        }
        Command::Inertia(input) => {
            let d = load_input(&input)?;
            emit(json, &spectrum(&d, cli.tol), human_spectrum);
        }
        Command::Minor { graph, pattern } => {
            let g = load_graph(&graph)?;
            let threes = match pattern.as_str() {
                "k23" => None,
                p => match p.strip_prefix("k23s:").and_then(|k| k.parse::<usize>().ok()) {
                    Some(k) if k >= 1 => Some(k),
                    _ => return Err(Error::InvalidFamily(format!("unknown pattern `{p}`"))),
                },
            };
            let report = match threes {
                None => {
                    let cert = has_k23_subdivision(g.graph());
                    MinorReport {
                        pattern,
                        present: cert.is_some(),
                        certificate: cert.map(|c| c.to_report()),
                        branch_sets: None,
                    }
                }
                Some(k) => {
                    let pat = k2_threes(k);
                    let model = minor_model(g.graph(), &pat, minor_cap)?;
                    let branch_sets = model.map(|m| {
                        (0..pat.n())
                            .map(|p| (0..g.n()).filter(|&v| m.block_of[v] == p).map(|v| v + 1).collect())
                            .collect()
                    });
                    MinorReport { pattern, present: branch_sets.is_some(), certificate: None, branch_sets }
                }
            };
            emit(json, &report, |r| {
                let mut out = format!("{} minor: {}\n", r.pattern, if r.present { "present" } else { "absent" });
                if let Some(c) = &r.certificate {
                    out.push_str(&format!("branch vertices: {:?}\n", c.branch));
                    for p in &c.paths {
                        out.push_str(&format!("  path {p:?}\n"));
                    }
                }
                if let Some(b) = &r.branch_sets {
                    for (i, s) in b.iter().enumerate() {
                        out.push_str(&format!("  branch set {}: {s:?}\n", i + 1));
                    }
                }
                out
            });
        }
        Command::Distminor(input) => {
            let d = load_input(&input)?;
            let w = k23_distance_minor_test(&d, split_cap)?;
            let report = DistMinorReport { present: w.is_some(), witness: w.map(|w| w.to_report()) };
            emit(json, &report, |r| {
                let mut out = format!("K2,3 distance minor: {}\n", if r.present { "present" } else { "absent" });
                if let Some(w) = &r.witness {
                    out.push_str(&format!("indices: {:?}\nc = {}\nlambda0 = {}\n", w.indices, w.c, w.lambda0));
                    for l in &w.lambdas {
                        out.push_str(&format!("  lambda_{:?} = {}\n", l.s, l.lambda));
                    }
                }
                out
            });
        }
        Command::Adversary { graph } => {
            let g = load_graph(&graph)?;
            let report = match adversarial_weighting_k23(g.graph()) {
                None => AdversaryReport { present: false, certificate: None, graph: None, spectrum: None },
                Some(a) => {
                    let wg = g.reweighted(a.weights)?;
                    AdversaryReport {
                        present: true,
                        certificate: Some(a.certificate.to_report()),
                        spectrum: Some(spectrum(&distance_matrix(&wg), cli.tol)),
                        graph: Some(wg.to_graph_file()),
                    }
                }
            };
            emit(json, &report, |r| match (&r.graph, &r.spectrum) {
                (Some(gf), Some(s)) => {
                    let notes: String = human_spectrum(s).lines().map(|l| format!("# {l}\n")).collect();
                    format!("{gf}{notes}")
                }
                _ => "no K2,3 subdivision: every weighting has at most one positive eigenvalue\n".into(),
            });
        }
        Command::Verify { graph } => {
            let g = load_graph(&graph)?;
            let report: VerifyReport = verify_graph(&g, split_cap)?;
            emit(json, &report, |r| {
                let mut out = String::new();
                for s in &r.suites {
                    let status = match (&s.skipped, s.passed()) {
                        (Some(why), _) if s.checked == 0 => format!("skipped ({why})"),
                        (_, true) => "pass".into(),
                        (_, false) => format!("FAIL ({} of {})", s.failures.len(), s.checked),
                    };
                    out.push_str(&format!("{:<18} {:>4} checks  {status}\n", s.name, s.checked));
                    for f in s.failures.iter().take(3) {
                        out.push_str(&format!("    {f}\n"));
                    }
                }
                out
            });
        }
        Command::Search(args) => {
            let log = ViolationLog::new(&args.violations);
            let law: WeightLaw = args.law.into();
            let report: ExperimentReport = match args.conjecture {
                Conjecture::Weak => {
                    let n = args.family.n.ok_or_else(|| Error::InvalidFamily("--n is required".into()))?;
                    weak_conjecture_scan(n, args.samples, args.seed, law, Some(&log))?
                }
                Conjecture::Strong => {
                    let g = match &args.graph {
                        Some(p) => load_graph(p)?.graph().clone(),
                        None => family_topology(&family_spec(&args.family, args.seed)?)?,
                    };
                    strong_conjecture_scan(&g, args.samples, args.seed, args.k, law, minor_cap, Some(&log))?
                }
                Conjecture::Lp => {
                    let n = args.family.n.ok_or_else(|| Error::InvalidFamily("--n is required".into()))?;
                    lp_embeddable_scan(n, args.dim, parse_norm(&args.p)?, args.samples, args.seed, Some(&log))?
                }
            };
            emit(json, &report, |r| {
                let mut out = format!(
                    "{} scan: n = {}, {} samples, seed {}, law {}\nmax i_plus = {}, bound = {}, attained = {}\n",
                    r.experiment, r.n, r.samples, r.seed, r.law, r.max_i_plus, r.bound, r.bound_attained
                );
                out.push_str(&format!("detail: {}\n", serde_json::to_string(&r.detail).expect("detail serializes")));
                if r.violations.is_empty() {
                    out.push_str("violations: none\n");
                } else {
                    out.push_str(&format!(
                        "violations: {} (appended to {})\n",
                        r.violations.len(),
                        log.path().display()
                    ));
                }
                out.push_str(&format!("wall clock: {} ms\n", r.wall_clock_ms));
                out
            });
        }
        Command::Gen { family, seed } => {
            let g = WeightedGraph::unit(family_topology(&family_spec(&family, seed)?)?);
            #[derive(Serialize)]
            struct GenReport {
                n: usize,
                graph: String,
            }
            emit(json, &GenReport { n: g.n(), graph: g.to_graph_file() }, |r| r.graph.clone());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
