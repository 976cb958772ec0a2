//! Symmetric eigenvalues by cyclic Jacobi rotations, inertia with an
//! explicit zero tolerance, and the Perron and interlacing checks.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::metric::{check_indices, DistanceMatrix};

/// Dense square matrix of doubles, row-major. Callers supply symmetric data.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn from_flat(n: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), n * n, "flat data must hold n*n entries");
        SymMatrix { n, data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if let Some((row, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(Error::NotSquare { rows: n, row: row + 1, cols: r.len() });
        }
        Ok(SymMatrix { n, data: rows.concat() })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn scaled(&self, c: f64) -> SymMatrix {
        SymMatrix { n: self.n, data: self.data.iter().map(|x| x * c).collect() }
    }

    pub fn submatrix(&self, idx: &[usize]) -> SymMatrix {
        let k = idx.len();
        let mut data = Vec::with_capacity(k * k);
        for &i in idx {
            for &j in idx {
                data.push(self.get(i, j));
            }
        }
        SymMatrix { n: k, data }
    }

    fn frobenius(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

/// Zero-classification tolerance `1e-9 * max(1, max|entry|) * n`.
pub fn default_tolerance(m: &SymMatrix) -> f64 {
    1e-9 * m.max_abs().max(1.0) * m.n() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Inertia {
    pub plus: usize,
    pub zero: usize,
    pub minus: usize,
}

impl Inertia {
    pub fn new(plus: usize, zero: usize, minus: usize) -> Self {
        Inertia { plus, zero, minus }
    }
}

impl std::fmt::Display for Inertia {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {}, {})", self.plus, self.zero, self.minus)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    /// Sorted descending.
    pub eigenvalues: Vec<f64>,
    pub tolerance: f64,
}

impl Spectrum {
    pub fn inertia(&self) -> Inertia {
        let t = self.tolerance;
        let plus = self.eigenvalues.iter().filter(|&&x| x > t).count();
        let minus = self.eigenvalues.iter().filter(|&&x| x < -t).count();
        Inertia { plus, zero: self.eigenvalues.len() - plus - minus, minus }
    }

    /// Largest eigenvalue.
    pub fn top(&self) -> Option<f64> {
        self.eigenvalues.first().copied()
    }
}

const MAX_SWEEPS: usize = 100;

/// Eigenvalues of a symmetric matrix, sorted descending. Sweeps stop when the
/// off-diagonal Frobenius norm drops below `1e-12 * ||m||_F`.
pub fn eigenvalues_symmetric(m: &SymMatrix) -> Spectrum {
    let n = m.n;
    let tolerance = default_tolerance(m);
    let mut a = m.data.clone();
    let stop = 1e-12 * m.frobenius();
    let off = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[i * n + j] * a[i * n + j];
                }
            }
        }
        s.sqrt()
    };
    for _ in 0..MAX_SWEEPS {
        if off(&a) <= stop {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                a[p * n + p] -= t * apq;
                a[q * n + q] += t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for r in 0..n {
                    if r == p || r == q {
                        continue;
                    }
                    let arp = a[r * n + p];
                    let arq = a[r * n + q];
                    let new_rp = c * arp - s * arq;
                    let new_rq = s * arp + c * arq;
                    a[r * n + p] = new_rp;
                    a[p * n + r] = new_rp;
                    a[r * n + q] = new_rq;
                    a[q * n + r] = new_rq;
                }
            }
        }
    }
    let mut eigenvalues: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    eigenvalues.sort_by(|x, y| y.total_cmp(x));
    Spectrum { eigenvalues, tolerance }
}

/// Inertia using the default tolerance unless `tol` overrides it.
pub fn inertia(m: &SymMatrix, tol: Option<f64>) -> Inertia {
    let mut spec = eigenvalues_symmetric(m);
    if let Some(t) = tol {
        spec.tolerance = t;
    }
    spec.inertia()
}

pub fn distance_inertia(d: &DistanceMatrix, tol: Option<f64>) -> Inertia {
    inertia(&d.to_f64(), tol)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    /// Set when the check did not apply; `checks` is then empty.
    pub skipped: Option<String>,
    pub checks: Vec<SubCheck>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Spectral radius is the top eigenvalue, is simple, dominates in absolute
/// value, lies between the extreme row sums, and the spectrum sums to zero.
pub fn perron_check(m: &DistanceMatrix) -> CheckReport {
    if m.is_zero() {
        return CheckReport { skipped: Some("zero matrix: Perron bounds do not apply".into()), checks: vec![] };
    }
    let f = m.to_f64();
    let spec = eigenvalues_symmetric(&f);
    let tol = spec.tolerance;
    let ev = &spec.eigenvalues;
    let rho = ev[0];
    let lowest = *ev.last().expect("nonempty spectrum");
    let row_sums: Vec<f64> = (0..f.n()).map(|i| f.row(i).iter().sum()).collect();
    let lo = row_sums.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = row_sums.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = ev.iter().sum();
    let second = ev.get(1).copied().unwrap_or(f64::NEG_INFINITY);
    let n = f.n() as f64;
    let checks = vec![
        SubCheck {
            name: "dominant",
            passed: rho + tol >= lowest.abs(),
            detail: format!("rho = {rho}, |lambda_min| = {}", lowest.abs()),
        },
        SubCheck {
            name: "simple",
            passed: rho - second > tol,
            detail: format!("lambda_1 - lambda_2 = {}", rho - second),
        },
        SubCheck {
            name: "row_sum_bounds",
            passed: lo - tol <= rho && rho <= hi + tol,
            detail: format!("{lo} <= {rho} <= {hi}"),
        },
        SubCheck { name: "trace_zero", passed: sum.abs() <= n * tol, detail: format!("sum of eigenvalues = {sum}") },
    ];
    CheckReport { skipped: None, checks }
}

/// Cauchy interlacing between `m` and its principal submatrix on `idx`:
/// `lambda_i >= mu_i >= lambda_{i + n - k}`.
pub fn interlacing_check(m: &SymMatrix, idx: &[usize]) -> Result<CheckReport> {
    check_indices(m.n(), idx)?;
    if idx.is_empty() {
        return Err(Error::InvalidIndices("empty index set".into()));
    }
    let full = eigenvalues_symmetric(m);
    let sub = eigenvalues_symmetric(&m.submatrix(idx));
    let (n, k) = (m.n(), idx.len());
    let tol = full.tolerance;
    let mut checks = Vec::with_capacity(k + 1);
    for (i, mu) in sub.eigenvalues.iter().enumerate() {
        let upper = full.eigenvalues[i];
        let lower = full.eigenvalues[i + n - k];
        checks.push(SubCheck {
            name: "interlace",
            passed: lower - tol <= *mu && *mu <= upper + tol,
            detail: format!("{lower} <= mu_{} = {mu} <= {upper}", i + 1),
        });
    }
    let (p_sub, p_full) = (sub.inertia().plus, full.inertia().plus);
    checks.push(SubCheck {
        name: "positive_count",
        passed: p_sub <= p_full,
        detail: format!("i_plus(sub) = {p_sub}, i_plus(full) = {p_full}"),
    });
    Ok(CheckReport { skipped: None, checks })
}
