//! Cross-checks against independent oracles: nalgebra eigensolvers, closed
//! forms obtained from equitable-partition quotients, naive Bellman-Ford
//! distances and a brute-force grid over small semimetrics.

use graphmetric::graph::{Graph, WeightedGraph};
use graphmetric::lab::{k2_threes, random_connected, sample_rng, weights_from, WeightLaw};
use graphmetric::metric::{distance_matrix, DistanceMatrix};
use graphmetric::minors::k23;
use graphmetric::rational::{int, Rational};
use graphmetric::spectral::{distance_inertia, eigenvalues_symmetric, Inertia, SymMatrix};
use nalgebra::DMatrix;
use rand::Rng;

fn nalgebra_eigs(m: &SymMatrix) -> Vec<f64> {
    let n = m.n();
    let a = DMatrix::from_fn(n, n, |i, j| m.get(i, j));
    let mut ev: Vec<f64> = a.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(|x, y| y.total_cmp(x));
    ev
}

fn assert_close(got: &[f64], want: &[f64], tol: f64) {
    assert_eq!(got.len(), want.len());
    let mut want = want.to_vec();
    want.sort_by(|x, y| y.total_cmp(x));
    for (g, w) in got.iter().zip(&want) {
        assert!((g - w).abs() <= tol, "got {got:?}, want {want:?}");
    }
}

/// Shortest paths by repeated edge relaxation.
fn bellman_ford(g: &WeightedGraph) -> Vec<Vec<Option<Rational>>> {
    let n = g.n();
    let mut d: Vec<Vec<Option<Rational>>> =
        (0..n).map(|i| (0..n).map(|j| (i == j).then(|| int(0))).collect()).collect();
    for src in 0..n {
        for _ in 0..n {
            for (e, w) in g.edges().iter().zip(g.weights()) {
                for (a, b) in [(e.u, e.v), (e.v, e.u)] {
                    if let Some(da) = d[src][a].clone() {
                        let cand = da + w;
                        if d[src][b].as_ref().map_or(true, |db| cand < *db) {
                            d[src][b] = Some(cand);
                        }
                    }
                }
            }
        }
    }
    d
}

#[test]
fn floyd_warshall_matches_bellman_ford() {
    for index in 0..200 {
        let mut rng = sample_rng(99, index);
        let n = rng.gen_range(1..=9);
        let g = random_connected(n, 0.4, &mut rng).unwrap();
        let law = [WeightLaw::Uniform, WeightLaw::Tenths, WeightLaw::Exp][index as usize % 3];
        let wg = WeightedGraph::new(g.clone(), weights_from(&g, law, &mut rng)).unwrap();
        let d = distance_matrix(&wg);
        let oracle = bellman_ford(&wg);
        for i in 0..n {
            for j in 0..n {
                assert_eq!(Some(d.get(i, j)), oracle[i][j].as_ref());
            }
        }
    }
}

#[test]
fn jacobi_matches_nalgebra() {
    for index in 0..300 {
        let mut rng = sample_rng(7, index);
        let n = rng.gen_range(1..=12);
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let x: f64 = rng.gen_range(-5.0..5.0);
                data[i * n + j] = x;
                data[j * n + i] = x;
            }
        }
        let m = SymMatrix::from_flat(n, data);
        let ours = eigenvalues_symmetric(&m).eigenvalues;
        assert_close(&ours, &nalgebra_eigs(&m), 1e-9);
    }
}

#[test]
fn distance_spectra_match_nalgebra() {
    for index in 0..200 {
        let mut rng = sample_rng(8, index);
        let n = rng.gen_range(2..=10);
        let g = random_connected(n, 0.5, &mut rng).unwrap();
        let wg = WeightedGraph::new(g.clone(), weights_from(&g, WeightLaw::Tenths, &mut rng)).unwrap();
        let f = distance_matrix(&wg).to_f64();
        let ours = eigenvalues_symmetric(&f);
        let theirs = nalgebra_eigs(&f);
        assert_close(&ours.eigenvalues, &theirs, 1e-9);
        let tol = ours.tolerance;
        let plus = theirs.iter().filter(|&&x| x > tol).count();
        let minus = theirs.iter().filter(|&&x| x < -tol).count();
        assert_eq!(ours.inertia(), Inertia::new(plus, n - plus - minus, minus));
    }
}

fn unit_spectrum(g: Graph) -> Vec<f64> {
    eigenvalues_symmetric(&distance_matrix(&WeightedGraph::unit(g)).to_f64()).eigenvalues
}

#[test]
fn closed_form_path_and_cycle() {
    let s3 = 3f64.sqrt();
    assert_close(&unit_spectrum(Graph::new(3, [(0, 1), (1, 2)]).unwrap()), &[1.0 + s3, 1.0 - s3, -2.0], 1e-9);
    let c4 = Graph::new(4, [(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
    assert_close(&unit_spectrum(c4), &[4.0, 0.0, -2.0, -2.0], 1e-9);
}

/// Quotient of the unit distance matrix of a complete multipartite graph over
/// its parts: within a part distances are 2, across parts 1. Eigenvectors
/// summing to zero on one part and vanishing elsewhere give `-2` with
/// multiplicity `s - 1` per part; the rest come from the quotient.
fn multipartite_oracle(parts: &[usize]) -> Vec<f64> {
    let k = parts.len();
    let q = DMatrix::from_fn(k, k, |i, j| if i == j { 2.0 * (parts[j] as f64 - 1.0) } else { parts[j] as f64 });
    let mut ev: Vec<f64> = q.eigenvalues().expect("quotient is diagonalizable").iter().copied().collect();
    for &s in parts {
        ev.extend(std::iter::repeat(-2.0).take(s - 1));
    }
    ev
}

#[test]
fn multipartite_spectra_match_quotient_oracle() {
    let s7 = 7f64.sqrt();
    let k23_ev = unit_spectrum(k23());
    assert_close(&k23_ev, &[3.0 + s7, 3.0 - s7, -2.0, -2.0, -2.0], 1e-9);
    assert_close(&k23_ev, &multipartite_oracle(&[3, 2]), 1e-9);
    for k in 1..=4 {
        let mut parts = vec![3; k];
        parts.push(2);
        let ev = unit_spectrum(k2_threes(k));
        assert_close(&ev, &multipartite_oracle(&parts), 1e-9);
        let d = distance_matrix(&WeightedGraph::unit(k2_threes(k)));
        assert_eq!(distance_inertia(&d, None), Inertia::new(k + 1, 0, 2 * k + 1));
    }
}

#[test]
fn k23_matrix_is_bit_exact() {
    let want = DistanceMatrix::from_i64_rows(&[
        vec![0, 2, 2, 1, 1],
        vec![2, 0, 2, 1, 1],
        vec![2, 2, 0, 1, 1],
        vec![1, 1, 1, 0, 2],
        vec![1, 1, 1, 2, 0],
    ])
    .unwrap();
    assert_eq!(distance_matrix(&WeightedGraph::unit(k23())), want);
}

/// Every semimetric on three points with entries on a grid has at most one
/// positive eigenvalue.
#[test]
fn three_point_grid_oracle() {
    let steps = 24;
    for a in 0..=steps {
        for b in 0..=steps {
            for c in 0..=steps {
                if a > b + c || b > a + c || c > a + b {
                    continue;
                }
                let (a, b, c) = (a as f64, b as f64, c as f64);
                let m = SymMatrix::from_flat(3, vec![0.0, a, b, a, 0.0, c, b, c, 0.0]);
                let ev = nalgebra_eigs(&m);
                let tol = 1e-9 * 3.0 * m.max_abs().max(1.0);
                assert!(ev.iter().filter(|&&x| x > tol).count() <= 1, "{a} {b} {c}: {ev:?}");
            }
        }
    }
}
