//! Exact feasibility of `A x = b, x >= 0` by the phase-one simplex method
//! with Bland's rule. No tolerances; Bland's rule rules out cycling.

use num_traits::{One, Signed, Zero};

use crate::rational::Rational;

/// Returns a basic feasible solution of `A x = b, x >= 0`, or `None` when
/// the system is infeasible. `a` is row-major, one row per equation.
pub fn feasible_point(a: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let rows = a.len();
    assert_eq!(rows, b.len(), "one right-hand side per row");
    let cols = a.first().map_or(0, Vec::len);
    assert!(a.iter().all(|r| r.len() == cols), "ragged constraint matrix");

    // Tableau columns: originals, then one artificial per row, then rhs.
    let width = cols + rows + 1;
    let rhs = width - 1;
    let mut t: Vec<Vec<Rational>> = Vec::with_capacity(rows);
    for (i, (row, bi)) in a.iter().zip(b).enumerate() {
        let flip = bi.is_negative();
        let mut r: Vec<Rational> = Vec::with_capacity(width);
        r.extend(row.iter().map(|x| if flip { -x.clone() } else { x.clone() }));
        r.extend((0..rows).map(|k| if k == i { Rational::one() } else { Rational::zero() }));
        r.push(if flip { -bi.clone() } else { bi.clone() });
        t.push(r);
    }
    let mut basis: Vec<usize> = (cols..cols + rows).collect();

    // Reduced costs of the phase-one objective (sum of artificials).
    let mut cost: Vec<Rational> = vec![Rational::zero(); width];
    for r in &t {
        for j in 0..cols {
            cost[j] -= &r[j];
        }
        cost[rhs] -= &r[rhs];
    }

    loop {
        // Bland: lowest-index improving column.
        let Some(enter) = (0..cols + rows).find(|&j| cost[j].is_negative()) else { break };
        // Ratio test; ties go to the lowest basic variable index.
        let mut leave: Option<(usize, Rational)> = None;
        for i in 0..rows {
            if t[i][enter].is_positive() {
                let ratio = &t[i][rhs] / &t[i][enter];
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && basis[i] < basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((pr, _)) = leave else {
            // Phase one is bounded below by zero; an unbounded ray cannot occur.
            unreachable!("phase-one objective is bounded");
        };
        pivot(&mut t, &mut cost, pr, enter);
        basis[pr] = enter;
    }

    if !cost[rhs].is_zero() {
        return None;
    }
    let mut x = vec![Rational::zero(); cols];
    for (i, &v) in basis.iter().enumerate() {
        if v < cols {
            x[v] = t[i][rhs].clone();
        }
    }
    Some(x)
}

fn pivot(t: &mut [Vec<Rational>], cost: &mut [Rational], pr: usize, pc: usize) {
    let p = t[pr][pc].clone();
    for x in t[pr].iter_mut() {
        *x /= &p;
    }
    let pivot_row = t[pr].clone();
    for (i, row) in t.iter_mut().enumerate() {
        if i == pr || row[pc].is_zero() {
            continue;
        }
        let f = row[pc].clone();
        for (x, pv) in row.iter_mut().zip(&pivot_row) {
            if !pv.is_zero() {
                *x -= &f * pv;
            }
        }
    }
    if !cost[pc].is_zero() {
        let f = cost[pc].clone();
        for (x, pv) in cost.iter_mut().zip(&pivot_row) {
            if !pv.is_zero() {
                *x -= &f * pv;
            }
        }
    }
}
