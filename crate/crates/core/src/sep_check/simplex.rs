//! Dense-tableau Phase-1 simplex for `A x = b, x >= 0`.
//!
//! Minimizes the sum of artificial variables. Pricing is Dantzig's rule until a
//! run of degenerate pivots, after which Bland's rule takes over for good.

/// Outcome of [`phase1`].
#[derive(Debug, Clone, PartialEq)]
pub struct Phase1 {
    /// Optimal sum of artificials; zero (up to tolerance) iff the system is feasible.
    pub objective: f64,
    /// Structural part of the final basic solution.
    pub x: Vec<f64>,
    /// Row duals of the original (unflipped) system. `yᵀA_j <= 0` for every column at optimality.
    pub duals: Vec<f64>,
    pub pivots: usize,
    /// `false` when the pivot budget ran out first.
    pub optimal: bool,
}

const DEGENERATE_RUN: usize = 50;

/// Solves the Phase-1 problem for the `m×n` row-major matrix `a` and right-hand side `b`.
pub fn phase1(a: &[f64], m: usize, n: usize, b: &[f64], max_pivots: usize, tol: f64) -> Phase1 {
    assert_eq!(a.len(), m * n);
    assert_eq!(b.len(), m);
    let cols = n + m + 1;
    let rhs = n + m;
    let mut t = vec![0.0f64; m * cols];
    let mut flip = vec![1.0f64; m];
    for r in 0..m {
        if b[r] < 0.0 {
            flip[r] = -1.0;
        }
        let row = &mut t[r * cols..(r + 1) * cols];
        for j in 0..n {
            row[j] = flip[r] * a[r * n + j];
        }
        row[n + r] = 1.0;
        row[rhs] = flip[r] * b[r];
    }
    // Reduced costs of the Phase-1 objective; the last slot holds minus the objective.
    let mut z = vec![0.0f64; cols];
    for r in 0..m {
        for j in 0..n {
            z[j] -= t[r * cols + j];
        }
        z[rhs] -= t[r * cols + rhs];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();
    let mut pivots = 0usize;
    let mut degenerate = 0usize;
    let mut bland = false;
    let mut optimal = false;

    while pivots < max_pivots {
        if -z[rhs] <= tol * tol {
            optimal = true;
            break;
        }
        let entering = if bland {
            (0..n).find(|&j| z[j] < -tol)
        } else {
            let mut best = None;
            let mut best_v = -tol;
            for (j, &v) in z.iter().enumerate().take(n) {
                if v < best_v {
                    best_v = v;
                    best = Some(j);
                }
            }
            best
        };
        let Some(e) = entering else {
            optimal = true;
            break;
        };
        let mut leave: Option<usize> = None;
        let mut best_ratio = f64::INFINITY;
        for r in 0..m {
            let p = t[r * cols + e];
            if p > tol {
                let ratio = t[r * cols + rhs] / p;
                let better = match leave {
                    None => true,
                    Some(l) => {
                        if ratio < best_ratio {
                            true
                        } else if ratio == best_ratio {
                            if bland {
                                basis[r] < basis[l]
                            } else {
                                p > t[l * cols + e]
                            }
                        } else {
                            false
                        }
                    }
                };
                if better {
                    best_ratio = ratio;
                    leave = Some(r);
                }
            }
        }
        let Some(l) = leave else {
            // Unbounded direction cannot occur with a bounded-below objective; treat as optimal.
            optimal = true;
            break;
        };
        if t[l * cols + rhs] <= tol * tol {
            degenerate += 1;
            if degenerate > DEGENERATE_RUN {
                bland = true;
            }
        } else {
            degenerate = 0;
        }
        pivot(&mut t, &mut z, cols, l, e);
        basis[l] = e;
        pivots += 1;
    }

    let mut x = vec![0.0; n];
    for (r, &bv) in basis.iter().enumerate() {
        if bv < n {
            x[bv] = t[r * cols + rhs];
        }
    }
    let duals = (0..m).map(|k| flip[k] * (1.0 - z[n + k])).collect();
    Phase1 {
        objective: -z[rhs],
        x,
        duals,
        pivots,
        optimal,
    }
}

fn pivot(t: &mut [f64], z: &mut [f64], cols: usize, l: usize, e: usize) {
    let p = t[l * cols + e];
    {
        let row = &mut t[l * cols..(l + 1) * cols];
        for v in row.iter_mut() {
            *v /= p;
        }
        row[e] = 1.0;
    }
    let (before, rest) = t.split_at_mut(l * cols);
    let (prow, after) = rest.split_at_mut(cols);
    let eliminate = |row: &mut [f64]| {
        let f = row[e];
        if f != 0.0 {
            for (v, pv) in row.iter_mut().zip(prow.iter()) {
                *v -= f * pv;
            }
            row[e] = 0.0;
        }
    };
    for row in before.chunks_mut(cols) {
        eliminate(row);
    }
    for row in after.chunks_mut(cols) {
        eliminate(row);
    }
    let f = z[e];
    if f != 0.0 {
        for (v, pv) in z.iter_mut().zip(prow.iter()) {
            *v -= f * pv;
        }
        z[e] = 0.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn feasible_system() {
        // x0 + x1 = 1, x0 - x1 = 0.
        let r = phase1(&[1.0, 1.0, 1.0, -1.0], 2, 2, &[1.0, 0.0], 100, 1e-12);
        assert!(r.optimal);
        assert!(r.objective.abs() < 1e-12);
        assert!((r.x[0] - 0.5).abs() < 1e-12 && (r.x[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn infeasible_system_has_dual_certificate() {
        // x0 + x1 = 1 and x0 + x1 = -1 cannot both hold.
        let a = [1.0, 1.0, 1.0, 1.0];
        let b = [1.0, -1.0];
        let r = phase1(&a, 2, 2, &b, 100, 1e-12);
        assert!(r.optimal);
        assert!(r.objective > 1.0 - 1e-12);
        for j in 0..2 {
            let col = r.duals[0] * a[j] + r.duals[1] * a[2 + j];
            assert!(col <= 1e-12);
        }
        let yb = r.duals[0] * b[0] + r.duals[1] * b[1];
        assert!((yb - r.objective).abs() < 1e-12);
    }

    #[test]
    fn negative_rhs_is_flipped() {
        // -x0 = -2.
        let r = phase1(&[-1.0], 1, 1, &[-2.0], 10, 1e-12);
        assert!(r.objective.abs() < 1e-12);
        assert!((r.x[0] - 2.0).abs() < 1e-12);
    }
}
