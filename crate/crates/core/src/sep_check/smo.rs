//! Hard-margin SVM dual solved by SMO with second-order working-set selection.
//!
//! Solves `min ½αᵀQα − eᵀα` subject to `α >= 0`, `yᵀα = 0`, where
//! `Q_ij = y_i y_j K_ij`. There is no upper bound on `α`.

const TAU: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SmoState {
    pub alpha: Vec<f64>,
    grad: Vec<f64>,
    pub iterations: u64,
    /// Last maximal KKT violation `Gmax − Gmin`.
    pub gap: f64,
}

impl SmoState {
    pub fn new(n: usize) -> Self {
        Self {
            alpha: vec![0.0; n],
            grad: vec![-1.0; n],
            iterations: 0,
            gap: f64::INFINITY,
        }
    }

    /// `eᵀα − ½αᵀQα`, the dual objective being maximized.
    pub fn dual_objective(&self) -> f64 {
        // ½αᵀQα = ½αᵀ(G + e).
        let half_quad: f64 = self.alpha.iter().zip(&self.grad).map(|(a, g)| a * (g + 1.0)).sum::<f64>() / 2.0;
        self.alpha.iter().sum::<f64>() - half_quad
    }
}

/// Runs SMO until the KKT gap drops below `eps` or `max_iter` total iterations are spent.
///
/// `gram` is the row-major `n×n` kernel matrix shared across label vectors. Returns
/// `true` on convergence.
pub fn solve(gram: &[f64], y: &[f64], eps: f64, max_iter: u64, state: &mut SmoState) -> bool {
    let n = y.len();
    debug_assert_eq!(gram.len(), n * n);
    let k = |i: usize, j: usize| gram[i * n + j];
    while state.iterations < max_iter {
        let alpha = &mut state.alpha;
        let grad = &mut state.grad;
        let mut gmax = f64::NEG_INFINITY;
        let mut i_sel = usize::MAX;
        for t in 0..n {
            let in_up = y[t] > 0.0 || alpha[t] > 0.0;
            if in_up {
                let v = -y[t] * grad[t];
                if v > gmax {
                    gmax = v;
                    i_sel = t;
                }
            }
        }
        if i_sel == usize::MAX {
            state.gap = 0.0;
            return true;
        }
        let i = i_sel;
        let mut gmin = f64::INFINITY;
        let mut j_sel = usize::MAX;
        let mut obj_min = f64::INFINITY;
        let kii = k(i, i);
        for t in 0..n {
            let in_low = y[t] < 0.0 || alpha[t] > 0.0;
            if !in_low {
                continue;
            }
            let v = -y[t] * grad[t];
            if v < gmin {
                gmin = v;
            }
            let b = gmax - v;
            if b > 0.0 {
                let a = kii + k(t, t) - 2.0 * k(i, t);
                let a = if a > 0.0 { a } else { TAU };
                let o = -(b * b) / a;
                if o <= obj_min {
                    obj_min = o;
                    j_sel = t;
                }
            }
        }
        state.gap = gmax - gmin;
        if state.gap < eps || j_sel == usize::MAX {
            return true;
        }
        let j = j_sel;
        let old_ai = alpha[i];
        let old_aj = alpha[j];
        let quad = {
            let q = kii + k(j, j) - 2.0 * k(i, j);
            if q > 0.0 {
                q
            } else {
                TAU
            }
        };
        if y[i] != y[j] {
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
        } else {
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let dai = alpha[i] - old_ai;
        let daj = alpha[j] - old_aj;
        for t in 0..n {
            // Q_ti = y_t y_i K_ti
            grad[t] += y[t] * (y[i] * k(t, i) * dai + y[j] * k(t, j) * daj);
        }
        state.iterations += 1;
    }
    false
}
