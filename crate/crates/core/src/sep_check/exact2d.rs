//! Exact affine separability test in one or two dimensions.
//!
//! A direction `u` separates iff `min_pos uᵀx > max_neg uᵀx`. The gap changes
//! sign only at directions orthogonal to some cross-class difference, so one
//! probe strictly inside each arc between consecutive critical angles decides
//! the question.

use std::f64::consts::{PI, TAU};

/// Best separating `(u, c)` with `‖u‖ = 1`, or `None` if no line separates.
pub fn separate(pos: &[Vec<f64>], neg: &[Vec<f64>]) -> Option<(Vec<f64>, f64)> {
    let d = pos.first().or(neg.first())?.len();
    let candidates: Vec<Vec<f64>> = match d {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => {
            let mut angles: Vec<f64> = Vec::with_capacity(2 * pos.len() * neg.len());
            for p in pos {
                for q in neg {
                    let t = (p[1] - q[1]).atan2(p[0] - q[0]) + PI / 2.0;
                    angles.push(t.rem_euclid(TAU));
                    angles.push((t + PI).rem_euclid(TAU));
                }
            }
            angles.sort_by(f64::total_cmp);
            angles.dedup();
            if angles.is_empty() {
                vec![vec![1.0, 0.0]]
            } else {
                let k = angles.len();
                (0..k)
                    .map(|i| {
                        let a = angles[i];
                        let b = if i + 1 < k { angles[i + 1] } else { angles[0] + TAU };
                        let m = (a + b) / 2.0;
                        vec![m.cos(), m.sin()]
                    })
                    .collect()
            }
        }
        _ => return None,
    };
    let mut best: Option<(Vec<f64>, f64, f64)> = None;
    for u in candidates {
        let dot = |x: &Vec<f64>| u.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        let lo = pos.iter().map(dot).fold(f64::INFINITY, f64::min);
        let hi = neg.iter().map(dot).fold(f64::NEG_INFINITY, f64::max);
        let gap = lo - hi;
        if gap > 0.0 && best.as_ref().is_none_or(|b| gap > b.2) {
            let c = -(lo + hi) / 2.0;
            best = Some((u, c, gap));
        }
    }
    best.map(|(u, c, _)| (u, c))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn xor_cross_is_not_separable() {
        let pos = vec![vec![0.0, 1.0], vec![0.0, -1.0]];
        let neg = vec![vec![1.0, 0.0], vec![-1.0, 0.0]];
        assert!(separate(&pos, &neg).is_none());
    }

    #[test]
    fn pair_is_separable() {
        let (u, c) = separate(&[vec![2.0, 0.0]], &[vec![0.0, 0.0]]).unwrap();
        assert!(u[0] * 2.0 + c > 0.0 && c < 0.0);
    }

    #[test]
    fn one_dimensional() {
        assert!(separate(&[vec![1.0], vec![2.0]], &[vec![0.0]]).is_some());
        assert!(separate(&[vec![0.0], vec![2.0]], &[vec![1.0]]).is_none());
    }
}
