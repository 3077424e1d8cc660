//! Concentric ring and sphere datasets.

use std::f64::consts::TAU;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::geometry::MulticlassDataset;
use crate::seeding;

pub const DEFAULT_RADII: [f64; 3] = [120.0, 240.0, 360.0];
pub const DEFAULT_POINTS: usize = 100;
pub const DEFAULT_SPHERE_DIM: usize = 100;

fn check_radii(radii: &[f64], points: usize) -> Result<()> {
    if radii.is_empty() {
        return Err(Error::InvalidRadii("no radii given".into()));
    }
    if points == 0 {
        return Err(Error::InvalidRadii("need at least one point per class".into()));
    }
    if radii.iter().any(|r| !(*r > 0.0) || !r.is_finite()) {
        return Err(Error::InvalidRadii(format!("radii must be positive and finite: {radii:?}")));
    }
    if radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidRadii(format!("radii must be strictly increasing: {radii:?}")));
    }
    Ok(())
}

/// Equally spaced points on circles, with ring `k` rotated by `rotations[k]`.
pub fn gen_rings_rotated(points_per_ring: usize, radii: &[f64], rotations: &[f64]) -> Result<MulticlassDataset<f64>> {
    check_radii(radii, points_per_ring)?;
    if rotations.len() != radii.len() {
        return Err(Error::InvalidRadii(format!(
            "{} rotations for {} rings",
            rotations.len(),
            radii.len()
        )));
    }
    let classes = radii
        .iter()
        .zip(rotations)
        .map(|(&r, &rot)| {
            (0..points_per_ring)
                .map(|j| {
                    let t = rot + TAU * j as f64 / points_per_ring as f64;
                    vec![r * t.cos(), r * t.sin()]
                })
                .collect()
        })
        .collect();
    MulticlassDataset::new(classes)
}

/// Rings sharing one seed-determined rotation; class `k` is ring `k`.
///
/// Aligned angles keep the minimum cross-class distance equal to the radial gap.
pub fn gen_rings(points_per_ring: usize, radii: &[f64], seed: u64) -> Result<MulticlassDataset<f64>> {
    let step = TAU / points_per_ring.max(1) as f64;
    let rot = seeding::rng(seed).random::<f64>() * step;
    gen_rings_rotated(points_per_ring, radii, &vec![rot; radii.len()])
}

/// Uniform samples on concentric spheres in `ℝ^d`; class `k` is sphere `k`.
pub fn gen_spheres(d: usize, points_per_sphere: usize, radii: &[f64], seed: u64) -> Result<MulticlassDataset<f64>> {
    if d < 2 {
        return Err(Error::InvalidShape(format!("spheres need d >= 2, got {d}")));
    }
    check_radii(radii, points_per_sphere)?;
    let classes = radii
        .iter()
        .enumerate()
        .map(|(k, &r)| {
            let mut rng = seeding::derived_rng(seed, &[k as u64]);
            (0..points_per_sphere)
                .map(|_| loop {
                    let v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
                    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                    if n > 0.0 {
                        break v.into_iter().map(|x| r * x / n).collect();
                    }
                })
                .collect()
        })
        .collect();
    MulticlassDataset::new(classes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::vecops;

    #[test]
    fn default_rings_shape() {
        let ds = gen_rings(DEFAULT_POINTS, &DEFAULT_RADII, 0).unwrap();
        assert_eq!(ds.n_total(), 300);
        assert_eq!(ds.n_classes(), 3);
        assert!((ds.radius() - 360.0).abs() < 1e-9);
        assert!((ds.min_cross_class_distance() - 120.0).abs() < 1e-9);
        let aligned = gen_rings_rotated(DEFAULT_POINTS, &DEFAULT_RADII, &[0.0; 3]).unwrap();
        assert!((aligned.min_cross_class_distance() - 120.0).abs() < 1e-9);
    }

    #[test]
    fn quarter_ring() {
        let ds = gen_rings_rotated(4, &[1.0], &[0.0]).unwrap();
        let expect = [[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]];
        for (p, e) in ds.classes()[0].iter().zip(expect) {
            assert!((p[0] - e[0]).abs() < 1e-15 && (p[1] - e[1]).abs() < 1e-15);
        }
    }

    #[test]
    fn spheres_norms() {
        let ds = gen_spheres(100, 100, &DEFAULT_RADII, 1).unwrap();
        assert_eq!(ds.n_total(), 300);
        assert_eq!(ds.dim(), 100);
        for (c, pts) in ds.classes().iter().enumerate() {
            for p in pts {
                assert!((vecops::norm(p) - DEFAULT_RADII[c]).abs() < 1e-9);
            }
        }
        assert!(ds.min_cross_class_distance() >= 120.0 - 1e-9);
    }

    #[test]
    fn bad_radii() {
        assert!(matches!(gen_rings(10, &[2.0, 1.0], 0), Err(Error::InvalidRadii(_))));
        assert!(matches!(gen_rings(10, &[], 0), Err(Error::InvalidRadii(_))));
        assert!(matches!(gen_spheres(3, 10, &[-1.0], 0), Err(Error::InvalidRadii(_))));
    }
}
