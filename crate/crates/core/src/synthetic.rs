//! Synthetic log scans and datasets for experiments without real scanner data.
//!
//! A prototype log is a bent, tapered, slightly elliptical trunk with
//! low-frequency surface bumps, sampled at random surface points. Copies of a
//! prototype are the same sample rigidly moved and jittered, standing in for
//! repeated scans of similar logs.

use std::collections::HashSet;
use std::f64::consts::{PI, TAU};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::basket::ProductBasket;
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::geometry::{Point3, PointCloud, RigidTransform, UnitQuaternion, Vec3};
use crate::io::default_product_names;
use crate::predictor::LogRecord;

/// Shape parameters of one synthetic log, in mm.
#[derive(Clone, Debug, PartialEq)]
pub struct LogShape {
    pub length: f64,
    pub butt_radius: f64,
    pub top_radius: f64,
    pub ellipticity: f64,
    pub sweep: f64,
    /// `(angular frequency, axial wavenumber, amplitude, phase)`.
    pub bumps: Vec<(f64, f64, f64, f64)>,
}

impl LogShape {
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let butt_radius = rng.gen_range(110.0..260.0);
        LogShape {
            length: rng.gen_range(2500.0..5200.0),
            butt_radius,
            top_radius: butt_radius * rng.gen_range(0.55..0.95),
            ellipticity: rng.gen_range(0.0..0.12),
            sweep: rng.gen_range(0.0..60.0),
            bumps: (0..3)
                .map(|_| {
                    (
                        rng.gen_range(1..4) as f64,
                        rng.gen_range(0.5..4.0) * TAU,
                        rng.gen_range(2.0..12.0),
                        rng.gen_range(0.0..TAU),
                    )
                })
                .collect(),
        }
    }

    /// Surface point at axial fraction `t` in [0, 1] and angle `theta`.
    pub fn surface_point(&self, t: f64, theta: f64) -> Point3<f64> {
        let mut r = self.butt_radius + (self.top_radius - self.butt_radius) * t;
        for &(freq, wave, amp, phase) in &self.bumps {
            r += amp * (freq * theta + wave * t + phase).sin();
        }
        let y = r * (1.0 + self.ellipticity) * theta.cos() + self.sweep * (PI * t).sin();
        let z = r * (1.0 - self.ellipticity) * theta.sin();
        Point3::new((t - 0.5) * self.length, y, z)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Result<PointCloud<f64>> {
        PointCloud::new(
            (0..n)
                .map(|_| self.surface_point(rng.gen_range(0.0..=1.0), rng.gen_range(0.0..TAU)))
                .collect(),
        )
    }
}

/// Uniformly random axis, angle up to `max_angle` radians, translation
/// uniform in a ball of radius `max_translation`.
pub fn random_rigid_transform<R: Rng + ?Sized>(
    rng: &mut R,
    max_angle: f64,
    max_translation: f64,
) -> RigidTransform<f64> {
    let axis = random_unit_vector(rng);
    let angle = rng.gen_range(0.0..=max_angle);
    let dir = random_unit_vector(rng);
    let len = max_translation * rng.gen_range(0.0f64..=1.0).cbrt();
    RigidTransform::new(
        UnitQuaternion::from_axis_angle(axis, angle).expect("unit axis"),
        dir * len,
    )
}

pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R) -> Vec3<f64> {
    loop {
        let v = Vec3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v * (1.0 / n);
        }
    }
}

/// Adds independent uniform noise in `[-amplitude, amplitude]` to every coordinate.
pub fn jitter<R: Rng + ?Sized>(
    cloud: &PointCloud<f64>,
    amplitude: f64,
    rng: &mut R,
) -> PointCloud<f64> {
    if amplitude <= 0.0 {
        return cloud.clone();
    }
    let mut d = || rng.gen_range(-amplitude..=amplitude);
    PointCloud::new(
        cloud
            .iter()
            .map(|&p| p + Vec3::new(d(), d(), d()))
            .collect(),
    )
    .expect("finite jittered points")
}

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticSpec {
    pub prototypes: usize,
    pub copies_per_prototype: usize,
    pub products: usize,
    /// Inclusive range of points per prototype scan.
    pub points: (usize, usize),
    pub max_rotation_deg: f64,
    pub max_translation_mm: f64,
    pub jitter_mm: f64,
    /// Number of prototypes given an all-zero basket.
    pub empty_prototypes: usize,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            prototypes: 30,
            copies_per_prototype: 7,
            products: 19,
            points: (200, 400),
            max_rotation_deg: 5.0,
            max_translation_mm: 25.0,
            jitter_mm: 0.5,
            empty_prototypes: 0,
            seed: 0,
        }
    }
}

fn random_basket<R: Rng + ?Sized>(rng: &mut R, products: usize) -> ProductBasket {
    let active = rng.gen_range(1..=products.min(5));
    let mut q = vec![0u32; products];
    for _ in 0..active {
        q[rng.gen_range(0..products)] += rng.gen_range(1..=4);
    }
    ProductBasket::new(q)
}

/// Dataset of `prototypes x copies_per_prototype` logs. Ids are
/// `p{prototype:03}c{copy}`; non-empty prototype baskets are pairwise distinct.
pub fn generate_dataset(spec: &SyntheticSpec) -> Result<Dataset<f64>> {
    if spec.prototypes == 0 || spec.copies_per_prototype == 0 || spec.products == 0 {
        return Err(Error::invalid(
            "synthetic dataset needs prototypes, copies and products",
        ));
    }
    if spec.empty_prototypes > spec.prototypes {
        return Err(Error::invalid("more empty prototypes than prototypes"));
    }
    if spec.points.0 == 0 || spec.points.0 > spec.points.1 {
        return Err(Error::invalid("invalid point count range"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut used = HashSet::new();
    let mut records = Vec::with_capacity(spec.prototypes * spec.copies_per_prototype);
    for p in 0..spec.prototypes {
        let shape = LogShape::random(&mut rng);
        let n = rng.gen_range(spec.points.0..=spec.points.1);
        let base = shape.sample(&mut rng, n)?;
        let basket = if p < spec.empty_prototypes {
            ProductBasket::zeros(spec.products)
        } else {
            let mut attempts = 0;
            loop {
                let b = random_basket(&mut rng, spec.products);
                if used.insert(b.clone()) {
                    break b;
                }
                attempts += 1;
                if attempts > 10_000 {
                    return Err(Error::invalid("could not draw distinct baskets"));
                }
            }
        };
        for c in 0..spec.copies_per_prototype {
            let t = random_rigid_transform(
                &mut rng,
                spec.max_rotation_deg.to_radians(),
                spec.max_translation_mm,
            );
            let scan = jitter(&t.apply(&base), spec.jitter_mm, &mut rng);
            records.push(LogRecord::new(format!("p{p:03}c{c}"), scan, basket.clone()));
        }
    }
    Dataset::new(
        records,
        spec.products,
        Some(default_product_names(spec.products)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dataset_shape() {
        let spec = SyntheticSpec {
            prototypes: 4,
            copies_per_prototype: 3,
            empty_prototypes: 1,
            points: (50, 60),
            ..SyntheticSpec::default()
        };
        let ds = generate_dataset(&spec).unwrap();
        assert_eq!(ds.len(), 12);
        assert_eq!(ds.product_count(), 19);
        let empties = ds
            .records()
            .iter()
            .filter(|r| r.basket.is_all_zero())
            .count();
        assert_eq!(empties, 3);
        assert!(ds
            .records()
            .iter()
            .all(|r| (50..=60).contains(&r.scan.len())));
        assert_eq!(generate_dataset(&spec).unwrap(), ds);
    }

    #[test]
    fn transform_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let t = random_rigid_transform(&mut rng, 0.3, 50.0);
            assert!(t.rotation.angle() <= 0.3 + 1e-12);
            assert!(t.translation.norm() <= 50.0 + 1e-9);
        }
    }
}
