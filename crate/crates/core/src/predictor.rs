//! Basket predictors: ICP-distance nearest neighbor, the constant MEAN
//! baseline, and a k-nearest-neighbor baseline over summary log features.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

pub use crate::basket::ProductBasket;
use crate::correspondence::SpatialIndex;
use crate::eigen::symmetric_eigen;
use crate::error::{Error, Result};
use crate::geometry::{PointCloud, Vec3};
use crate::registration::{icp_distance_indexed, IcpConfig};
use crate::scalar::Real;

/// One log: its scan, the basket it produced, and optional summary features.
#[derive(Clone, Debug, PartialEq)]
pub struct LogRecord<T = f64> {
    pub id: String,
    pub scan: PointCloud<T>,
    pub basket: ProductBasket,
    pub features: Option<LogFeatures>,
}

impl<T: Real> LogRecord<T> {
    pub fn new(id: impl Into<String>, scan: PointCloud<T>, basket: ProductBasket) -> Self {
        LogRecord {
            id: id.into(),
            scan,
            basket,
            features: None,
        }
    }

    /// Fills `features` from the scan if not already present.
    pub fn ensure_features(&mut self) -> Result<&LogFeatures> {
        if self.features.is_none() {
            self.features = Some(extract_features(&self.scan)?);
        }
        Ok(self.features.as_ref().expect("just set"))
    }
}

/// Summary shape descriptors. Lengths in mm, volume in mm³.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogFeatures {
    pub volume: f64,
    pub length: f64,
    pub wide_end_diameter: f64,
    pub narrow_end_diameter: f64,
    /// `(wide - narrow) / length`.
    pub taper: f64,
}

impl LogFeatures {
    pub fn to_array(&self) -> [f64; 5] {
        [
            self.volume,
            self.length,
            self.wide_end_diameter,
            self.narrow_end_diameter,
            self.taper,
        ]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PredictionOutcome {
    pub predicted: ProductBasket,
    /// Set only by neighbor-based predictors (for kNN: the closest neighbor).
    pub neighbor_id: Option<String>,
    pub distance: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PredictorKind {
    Icp,
    Mean,
    Knn,
}

impl PredictorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PredictorKind::Icp => "icp",
            PredictorKind::Mean => "mean",
            PredictorKind::Knn => "knn",
        }
    }
}

impl fmt::Display for PredictorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PredictorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "icp" => Ok(PredictorKind::Icp),
            "mean" => Ok(PredictorKind::Mean),
            "knn" | "k-nn" => Ok(PredictorKind::Knn),
            other => Err(Error::invalid(format!("unknown predictor '{other}'"))),
        }
    }
}

/// Lowest `(distance, index)`; `None` for an empty slice.
fn argmin<T: PartialOrd + Copy>(values: &[T]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, v) in values.iter().enumerate() {
        match best {
            Some(b) if values[b].partial_cmp(v) != Some(Ordering::Greater) => {}
            _ => best = Some(i),
        }
    }
    best
}

/// ICP nearest-neighbor predictor with one prebuilt index per training scan.
///
/// The query scan is always the moving cloud and the training scan the model.
pub struct IcpNearestNeighbor<T> {
    ids: Vec<String>,
    baskets: Vec<ProductBasket>,
    indices: Vec<SpatialIndex<T>>,
}

impl<T: Real> IcpNearestNeighbor<T> {
    pub fn new(train: &[LogRecord<T>]) -> Result<Self> {
        if train.is_empty() {
            return Err(Error::invalid("training set is empty"));
        }
        let indices = train
            .par_iter()
            .map(|r| SpatialIndex::build(&r.scan))
            .collect::<Result<Vec<_>>>()?;
        Ok(IcpNearestNeighbor {
            ids: train.iter().map(|r| r.id.clone()).collect(),
            baskets: train.iter().map(|r| r.basket.clone()).collect(),
            indices,
        })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// ICP distance from `query` to every training scan, in training order.
    /// Alignments run on the current rayon pool.
    pub fn distances(&self, query: &PointCloud<T>, cfg: &IcpConfig<T>) -> Result<Vec<T>> {
        cfg.validate()?;
        self.indices
            .par_iter()
            .map(|idx| icp_distance_indexed(query, idx, cfg))
            .collect()
    }

    pub fn predict(&self, query: &PointCloud<T>, cfg: &IcpConfig<T>) -> Result<PredictionOutcome> {
        let d = self.distances(query, cfg)?;
        let best = argmin(&d).expect("non-empty training set");
        Ok(PredictionOutcome {
            predicted: self.baskets[best].clone(),
            neighbor_id: Some(self.ids[best].clone()),
            distance: Some(d[best].as_f64()),
        })
    }
}

/// Basket of the training log with the smallest ICP distance to `query`
/// (lowest training index on ties).
pub fn icp_nn_predict<T: Real>(
    train: &[LogRecord<T>],
    query: &PointCloud<T>,
    cfg: &IcpConfig<T>,
) -> Result<PredictionOutcome> {
    IcpNearestNeighbor::new(train)?.predict(query, cfg)
}

/// Rounded (half-up) componentwise mean of the training baskets.
pub fn mean_predict<T>(train: &[LogRecord<T>]) -> Result<ProductBasket> {
    if train.is_empty() {
        return Err(Error::invalid("training set is empty"));
    }
    ProductBasket::rounded_mean(train.iter().map(|r| &r.basket))
}

pub const MIN_FEATURE_POINTS: usize = 10;
const AXIAL_SLICES: usize = 100;
const END_SLAB_FRACTION: f64 = 0.05;

/// Shape features from a raw scan, measured along its principal axis.
///
/// Length is the extent along the axis; end diameters are twice the largest
/// distance from the axis within the first and last 5% of the length; volume
/// integrates convex-hull cross-section areas over 100 axial slices.
pub fn extract_features<T: Real>(scan: &PointCloud<T>) -> Result<LogFeatures> {
    if scan.len() < MIN_FEATURE_POINTS {
        return Err(Error::invalid(format!(
            "feature extraction needs at least {MIN_FEATURE_POINTS} points, got {}",
            scan.len()
        )));
    }
    let pts: Vec<Vec3<f64>> = scan.iter().map(|p| p.cast::<f64>()).collect();
    let n = pts.len() as f64;
    let c = crate::geometry::centroid_of(&pts);
    let mut cov = [[0.0f64; 3]; 3];
    for p in &pts {
        let d = (*p - c).to_array();
        for i in 0..3 {
            for j in 0..3 {
                cov[i][j] += d[i] * d[j] / n;
            }
        }
    }
    let eig = symmetric_eigen(&cov)?;
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.values[b].total_cmp(&eig.values[a]));
    let axis = Vec3::from_array(eig.vector(order[0]));
    let u = Vec3::from_array(eig.vector(order[1]));
    let v = Vec3::from_array(eig.vector(order[2]));

    // (axial position, radial 2D coordinates)
    let local: Vec<(f64, [f64; 2])> = pts
        .iter()
        .map(|&p| {
            let d = p - c;
            (d.dot(axis), [d.dot(u), d.dot(v)])
        })
        .collect();
    let (smin, smax) = local
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), l| {
            (lo.min(l.0), hi.max(l.0))
        });
    let length = smax - smin;
    if !(length > 0.0) {
        return Err(Error::invalid(
            "scan has no extent along its principal axis",
        ));
    }
    let radius = |q: &[f64; 2]| (q[0] * q[0] + q[1] * q[1]).sqrt();

    let slab = END_SLAB_FRACTION * length;
    let mut r_lo = 0.0f64;
    let mut r_hi = 0.0f64;
    for (s, q) in &local {
        if *s <= smin + slab {
            r_lo = r_lo.max(radius(q));
        }
        if *s >= smax - slab {
            r_hi = r_hi.max(radius(q));
        }
    }
    let (wide, narrow) = if r_lo >= r_hi {
        (2.0 * r_lo, 2.0 * r_hi)
    } else {
        (2.0 * r_hi, 2.0 * r_lo)
    };

    let thickness = length / AXIAL_SLICES as f64;
    let mut slices: Vec<Vec<[f64; 2]>> = vec![Vec::new(); AXIAL_SLICES];
    for (s, q) in &local {
        let i = (((s - smin) / thickness) as usize).min(AXIAL_SLICES - 1);
        slices[i].push(*q);
    }
    let areas: Vec<Option<f64>> = slices
        .iter()
        .map(|sl| {
            if sl.is_empty() {
                return None;
            }
            let hull = convex_hull_area(sl);
            if hull > 0.0 {
                Some(hull)
            } else {
                let r = sl.iter().map(radius).fold(0.0, f64::max);
                Some(std::f64::consts::PI * r * r)
            }
        })
        .collect();
    let volume = (0..AXIAL_SLICES)
        .map(|i| nearest_area(&areas, i) * thickness)
        .sum();

    Ok(LogFeatures {
        volume,
        length,
        wide_end_diameter: wide,
        narrow_end_diameter: narrow,
        taper: (wide - narrow) / length,
    })
}

/// Area of slice `i`, borrowing the closest non-empty slice when `i` has no points.
fn nearest_area(areas: &[Option<f64>], i: usize) -> f64 {
    for offset in 0..areas.len() {
        let below = i.checked_sub(offset).and_then(|j| areas[j]);
        let above = areas.get(i + offset).copied().flatten();
        if let Some(a) = below.or(above) {
            return a;
        }
    }
    0.0
}

/// Monotone-chain convex hull; returns the enclosed area (0 if degenerate).
fn convex_hull_area(points: &[[f64; 2]]) -> f64 {
    if points.len() < 3 {
        return 0.0;
    }
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return 0.0;
    }
    let cross = |o: [f64; 2], a: [f64; 2], b: [f64; 2]| {
        (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
    };
    let mut hull: Vec<[f64; 2]> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &[f64; 2]>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2
                && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0
            {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    let mut twice = 0.0;
    for i in 0..hull.len() {
        let (a, b) = (hull[i], hull[(i + 1) % hull.len()]);
        twice += a[0] * b[1] - b[0] * a[1];
    }
    (twice * 0.5).abs()
}

pub const DEFAULT_K: usize = 3;

/// kNN over z-scored features. Standardization statistics come from the
/// training set; a zero-variance feature is left unscaled.
pub struct FeatureKnn {
    ids: Vec<String>,
    baskets: Vec<ProductBasket>,
    standardized: Vec<[f64; 5]>,
    mean: [f64; 5],
    scale: [f64; 5],
}

impl FeatureKnn {
    pub fn new<T>(train: &[LogRecord<T>]) -> Result<Self> {
        if train.is_empty() {
            return Err(Error::invalid("training set is empty"));
        }
        let raw = train
            .iter()
            .map(|r| {
                r.features
                    .map(|f| f.to_array())
                    .ok_or_else(|| Error::invalid(format!("log '{}' has no features", r.id)))
            })
            .collect::<Result<Vec<_>>>()?;
        let n = raw.len() as f64;
        let mut mean = [0.0; 5];
        for f in &raw {
            for j in 0..5 {
                mean[j] += f[j] / n;
            }
        }
        let mut scale = [0.0; 5];
        for f in &raw {
            for j in 0..5 {
                scale[j] += (f[j] - mean[j]).powi(2) / n;
            }
        }
        for s in scale.iter_mut() {
            *s = if *s > 0.0 { s.sqrt() } else { 1.0 };
        }
        let standardized = raw
            .iter()
            .map(|f| std::array::from_fn(|j| (f[j] - mean[j]) / scale[j]))
            .collect();
        Ok(FeatureKnn {
            ids: train.iter().map(|r| r.id.clone()).collect(),
            baskets: train.iter().map(|r| r.basket.clone()).collect(),
            standardized,
            mean,
            scale,
        })
    }

    pub fn predict(&self, query: &LogFeatures, k: usize) -> Result<PredictionOutcome> {
        if k == 0 || k > self.ids.len() {
            return Err(Error::invalid(format!(
                "k = {k} must be between 1 and the training size {}",
                self.ids.len()
            )));
        }
        let q = query.to_array();
        let z: [f64; 5] = std::array::from_fn(|j| (q[j] - self.mean[j]) / self.scale[j]);
        let mut dist: Vec<(f64, usize)> = self
            .standardized
            .iter()
            .enumerate()
            .map(|(i, f)| {
                let d2: f64 = (0..5).map(|j| (f[j] - z[j]).powi(2)).sum();
                (d2.sqrt(), i)
            })
            .collect();
        dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let nearest = &dist[..k];
        let predicted =
            ProductBasket::rounded_mean(nearest.iter().map(|&(_, i)| &self.baskets[i]))?;
        Ok(PredictionOutcome {
            predicted,
            neighbor_id: Some(self.ids[nearest[0].1].clone()),
            distance: Some(nearest[0].0),
        })
    }
}

/// kNN baseline over standardized features; ties at equal distance go to
/// the lower training index.
pub fn knn_feature_predict<T>(
    train: &[LogRecord<T>],
    query_features: &LogFeatures,
    k: usize,
) -> Result<PredictionOutcome> {
    if k > train.len() {
        return Err(Error::invalid(format!(
            "k = {k} exceeds the training size {}",
            train.len()
        )));
    }
    FeatureKnn::new(train)?.predict(query_features, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point3;

    fn rec(id: &str, pts: &[[f64; 3]], basket: &[u32]) -> LogRecord {
        LogRecord::new(
            id,
            PointCloud::from_arrays(pts).unwrap(),
            ProductBasket::new(basket.to_vec()),
        )
    }

    #[test]
    fn argmin_prefers_lowest_index() {
        assert_eq!(argmin(&[3.0, 1.0, 1.0, 2.0]), Some(1));
        assert_eq!(argmin::<f64>(&[]), None);
    }

    #[test]
    fn mean_predict_examples() {
        let p = [[0.0, 0.0, 0.0]];
        let train = vec![rec("a", &p, &[2, 0]), rec("b", &p, &[4, 0])];
        assert_eq!(mean_predict(&train).unwrap().quantities(), &[3, 0]);
        let train = vec![rec("a", &p, &[1, 1])];
        assert_eq!(mean_predict(&train).unwrap().quantities(), &[1, 1]);
        let train = vec![rec("a", &p, &[0, 1]), rec("b", &p, &[1, 0])];
        assert_eq!(mean_predict(&train).unwrap().quantities(), &[1, 1]);
        assert!(mean_predict::<f64>(&[]).is_err());
    }

    #[test]
    fn icp_nn_on_training_member() {
        let a = [
            [0.0, 0.0, 0.0],
            [100.0, 0.0, 0.0],
            [0.0, 40.0, 0.0],
            [0.0, 0.0, 10.0],
        ];
        let b = [
            [0.0, 0.0, 0.0],
            [60.0, 0.0, 0.0],
            [0.0, 90.0, 0.0],
            [0.0, 0.0, 45.0],
        ];
        let train = vec![rec("A", &a, &[1, 0]), rec("B", &b, &[0, 1])];
        let q = PointCloud::from_arrays(&b).unwrap();
        let out = icp_nn_predict(&train, &q, &IcpConfig::default()).unwrap();
        assert_eq!(out.neighbor_id.as_deref(), Some("B"));
        assert_eq!(out.distance, Some(0.0));
        assert_eq!(out.predicted.quantities(), &[0, 1]);
    }

    #[test]
    fn icp_nn_tie_goes_to_lowest_index() {
        let a = [[0.0, 0.0, 0.0], [10.0, 0.0, 0.0], [0.0, 5.0, 0.0]];
        let train = vec![rec("first", &a, &[1]), rec("second", &a, &[2])];
        let q = PointCloud::from_arrays(&a).unwrap();
        let out = icp_nn_predict(&train, &q, &IcpConfig::default()).unwrap();
        assert_eq!(out.neighbor_id.as_deref(), Some("first"));
    }

    #[test]
    fn icp_nn_empty_train() {
        let q = PointCloud::from_arrays(&[[0.0, 0.0, 0.0]]).unwrap();
        assert!(icp_nn_predict(&[], &q, &IcpConfig::default()).is_err());
    }

    fn cylinder(length: f64, r0: f64, r1: f64, n_ring: usize, n_len: usize) -> Vec<Point3<f64>> {
        let mut pts = Vec::new();
        for i in 0..n_len {
            let t = i as f64 / (n_len - 1) as f64;
            let r = r0 + (r1 - r0) * t;
            for j in 0..n_ring {
                let a = std::f64::consts::TAU * (j as f64 + 0.5 * (i % 2) as f64) / n_ring as f64;
                pts.push(Point3::new(t * length, r * a.cos(), r * a.sin()));
            }
        }
        pts
    }

    #[test]
    fn cylinder_features() {
        let c = PointCloud::new(cylinder(1000.0, 100.0, 100.0, 64, 301)).unwrap();
        let f = extract_features(&c).unwrap();
        assert!((f.length - 1000.0).abs() <= 10.0, "{f:?}");
        assert!((f.wide_end_diameter - 200.0).abs() <= 4.0, "{f:?}");
        assert!((f.narrow_end_diameter - 200.0).abs() <= 4.0, "{f:?}");
        assert!(f.taper.abs() < 0.005, "{f:?}");
        let v = std::f64::consts::PI * 100.0f64.powi(2) * 1000.0;
        assert!((f.volume - v).abs() <= 0.05 * v, "{f:?}");
    }

    #[test]
    fn cone_taper() {
        let c = PointCloud::new(cylinder(1000.0, 100.0, 50.0, 64, 301)).unwrap();
        let f = extract_features(&c).unwrap();
        assert!((f.taper - 0.1).abs() <= 0.01, "{f:?}");
        assert!(f.wide_end_diameter > f.narrow_end_diameter);
    }

    #[test]
    fn too_few_points_for_features() {
        let c = PointCloud::from_arrays(&[[0.0, 0.0, 0.0]; 9]).unwrap();
        assert!(extract_features(&c).is_err());
    }

    #[test]
    fn hull_area_of_square() {
        let sq = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.5, 0.5]];
        assert!((convex_hull_area(&sq) - 1.0).abs() < 1e-15);
        assert_eq!(convex_hull_area(&[[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]]), 0.0);
    }

    fn feat(v: f64, l: f64) -> LogFeatures {
        LogFeatures {
            volume: v,
            length: l,
            wide_end_diameter: 300.0,
            narrow_end_diameter: 200.0,
            taper: 0.1,
        }
    }

    fn frec(id: &str, f: LogFeatures, basket: &[u32]) -> LogRecord {
        let mut r = rec(id, &[[0.0, 0.0, 0.0]], basket);
        r.features = Some(f);
        r
    }

    #[test]
    fn knn_examples() {
        let train = vec![
            frec("a", feat(1.0e8, 3000.0), &[1, 0]),
            frec("b", feat(1.1e8, 3100.0), &[1, 0]),
            frec("c", feat(1.05e8, 2950.0), &[1, 0]),
            frec("d", feat(5.0e8, 5000.0), &[0, 4]),
            frec("e", feat(5.2e8, 5100.0), &[0, 4]),
            frec("f", feat(4.9e8, 4900.0), &[0, 4]),
        ];
        let out = knn_feature_predict(&train, &feat(1.0e8, 3000.0), 1).unwrap();
        assert_eq!(out.neighbor_id.as_deref(), Some("a"));
        assert_eq!(out.predicted.quantities(), &[1, 0]);

        let out = knn_feature_predict(&train, &feat(1.02e8, 3020.0), 3).unwrap();
        assert_eq!(out.predicted.quantities(), &[1, 0]);

        let all = knn_feature_predict(&train, &feat(3.0e8, 4000.0), train.len()).unwrap();
        assert_eq!(all.predicted, mean_predict(&train).unwrap());

        assert!(knn_feature_predict(&train, &feat(1.0, 1.0), 7).is_err());
        assert!(knn_feature_predict(&train, &feat(1.0, 1.0), 0).is_err());
        let missing = vec![rec("x", &[[0.0, 0.0, 0.0]], &[1])];
        assert!(knn_feature_predict(&missing, &feat(1.0, 1.0), 1).is_err());
    }

    #[test]
    fn predictor_kind_parsing() {
        assert_eq!("ICP".parse::<PredictorKind>().unwrap(), PredictorKind::Icp);
        assert_eq!("knn".parse::<PredictorKind>().unwrap(), PredictorKind::Knn);
        assert!("rf".parse::<PredictorKind>().is_err());
    }
}
