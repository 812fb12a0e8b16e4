//! Closed-form quaternion registration and the point-to-point ICP loop.
//!
//! For fixed correspondences the optimal rotation is the eigenvector of the
//! largest eigenvalue of the symmetric 4x4 matrix built from the
//! cross-covariance of the paired points; the translation then maps the
//! moving centroid onto the matched model centroid.

use crate::correspondence::{match_correspondences, CorrespondenceSet, SpatialIndex};
use crate::eigen;
use crate::error::{Error, Result};
use crate::geometry::{mat3_mul_vec, Mat3, PointCloud, RigidTransform, UnitQuaternion, Vec3};
use crate::scalar::Real;

pub use crate::eigen::max_eigenvector;

pub const DEFAULT_TAU: f64 = 1e-8;
pub const DEFAULT_MAX_ITERATIONS: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegistrationResult<T> {
    pub transform: RigidTransform<T>,
    /// Mean squared residual over the pairs at `transform`, in mm².
    pub mse: T,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IcpConfig<T> {
    /// Stop once the mse decrease between iterations is strictly below this (mm²).
    pub tau: T,
    pub max_iterations: usize,
    pub initial_transform: RigidTransform<T>,
    /// Translate the moving cloud onto the model centroid before iterating.
    pub pre_align: bool,
    /// Use every `stride`-th moving point (1 keeps all).
    pub stride: usize,
}

impl<T: Real> Default for IcpConfig<T> {
    fn default() -> Self {
        IcpConfig {
            tau: T::lit(DEFAULT_TAU),
            max_iterations: DEFAULT_MAX_ITERATIONS,
            initial_transform: RigidTransform::identity(),
            pre_align: false,
            stride: 1,
        }
    }
}

impl<T: Real> IcpConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau > T::zero() && self.tau.is_finite()) {
            return Err(Error::invalid(format!(
                "tau must be positive, got {}",
                self.tau
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::invalid("max_iterations must be at least 1"));
        }
        if self.stride == 0 {
            return Err(Error::invalid("stride must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TerminalReason {
    Converged,
    MaxIterations,
}

impl TerminalReason {
    pub fn as_str(self) -> &'static str {
        match self {
            TerminalReason::Converged => "converged",
            TerminalReason::MaxIterations => "max_iterations",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IcpStep<T> {
    pub iteration: usize,
    pub mse: T,
    pub transform: RigidTransform<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IcpTrace<T> {
    pub steps: Vec<IcpStep<T>>,
    pub terminal_reason: TerminalReason,
}

impl<T: Real> IcpTrace<T> {
    pub fn iterations(&self) -> usize {
        self.steps.len()
    }

    pub fn mse_sequence(&self) -> impl Iterator<Item = T> + '_ {
        self.steps.iter().map(|s| s.mse)
    }

    /// True when no step increases the mse by more than `slack`.
    pub fn is_monotone(&self, slack: T) -> bool {
        self.steps.windows(2).all(|w| w[1].mse <= w[0].mse + slack)
    }
}

fn check_pairs<T: Real>(
    moving: &PointCloud<T>,
    model: &PointCloud<T>,
    pairs: &CorrespondenceSet<T>,
) -> Result<()> {
    if pairs.is_empty() {
        return Err(Error::invalid("correspondence set is empty"));
    }
    if pairs
        .iter()
        .any(|c| c.source >= moving.len() || c.target >= model.len())
    {
        return Err(Error::invalid("correspondence index out of range"));
    }
    Ok(())
}

/// Paired-point centroids `(mu_p, mu_x)`; model points count with multiplicity.
fn paired_centroids<T: Real>(
    moving: &PointCloud<T>,
    model: &PointCloud<T>,
    pairs: &CorrespondenceSet<T>,
) -> (Vec3<T>, Vec3<T>) {
    let (p, x) = (moving.points(), model.points());
    let mut sp = Vec3::zero();
    let mut sx = Vec3::zero();
    for c in pairs.iter() {
        sp += p[c.source];
        sx += x[c.target];
    }
    let inv = T::one() / T::from_count(pairs.len());
    (sp * inv, sx * inv)
}

/// Cross-covariance `(1/n) Σ (p_i - mu_p)(x_i - mu_x)^T` of the paired points.
pub fn cross_covariance<T: Real>(
    moving: &PointCloud<T>,
    model: &PointCloud<T>,
    pairs: &CorrespondenceSet<T>,
) -> Result<Mat3<T>> {
    check_pairs(moving, model, pairs)?;
    let (mu_p, mu_x) = paired_centroids(moving, model, pairs);
    let (p, x) = (moving.points(), model.points());
    let mut s = [[T::zero(); 3]; 3];
    for c in pairs.iter() {
        let dp = (p[c.source] - mu_p).to_array();
        let dx = (x[c.target] - mu_x).to_array();
        for i in 0..3 {
            for j in 0..3 {
                s[i][j] = s[i][j] + dp[i] * dx[j];
            }
        }
    }
    let inv = T::one() / T::from_count(pairs.len());
    for row in s.iter_mut() {
        for v in row.iter_mut() {
            *v = *v * inv;
        }
    }
    Ok(s)
}

/// Symmetric 4x4 matrix whose top eigenvector is the optimal rotation quaternion.
///
/// `[[tr S, Δ^T], [Δ, S + S^T - tr(S) I]]` with `Δ = (A23, A31, A12)`, `A = S - S^T`.
pub fn q_matrix<T: Real>(sigma: &Mat3<T>) -> [[T; 4]; 4] {
    let s = sigma;
    let tr = s[0][0] + s[1][1] + s[2][2];
    let delta = [s[1][2] - s[2][1], s[2][0] - s[0][2], s[0][1] - s[1][0]];
    let mut q = [[T::zero(); 4]; 4];
    q[0][0] = tr;
    for i in 0..3 {
        q[0][i + 1] = delta[i];
        q[i + 1][0] = delta[i];
        for j in 0..3 {
            q[i + 1][j + 1] = s[i][j] + s[j][i];
        }
        q[i + 1][i + 1] = q[i + 1][i + 1] - tr;
    }
    q
}

/// Mean squared residual `(1/n) Σ |x_i - (R p_i + t)|²`, summed in pair order.
pub fn mse<T: Real>(
    moving: &PointCloud<T>,
    model: &PointCloud<T>,
    pairs: &CorrespondenceSet<T>,
    t: &RigidTransform<T>,
) -> Result<T> {
    check_pairs(moving, model, pairs)?;
    Ok(mse_unchecked(moving, model, pairs, t))
}

fn mse_unchecked<T: Real>(
    moving: &PointCloud<T>,
    model: &PointCloud<T>,
    pairs: &CorrespondenceSet<T>,
    t: &RigidTransform<T>,
) -> T {
    let r = t.rotation_matrix();
    let (p, x) = (moving.points(), model.points());
    let mut sum = T::zero();
    for c in pairs.iter() {
        let moved = mat3_mul_vec(&r, p[c.source]) + t.translation;
        sum = sum + x[c.target].distance_squared(moved);
    }
    sum / T::from_count(pairs.len())
}

/// Least-squares rigid transform taking the paired moving points onto their
/// model matches.
///
/// Degenerate configurations (one point, collinear points) still produce a
/// result: any maximizing eigenvector is accepted.
pub fn compute_registration<T: Real>(
    moving: &PointCloud<T>,
    model: &PointCloud<T>,
    pairs: &CorrespondenceSet<T>,
) -> Result<RegistrationResult<T>> {
    let sigma = cross_covariance(moving, model, pairs)?;
    let (_, q) = max_eigenvector(&q_matrix(&sigma))?;
    let rotation = UnitQuaternion::normalize(q[0], q[1], q[2], q[3])
        .map_err(|_| Error::Numerical("eigenvector is not normalizable".into()))?;
    let (mu_p, mu_x) = paired_centroids(moving, model, pairs);
    let translation = mu_x - mat3_mul_vec(&rotation.to_rotation_matrix(), mu_p);
    let transform = RigidTransform::new(rotation, translation);
    let mse = mse_unchecked(moving, model, pairs, &transform);
    Ok(RegistrationResult { transform, mse })
}

/// Aligns `moving` onto `model`; see [`icp_align_indexed`].
pub fn icp_align<T: Real>(
    moving: &PointCloud<T>,
    model: &PointCloud<T>,
    cfg: &IcpConfig<T>,
) -> Result<(RegistrationResult<T>, IcpTrace<T>)> {
    cfg.validate()?;
    let index = SpatialIndex::build(model)?;
    icp_align_indexed(moving, &index, cfg)
}

/// Point-to-point ICP against a prebuilt model index.
///
/// Each iteration matches the current moving cloud into the model, registers
/// the *original* moving cloud against those matches, and re-applies the
/// result to the original cloud. Iteration stops when the mse decrease is
/// strictly below `tau` or after `max_iterations` registrations.
///
/// If rounding makes the closed-form step score worse than simply keeping the
/// previous transform on the new matches, the previous transform is kept, so
/// the mse sequence never increases.
pub fn icp_align_indexed<T: Real>(
    moving: &PointCloud<T>,
    index: &SpatialIndex<T>,
    cfg: &IcpConfig<T>,
) -> Result<(RegistrationResult<T>, IcpTrace<T>)> {
    cfg.validate()?;
    let model = index.model();
    let p0 = if cfg.stride > 1 {
        moving.subsample(cfg.stride)
    } else {
        moving.clone()
    };

    let mut previous = cfg.initial_transform;
    if cfg.pre_align {
        let shift = model.centroid() - previous.apply_point(p0.centroid());
        previous = RigidTransform::from_translation(shift).compose(&previous);
    }
    let mut current = previous.apply(&p0);

    let mut steps: Vec<IcpStep<T>> = Vec::with_capacity(cfg.max_iterations);
    let mut terminal_reason = TerminalReason::MaxIterations;
    for k in 0..cfg.max_iterations {
        let pairs = match_correspondences(index, &current);
        let mut reg = compute_registration(&p0, model, &pairs)?;
        let kept = mse_unchecked(&p0, model, &pairs, &previous);
        if kept < reg.mse {
            reg = RegistrationResult {
                transform: previous,
                mse: kept,
            };
        }
        current = reg.transform.apply(&p0);
        previous = reg.transform;

        let prev_mse = steps.last().map(|s| s.mse);
        steps.push(IcpStep {
            iteration: k,
            mse: reg.mse,
            transform: reg.transform,
        });
        if let Some(d) = prev_mse {
            if d - reg.mse < cfg.tau {
                terminal_reason = TerminalReason::Converged;
                break;
            }
        }
    }

    let last = steps.last().expect("at least one iteration");
    Ok((
        RegistrationResult {
            transform: last.transform,
            mse: last.mse,
        },
        IcpTrace {
            steps,
            terminal_reason,
        },
    ))
}

/// Converged ICP mse of `a` aligned onto `b`. Not symmetric in its arguments.
pub fn icp_distance<T: Real>(
    a: &PointCloud<T>,
    b: &PointCloud<T>,
    cfg: &IcpConfig<T>,
) -> Result<T> {
    Ok(icp_align(a, b, cfg)?.0.mse)
}

/// Distance against a prebuilt model index.
pub fn icp_distance_indexed<T: Real>(
    a: &PointCloud<T>,
    b: &SpatialIndex<T>,
    cfg: &IcpConfig<T>,
) -> Result<T> {
    Ok(icp_align_indexed(a, b, cfg)?.0.mse)
}

/// Symmetric eigen-decomposition re-exported for callers that need more
/// than the top eigenpair.
pub use eigen::symmetric_eigen;
