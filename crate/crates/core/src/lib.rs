//! Point-to-point ICP registration and scan-similarity basket prediction.
//!
//! Geometry, nearest-neighbor search and registration are generic over the
//! coordinate scalar ([`Real`]: `f32` or `f64`); the aliases below fix the
//! common double-precision choice. Prediction, scoring and file handling
//! work on `f64` scans.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod basket;
pub mod correspondence;
pub mod dataset;
pub mod eigen;
pub mod error;
pub mod geometry;
pub mod io;
pub mod metrics;
pub mod predictor;
pub mod registration;
pub mod scalar;
pub mod synthetic;

pub use basket::ProductBasket;
pub use correspondence::{
    build_index, match_correspondences, nearest_point, Correspondence, CorrespondenceSet,
    SpatialIndex,
};
pub use dataset::{drop_empty, split, Dataset, SplitSpec};
pub use error::{Error, Result};
pub use geometry::{
    apply_transform, centroid, quaternion_to_rotation, Mat3, Point3, PointCloud, RigidTransform,
    UnitQuaternion, Vec3,
};
pub use metrics::{evaluate, MetricConfig, ScoreReport, ScoredPair};
pub use predictor::{
    extract_features, icp_nn_predict, knn_feature_predict, mean_predict, FeatureKnn,
    IcpNearestNeighbor, LogFeatures, LogRecord, PredictionOutcome, PredictorKind,
};
pub use registration::{
    compute_registration, cross_covariance, icp_align, icp_align_indexed, icp_distance,
    max_eigenvector, mse, q_matrix, IcpConfig, IcpTrace, RegistrationResult, TerminalReason,
};
pub use scalar::Real;

pub type Point3d = Point3<f64>;
pub type Point3f = Point3<f32>;
pub type PointCloud64 = PointCloud<f64>;
pub type PointCloud32 = PointCloud<f32>;
pub type RigidTransform64 = RigidTransform<f64>;
pub type RigidTransform32 = RigidTransform<f32>;
pub type UnitQuaternion64 = UnitQuaternion<f64>;
pub type UnitQuaternion32 = UnitQuaternion<f32>;
pub type IcpConfig64 = IcpConfig<f64>;
pub type IcpConfig32 = IcpConfig<f32>;
pub type SpatialIndex64 = SpatialIndex<f64>;
pub type SpatialIndex32 = SpatialIndex<f32>;
