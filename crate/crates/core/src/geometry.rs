//! Points, clouds, unit quaternions and rigid transforms.

use std::ops::{Add, AddAssign, Index, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// A 3-vector. Used both for positions and for displacements.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vec3<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

/// Position in millimeters.
pub type Point3<T> = Vec3<T>;

/// Row-major 3x3 matrix.
pub type Mat3<T> = [[T; 3]; 3];

impl<T: Real> Vec3<T> {
    pub const fn new(x: T, y: T, z: T) -> Self {
        Vec3 { x, y, z }
    }

    pub fn zero() -> Self {
        Vec3::new(T::zero(), T::zero(), T::zero())
    }

    pub fn from_array(a: [T; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }

    pub fn to_array(self) -> [T; 3] {
        [self.x, self.y, self.z]
    }

    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Self) -> Self {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm_squared(self) -> T {
        self.dot(self)
    }

    pub fn norm(self) -> T {
        self.norm_squared().sqrt()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Squared Euclidean distance. Every nearest-neighbor path uses this exact
    /// expression so that results compare bit-for-bit.
    #[inline]
    pub fn distance_squared(self, o: Self) -> T {
        let dx = self.x - o.x;
        let dy = self.y - o.y;
        let dz = self.z - o.z;
        dx * dx + dy * dy + dz * dz
    }

    pub fn distance(self, o: Self) -> T {
        self.distance_squared(o).sqrt()
    }

    pub fn cast<U: Real>(self) -> Vec3<U> {
        Vec3::new(
            U::lit(self.x.as_f64()),
            U::lit(self.y.as_f64()),
            U::lit(self.z.as_f64()),
        )
    }
}

impl<T: Real> Index<usize> for Vec3<T> {
    type Output = T;

    fn index(&self, i: usize) -> &T {
        match i {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("Vec3 index {i} out of range"),
        }
    }
}

impl<T: Real> Add for Vec3<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl<T: Real> AddAssign for Vec3<T> {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<T: Real> Sub for Vec3<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl<T: Real> Neg for Vec3<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl<T: Real> Mul<T> for Vec3<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

pub fn mat3_identity<T: Real>() -> Mat3<T> {
    let (o, z) = (T::one(), T::zero());
    [[o, z, z], [z, o, z], [z, z, o]]
}

pub fn mat3_mul_vec<T: Real>(m: &Mat3<T>, v: Vec3<T>) -> Vec3<T> {
    Vec3::new(
        m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
        m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
        m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z,
    )
}

pub fn mat3_mul<T: Real>(a: &Mat3<T>, b: &Mat3<T>) -> Mat3<T> {
    let mut out = [[T::zero(); 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
        }
    }
    out
}

pub fn mat3_transpose<T: Real>(m: &Mat3<T>) -> Mat3<T> {
    let mut out = *m;
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = m[j][i];
        }
    }
    out
}

pub fn mat3_det<T: Real>(m: &Mat3<T>) -> T {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Ordered, non-empty set of finite points. Point index is its identity.
#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud<T> {
    points: Vec<Point3<T>>,
}

impl<T: Real> PointCloud<T> {
    pub fn new(points: Vec<Point3<T>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("point cloud is empty"));
        }
        if let Some(i) = points.iter().position(|p| !p.is_finite()) {
            return Err(Error::invalid(format!(
                "point {i} has a non-finite coordinate"
            )));
        }
        Ok(PointCloud { points })
    }

    pub fn from_arrays(points: &[[T; 3]]) -> Result<Self> {
        Self::new(points.iter().copied().map(Vec3::from_array).collect())
    }

    pub fn points(&self) -> &[Point3<T>] {
        &self.points
    }

    pub fn into_points(self) -> Vec<Point3<T>> {
        self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// Always false; kept for API symmetry with `len`.
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Point3<T>> {
        self.points.iter()
    }

    pub fn centroid(&self) -> Vec3<T> {
        centroid_of(&self.points)
    }

    /// Axis-aligned bounding box as (min, max).
    pub fn bounds(&self) -> (Vec3<T>, Vec3<T>) {
        let mut lo = self.points[0];
        let mut hi = self.points[0];
        for p in &self.points[1..] {
            lo = Vec3::new(lo.x.min(p.x), lo.y.min(p.y), lo.z.min(p.z));
            hi = Vec3::new(hi.x.max(p.x), hi.y.max(p.y), hi.z.max(p.z));
        }
        (lo, hi)
    }

    /// Length of the bounding-box diagonal.
    pub fn extent(&self) -> T {
        let (lo, hi) = self.bounds();
        (hi - lo).norm()
    }

    /// Keeps every `stride`-th point, starting with the first.
    pub fn subsample(&self, stride: usize) -> Self {
        let stride = stride.max(1);
        PointCloud {
            points: self.points.iter().copied().step_by(stride).collect(),
        }
    }

    pub fn cast<U: Real>(&self) -> PointCloud<U> {
        PointCloud {
            points: self.points.iter().map(|p| p.cast()).collect(),
        }
    }
}

impl<'a, T> IntoIterator for &'a PointCloud<T> {
    type Item = &'a Point3<T>;
    type IntoIter = std::slice::Iter<'a, Point3<T>>;

    fn into_iter(self) -> Self::IntoIter {
        self.points.iter()
    }
}

pub(crate) fn centroid_of<T: Real>(points: &[Point3<T>]) -> Vec3<T> {
    let mut sum = Vec3::zero();
    for &p in points {
        sum += p;
    }
    sum * (T::one() / T::from_count(points.len()))
}

/// Arithmetic mean of the cloud's points.
pub fn centroid<T: Real>(cloud: &PointCloud<T>) -> Vec3<T> {
    cloud.centroid()
}

/// Rotation as a unit quaternion `(w, x, y, z)`, stored with canonical sign:
/// `w >= 0`, and when `w == 0` the first nonzero of `(x, y, z)` is positive.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnitQuaternion<T> {
    w: T,
    x: T,
    y: T,
    z: T,
}

impl<T: Real> UnitQuaternion<T> {
    pub fn identity() -> Self {
        UnitQuaternion {
            w: T::one(),
            x: T::zero(),
            y: T::zero(),
            z: T::zero(),
        }
    }

    /// Accepts a quaternion whose norm is within the unit tolerance of 1,
    /// renormalizes it and canonicalizes its sign.
    pub fn new(w: T, x: T, y: T, z: T) -> Result<Self> {
        let n2 = w * w + x * x + y * y + z * z;
        if !n2.is_finite() {
            return Err(Error::invalid("quaternion has non-finite components"));
        }
        let n = n2.sqrt();
        if (n - T::one()).abs() > T::unit_tolerance() {
            return Err(Error::invalid(format!("quaternion norm {n} is not 1")));
        }
        Ok(Self::from_raw(w / n, x / n, y / n, z / n))
    }

    /// Normalizes an arbitrary nonzero 4-vector.
    pub fn normalize(w: T, x: T, y: T, z: T) -> Result<Self> {
        let n = (w * w + x * x + y * y + z * z).sqrt();
        if !(n.is_finite() && n > T::zero()) {
            return Err(Error::invalid(
                "cannot normalize a zero or non-finite quaternion",
            ));
        }
        Ok(Self::from_raw(w / n, x / n, y / n, z / n))
    }

    fn from_raw(w: T, x: T, y: T, z: T) -> Self {
        let flip = if w != T::zero() {
            w < T::zero()
        } else if x != T::zero() {
            x < T::zero()
        } else if y != T::zero() {
            y < T::zero()
        } else {
            z < T::zero()
        };
        if flip {
            UnitQuaternion {
                w: -w,
                x: -x,
                y: -y,
                z: -z,
            }
        } else {
            UnitQuaternion { w, x, y, z }
        }
    }

    /// Rotation of `angle` radians about `axis` (need not be normalized).
    pub fn from_axis_angle(axis: Vec3<T>, angle: T) -> Result<Self> {
        let n = axis.norm();
        if !(n > T::zero()) || !n.is_finite() {
            return Err(Error::invalid("rotation axis must be nonzero"));
        }
        let half = angle * T::lit(0.5);
        let s = half.sin() / n;
        Self::normalize(half.cos(), axis.x * s, axis.y * s, axis.z * s)
    }

    /// Components as `[q0, q1, q2, q3]` (scalar first).
    pub fn to_array(self) -> [T; 4] {
        [self.w, self.x, self.y, self.z]
    }

    pub fn w(self) -> T {
        self.w
    }

    pub fn conjugate(self) -> Self {
        Self::from_raw(self.w, -self.x, -self.y, -self.z)
    }

    /// Rotation angle in radians, in `[0, pi]`.
    pub fn angle(self) -> T {
        let v = (self.x * self.x + self.y * self.y + self.z * self.z).sqrt();
        T::lit(2.0) * v.atan2(self.w.abs())
    }

    /// Angle of the relative rotation taking `self` to `o`.
    pub fn angle_to(self, o: Self) -> T {
        (self.conjugate() * o).angle()
    }

    pub fn to_rotation_matrix(self) -> Mat3<T> {
        let UnitQuaternion { w, x, y, z } = self;
        let two = T::lit(2.0);
        [
            [
                w * w + x * x - (y * y + z * z),
                two * (x * y - w * z),
                two * (x * z + w * y),
            ],
            [
                two * (x * y + w * z),
                w * w + y * y - (x * x + z * z),
                two * (y * z - w * x),
            ],
            [
                two * (x * z - w * y),
                two * (y * z + w * x),
                w * w + z * z - (x * x + y * y),
            ],
        ]
    }
}

/// Hamilton product `a * b`; the result rotates by `b` first.
impl<T: Real> Mul for UnitQuaternion<T> {
    type Output = Self;

    fn mul(self, b: Self) -> Self {
        let a = self;
        let w = a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z;
        let x = a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y;
        let y = a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x;
        let z = a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w;
        // Renormalize to stop drift when composing many rotations.
        Self::normalize(w, x, y, z).unwrap_or_else(|_| Self::identity())
    }
}

/// Rotation matrix of a unit quaternion given as `[q0, q1, q2, q3]`.
///
/// Fails when the norm deviates from 1 by more than the unit tolerance.
pub fn quaternion_to_rotation<T: Real>(q: [T; 4]) -> Result<Mat3<T>> {
    Ok(UnitQuaternion::new(q[0], q[1], q[2], q[3])?.to_rotation_matrix())
}

/// Maps `p` to `R p + t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RigidTransform<T> {
    pub rotation: UnitQuaternion<T>,
    pub translation: Vec3<T>,
}

impl<T: Real> Default for RigidTransform<T> {
    fn default() -> Self {
        Self::identity()
    }
}

impl<T: Real> RigidTransform<T> {
    pub fn new(rotation: UnitQuaternion<T>, translation: Vec3<T>) -> Self {
        RigidTransform {
            rotation,
            translation,
        }
    }

    pub fn identity() -> Self {
        Self::new(UnitQuaternion::identity(), Vec3::zero())
    }

    pub fn from_translation(t: Vec3<T>) -> Self {
        Self::new(UnitQuaternion::identity(), t)
    }

    pub fn rotation_matrix(&self) -> Mat3<T> {
        self.rotation.to_rotation_matrix()
    }

    pub fn apply_point(&self, p: Point3<T>) -> Point3<T> {
        mat3_mul_vec(&self.rotation_matrix(), p) + self.translation
    }

    pub fn apply(&self, cloud: &PointCloud<T>) -> PointCloud<T> {
        let r = self.rotation_matrix();
        PointCloud {
            points: cloud
                .points
                .iter()
                .map(|&p| mat3_mul_vec(&r, p) + self.translation)
                .collect(),
        }
    }

    /// `(R^T, -R^T t)`.
    pub fn inverse(&self) -> Self {
        let rt = mat3_transpose(&self.rotation_matrix());
        Self::new(
            self.rotation.conjugate(),
            -mat3_mul_vec(&rt, self.translation),
        )
    }

    /// `self ∘ other`: applies `other` first.
    pub fn compose(&self, other: &Self) -> Self {
        let t = mat3_mul_vec(&self.rotation_matrix(), other.translation) + self.translation;
        Self::new(self.rotation * other.rotation, t)
    }

    pub fn rotation_error(&self, other: &Self) -> T {
        self.rotation.angle_to(other.rotation)
    }

    pub fn translation_error(&self, other: &Self) -> T {
        self.translation.distance(other.translation)
    }
}

/// Each point `p` of `cloud` replaced by `R p + t`, order preserved.
pub fn apply_transform<T: Real>(t: &RigidTransform<T>, cloud: &PointCloud<T>) -> PointCloud<T> {
    t.apply(cloud)
}
