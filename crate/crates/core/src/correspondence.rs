//! Exact closest-point queries into a fixed model cloud.
//!
//! [`SpatialIndex`] is a static kd-tree. Queries return the same
//! `(index, squared distance)` as an exhaustive scan, including the tie rule:
//! at equal distance the lowest model index wins. Subtrees are only pruned
//! when their splitting-plane bound is strictly larger than the current best,
//! so equal-distance candidates on the far side are always visited.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::geometry::{Point3, PointCloud};
use crate::scalar::Real;

const LEAF_SIZE: usize = 8;

#[derive(Clone, Debug)]
enum Node<T> {
    Leaf {
        start: u32,
        end: u32,
    },
    Split {
        axis: u8,
        value: T,
        left: u32,
        right: u32,
    },
}

/// Immutable nearest-neighbor index over a model cloud.
#[derive(Clone, Debug)]
pub struct SpatialIndex<T> {
    model: PointCloud<T>,
    /// Model points permuted into leaf order, paired with their original index.
    slots: Vec<(Point3<T>, u32)>,
    nodes: Vec<Node<T>>,
}

impl<T: Real> SpatialIndex<T> {
    pub fn build(model: &PointCloud<T>) -> Result<Self> {
        if model.len() >= u32::MAX as usize {
            return Err(Error::invalid("model cloud too large to index"));
        }
        let slots = model
            .iter()
            .enumerate()
            .map(|(i, &p)| (p, i as u32))
            .collect::<Vec<_>>();
        let mut index = SpatialIndex {
            model: model.clone(),
            slots,
            nodes: Vec::with_capacity(2 * model.len() / LEAF_SIZE + 1),
        };
        index.build_node(0, model.len());
        Ok(index)
    }

    fn build_node(&mut self, start: usize, end: usize) -> u32 {
        let id = self.nodes.len() as u32;
        if end - start <= LEAF_SIZE {
            self.nodes.push(Node::Leaf {
                start: start as u32,
                end: end as u32,
            });
            return id;
        }

        let range = &mut self.slots[start..end];
        let mut lo = range[0].0;
        let mut hi = range[0].0;
        for (p, _) in range.iter() {
            lo = Point3::new(lo.x.min(p.x), lo.y.min(p.y), lo.z.min(p.z));
            hi = Point3::new(hi.x.max(p.x), hi.y.max(p.y), hi.z.max(p.z));
        }
        let ext = hi - lo;
        let axis = if ext.x >= ext.y && ext.x >= ext.z {
            0
        } else if ext.y >= ext.z {
            1
        } else {
            2
        };
        if ext[axis] == T::zero() {
            // All coincident: nothing to split on.
            self.nodes.push(Node::Leaf {
                start: start as u32,
                end: end as u32,
            });
            return id;
        }

        let mid = (end - start) / 2;
        range.select_nth_unstable_by(mid, |a, b| {
            a.0[axis].partial_cmp(&b.0[axis]).unwrap_or(Ordering::Equal)
        });
        let value = range[mid].0[axis];

        self.nodes.push(Node::Leaf { start: 0, end: 0 });
        let left = self.build_node(start, start + mid);
        let right = self.build_node(start + mid, end);
        self.nodes[id as usize] = Node::Split {
            axis: axis as u8,
            value,
            left,
            right,
        };
        id
    }

    pub fn model(&self) -> &PointCloud<T> {
        &self.model
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    /// Closest model point to `p` as `(model index, squared distance)`.
    pub fn nearest(&self, p: Point3<T>) -> (usize, T) {
        let mut best = (T::infinity(), u32::MAX);
        self.search(0, p, &mut best);
        (best.1 as usize, best.0)
    }

    fn search(&self, node: u32, q: Point3<T>, best: &mut (T, u32)) {
        match self.nodes[node as usize] {
            Node::Leaf { start, end } => {
                for &(p, i) in &self.slots[start as usize..end as usize] {
                    let d = q.distance_squared(p);
                    if d < best.0 || (d == best.0 && i < best.1) {
                        *best = (d, i);
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = q[axis as usize] - value;
                let (near, far) = if diff <= T::zero() {
                    (left, right)
                } else {
                    (right, left)
                };
                self.search(near, q, best);
                if diff * diff <= best.0 {
                    self.search(far, q, best);
                }
            }
        }
    }
}

/// Builds the index over `model`.
pub fn build_index<T: Real>(model: &PointCloud<T>) -> Result<SpatialIndex<T>> {
    SpatialIndex::build(model)
}

/// Model point closest to `p`; ties go to the lowest model index.
pub fn nearest_point<T: Real>(index: &SpatialIndex<T>, p: Point3<T>) -> (usize, T) {
    index.nearest(p)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Correspondence<T> {
    pub source: usize,
    pub target: usize,
    pub squared_distance: T,
}

/// One match per moving point, in moving-point order.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrespondenceSet<T> {
    pairs: Vec<Correspondence<T>>,
}

impl<T: Real> CorrespondenceSet<T> {
    /// Pairs `i -> i` for equally sized clouds, with exact squared distances.
    pub fn identity(moving: &PointCloud<T>, model: &PointCloud<T>) -> Result<Self> {
        if moving.len() != model.len() {
            return Err(Error::invalid(format!(
                "identity pairing needs equal sizes, got {} and {}",
                moving.len(),
                model.len()
            )));
        }
        Ok(CorrespondenceSet {
            pairs: moving
                .iter()
                .zip(model.iter())
                .enumerate()
                .map(|(i, (&p, &x))| Correspondence {
                    source: i,
                    target: i,
                    squared_distance: p.distance_squared(x),
                })
                .collect(),
        })
    }

    /// Arbitrary `(source, target)` pairs; squared distances are recomputed.
    pub fn from_pairs(
        moving: &PointCloud<T>,
        model: &PointCloud<T>,
        pairs: &[(usize, usize)],
    ) -> Result<Self> {
        let mut out = Vec::with_capacity(pairs.len());
        for &(s, t) in pairs {
            let (p, x) = match (moving.points().get(s), model.points().get(t)) {
                (Some(p), Some(x)) => (*p, *x),
                _ => return Err(Error::invalid(format!("pair ({s}, {t}) out of range"))),
            };
            out.push(Correspondence {
                source: s,
                target: t,
                squared_distance: p.distance_squared(x),
            });
        }
        Ok(CorrespondenceSet { pairs: out })
    }

    pub fn pairs(&self) -> &[Correspondence<T>] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Correspondence<T>> {
        self.pairs.iter()
    }
}

/// Nearest model point for every point of `moving`, in order. Many-to-one
/// matches are allowed.
pub fn match_correspondences<T: Real>(
    index: &SpatialIndex<T>,
    moving: &PointCloud<T>,
) -> CorrespondenceSet<T> {
    CorrespondenceSet {
        pairs: moving
            .iter()
            .enumerate()
            .map(|(source, &p)| {
                let (target, squared_distance) = index.nearest(p);
                Correspondence {
                    source,
                    target,
                    squared_distance,
                }
            })
            .collect(),
    }
}
