//! Arrangements of movable objects and the metric space they live in.

mod gnat;
mod sampler;

pub use gnat::{Gnat, DEFAULT_ARITY, DEFAULT_LEAF_CAPACITY};
pub use sampler::{sample_arrangement, SamplerConfig};

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::InputError;
use crate::geometry::{pose_distance, Pose};

/// Index of a movable object in its scene.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ObjectId(pub usize);

impl fmt::Display for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// One pose per movable object.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Arrangement {
    poses: BTreeMap<ObjectId, Pose>,
}

/// Exact bitwise identity of an arrangement, for hashing.
pub type ArrangementKey = Vec<(usize, [u64; 7])>;

impl Arrangement {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_poses(poses: impl IntoIterator<Item = (ObjectId, Pose)>) -> Self {
        Self {
            poses: poses.into_iter().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.poses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poses.is_empty()
    }

    pub fn get(&self, o: ObjectId) -> Option<&Pose> {
        self.poses.get(&o)
    }

    pub fn set(&mut self, o: ObjectId, pose: Pose) {
        self.poses.insert(o, pose);
    }

    pub fn contains(&self, o: ObjectId) -> bool {
        self.poses.contains_key(&o)
    }

    pub fn iter(&self) -> impl Iterator<Item = (ObjectId, &Pose)> + '_ {
        self.poses.iter().map(|(k, v)| (*k, v))
    }

    pub fn objects(&self) -> impl Iterator<Item = ObjectId> + '_ {
        self.poses.keys().copied()
    }

    /// `α \ o`: the same arrangement with `o` removed from consideration.
    pub fn without(&self, o: ObjectId) -> Arrangement {
        let mut out = self.clone();
        out.poses.remove(&o);
        out
    }

    /// Copy with `o` placed at `pose`.
    pub fn with(&self, o: ObjectId, pose: Pose) -> Arrangement {
        let mut out = self.clone();
        out.poses.insert(o, pose);
        out
    }

    pub fn same_objects(&self, other: &Arrangement) -> bool {
        self.poses.len() == other.poses.len() && self.poses.keys().eq(other.poses.keys())
    }

    /// Objects whose poses differ (exactly) between the two arrangements.
    pub fn differing_objects<'a>(&'a self, other: &'a Arrangement) -> impl Iterator<Item = ObjectId> + 'a {
        self.poses
            .iter()
            .filter(move |(o, p)| other.poses.get(o) != Some(p))
            .map(|(o, _)| *o)
    }

    pub fn key(&self) -> ArrangementKey {
        self.poses.iter().map(|(o, p)| (o.0, p.bits())).collect()
    }
}

/// Sum of per-object pose distances. Panics in debug builds if the object
/// sets differ; use [`try_arrangement_distance`] for untrusted input.
pub fn arrangement_distance(a: &Arrangement, b: &Arrangement, w_rot: f64) -> f64 {
    debug_assert!(a.same_objects(b));
    a.poses
        .values()
        .zip(b.poses.values())
        .map(|(pa, pb)| pose_distance(pa, pb, w_rot))
        .sum()
}

pub fn try_arrangement_distance(a: &Arrangement, b: &Arrangement, w_rot: f64) -> Result<f64, InputError> {
    if !a.same_objects(b) {
        return Err(InputError::new("arrangements cover different object sets"));
    }
    Ok(arrangement_distance(a, b, w_rot))
}
