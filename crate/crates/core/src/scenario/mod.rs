//! Scenes, problems, the problem file format, generators for the benchmark
//! families, and solution traces.

mod format;
mod generate;
mod trace;

pub use format::{parse_problem, serialize_problem, ScenarioError};
pub use generate::{generate_problem, generate_problem_with, Family, GeneratorOptions};
pub use trace::{export_trace, solution_from_trace, Frame, SolutionTrace, TraceStep};

use std::collections::BTreeMap;

use crate::arrangement::{Arrangement, ObjectId};
use crate::error::InputError;
use crate::geometry::{Aabb, BoxShape, Pose, Vec3};
use crate::manipulation::GripperModel;
use crate::physics::{SimConfig, SimWorld, StaticBody};

/// Flat axis-aligned box resting on the ground.
#[derive(Clone, Debug, PartialEq)]
pub struct Tile {
    pub pose: Pose,
    pub half_extents: Vec3,
}

/// Static sphere, usually half-buried in the ground.
#[derive(Clone, Debug, PartialEq)]
pub struct Bump {
    pub center: Vec3,
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Obstacle {
    pub pose: Pose,
    pub half_extents: Vec3,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ObjectSpec {
    pub name: String,
    pub half_extents: Vec3,
    pub mass: f64,
}

impl ObjectSpec {
    pub fn shape(&self) -> BoxShape {
        BoxShape {
            half_extents: self.half_extents,
            mass: self.mass,
        }
    }
}

/// Everything static about a problem: workspace, terrain, obstacles, the
/// movable objects, simulator settings and the gripper.
#[derive(Clone, Debug, PartialEq)]
pub struct SceneSpec {
    pub workspace: Aabb,
    pub ground_height: f64,
    pub tiles: Vec<Tile>,
    pub bumps: Vec<Bump>,
    pub obstacles: Vec<Obstacle>,
    /// Object `i` is `ObjectId(i)`.
    pub objects: Vec<ObjectSpec>,
    pub sim: SimConfig,
    pub gripper: GripperModel,
}

impl SceneSpec {
    pub fn object_id(&self, name: &str) -> Option<ObjectId> {
        self.objects.iter().position(|o| o.name == name).map(ObjectId)
    }

    pub fn object_name(&self, o: ObjectId) -> Option<&str> {
        self.objects.get(o.0).map(|s| s.name.as_str())
    }

    pub fn statics(&self) -> Vec<StaticBody> {
        let mut out = vec![StaticBody::Ground {
            height: self.ground_height,
        }];
        out.extend(self.tiles.iter().map(|t| StaticBody::Box {
            shape: BoxShape {
                half_extents: t.half_extents,
                mass: 0.0,
            },
            pose: t.pose,
        }));
        out.extend(self.bumps.iter().map(|b| StaticBody::Sphere {
            center: b.center,
            radius: b.radius,
        }));
        out.extend(self.obstacles.iter().map(|o| StaticBody::Box {
            shape: BoxShape {
                half_extents: o.half_extents,
                mass: 0.0,
            },
            pose: o.pose,
        }));
        out
    }

    pub fn world(&self) -> SimWorld {
        let objects: BTreeMap<_, _> = self
            .objects
            .iter()
            .enumerate()
            .map(|(i, o)| (ObjectId(i), o.shape()))
            .collect();
        SimWorld::new(self.statics(), objects, self.sim.clone())
    }

    /// Structural checks: unique names, valid shapes, terrain inside the
    /// workspace.
    pub fn validate(&self) -> Result<(), InputError> {
        self.sim.validate()?;
        self.gripper.validate()?;
        let ws = &self.workspace;
        if self.objects.is_empty() {
            return Err(InputError::new("scene.objects must not be empty"));
        }
        for (i, o) in self.objects.iter().enumerate() {
            if self.objects[..i].iter().any(|p| p.name == o.name) {
                return Err(InputError::new(format!("scene.objects: duplicate id '{}'", o.name)));
            }
            BoxShape::new(o.half_extents, o.mass)
                .map_err(|e| InputError::new(format!("scene.objects '{}': {}", o.name, e.message)))?;
            if !(o.mass > 0.0) {
                return Err(InputError::new(format!(
                    "scene.objects '{}': mass must be positive",
                    o.name
                )));
            }
        }
        for (i, t) in self.tiles.iter().enumerate() {
            let inside = BoxShape {
                half_extents: t.half_extents,
                mass: 0.0,
            }
            .corners(&t.pose)
            .iter()
            .all(|c| ws.contains(c));
            if !inside || t.half_extents.iter().any(|h| !(*h > 0.0)) {
                return Err(InputError::new(format!(
                    "scene.tiles[{i}] lies outside the workspace or is degenerate"
                )));
            }
        }
        for (i, b) in self.bumps.iter().enumerate() {
            if !(b.radius > 0.0) || !ws.contains(&b.center) {
                return Err(InputError::new(format!(
                    "scene.bumps[{i}] lies outside the workspace or is degenerate"
                )));
            }
        }
        for (i, o) in self.obstacles.iter().enumerate() {
            if o.half_extents.iter().any(|h| !(*h > 0.0 && h.is_finite())) {
                return Err(InputError::new(format!(
                    "scene.obstacles[{i}] has a non-positive half extent"
                )));
            }
        }
        Ok(())
    }
}

/// Start and goal arrangements, the gripper's home pose, and run settings.
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemSpec {
    pub start: Arrangement,
    pub goal: Arrangement,
    pub home: Pose,
    pub seed: u64,
    /// Seconds.
    pub time_limit: f64,
}

impl ProblemSpec {
    /// Both arrangements must name exactly the scene's objects, inside the
    /// workspace.
    pub fn validate(&self, scene: &SceneSpec) -> Result<(), InputError> {
        for (label, a) in [("start", &self.start), ("goal", &self.goal)] {
            for (i, o) in scene.objects.iter().enumerate() {
                match a.get(ObjectId(i)) {
                    None => {
                        return Err(InputError::new(format!(
                            "problem.{label}: missing pose for '{}'",
                            o.name
                        )))
                    }
                    Some(p) if !scene.workspace.contains(&p.translation) => {
                        return Err(InputError::new(format!(
                            "problem.{label}: object '{}' is outside the workspace",
                            o.name
                        )))
                    }
                    Some(_) => {}
                }
            }
            if a.len() != scene.objects.len() {
                return Err(InputError::new(format!("problem.{label}: poses for unknown objects")));
            }
        }
        if !scene.workspace.contains(&self.home.translation) {
            return Err(InputError::new("problem.home is outside the workspace"));
        }
        if !(self.time_limit > 0.0) {
            return Err(InputError::new("problem.time_limit must be positive"));
        }
        Ok(())
    }
}
