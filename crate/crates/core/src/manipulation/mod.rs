//! Floating-gripper manipulation: top-down grasps and collision-checked
//! transit (empty gripper) and transfer (carrying one object) motions.

mod search;

use std::f64::consts::{FRAC_PI_2, PI};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::arrangement::{Arrangement, ObjectId};
use crate::error::InputError;
use crate::geometry::{interpolate_pose, pose_distance, Aabb, BoxShape, Pose, Rot, Vec3};
use crate::physics::SimWorld;

/// Box-shaped end effector that approaches along its local −z axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GripperModel {
    pub body: BoxShape,
    /// Body center in the gripper frame.
    pub body_offset: Vec3,
    /// Yaw offsets tried around the object's heading.
    pub grasp_yaws: Vec<f64>,
    /// Height of the gripper origin above the grasped top face.
    pub standoff: f64,
    /// Largest tilt from upright the gripper accepts at a grasp.
    pub max_tilt: f64,
}

impl GripperModel {
    /// Gripper proportioned to cubes of the given edge: the body hovers a
    /// tenth of an edge above the top face and overhangs it along x.
    pub fn for_edge(edge: f64) -> Self {
        let standoff = 0.5 * edge;
        let half = Vec3::new(0.75 * edge, 0.25 * edge, 0.55 * edge);
        let bottom = -standoff + 0.1 * edge;
        Self {
            body: BoxShape {
                half_extents: half,
                mass: 0.0,
            },
            body_offset: Vec3::new(0.0, 0.0, bottom + half.z),
            grasp_yaws: vec![0.0, FRAC_PI_2, PI, 3.0 * FRAC_PI_2],
            standoff,
            max_tilt: 0.05,
        }
    }

    pub fn validate(&self) -> Result<(), InputError> {
        if self.grasp_yaws.is_empty() {
            return Err(InputError::new("gripper.grasp_yaws must not be empty"));
        }
        if !(self.standoff >= 0.0 && self.max_tilt >= 0.0) {
            return Err(InputError::new(
                "gripper.standoff and gripper.max_tilt must be non-negative",
            ));
        }
        if self.body.half_extents.iter().any(|h| !(*h > 0.0 && h.is_finite())) {
            return Err(InputError::new("gripper.body half extents must be positive"));
        }
        Ok(())
    }

    pub fn body_pose(&self, gripper: &Pose) -> Pose {
        gripper.compose(&Pose::new(self.body_offset, Rot::identity()))
    }
}

impl Default for GripperModel {
    fn default() -> Self {
        Self::for_edge(0.06)
    }
}

/// Rigid attachment of an object to the gripper.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grasp {
    pub object: ObjectId,
    /// Object pose in the gripper frame.
    pub transform: Pose,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GripperConfig {
    pub pose: Pose,
    pub held: Option<Grasp>,
}

impl GripperConfig {
    pub fn free(pose: Pose) -> Self {
        Self { pose, held: None }
    }

    pub fn holding(pose: Pose, grasp: Grasp) -> Self {
        Self {
            pose,
            held: Some(grasp),
        }
    }

    pub fn released(&self) -> Self {
        Self::free(self.pose)
    }

    /// Pose of the held object implied by the grasp.
    pub fn object_pose(&self) -> Option<Pose> {
        self.held.map(|g| self.pose.compose(&g.transform))
    }

    fn with_pose(&self, pose: Pose) -> Self {
        Self { pose, held: self.held }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MotionKind {
    Transit,
    Transfer,
}

/// A waypoint path and the arrangement it was checked against. For a
/// transfer the context excludes the carried object.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Motion {
    pub kind: MotionKind,
    pub waypoints: Vec<GripperConfig>,
    pub context: Arrangement,
}

impl Motion {
    pub fn first(&self) -> &GripperConfig {
        &self.waypoints[0]
    }

    pub fn last(&self) -> &GripperConfig {
        &self.waypoints[self.waypoints.len() - 1]
    }

    pub fn reversed(&self) -> Motion {
        let mut waypoints = self.waypoints.clone();
        waypoints.reverse();
        Motion {
            kind: self.kind,
            waypoints,
            context: self.context.clone(),
        }
    }

    /// Waypoints with intermediate configurations inserted so that
    /// neighbors are at most `delta` apart.
    pub fn densify(&self, delta: f64, w_rot: f64) -> Vec<GripperConfig> {
        let mut out = vec![self.waypoints[0]];
        for pair in self.waypoints.windows(2) {
            for pose in segment(&pair[0].pose, &pair[1].pose, delta, w_rot).skip(1) {
                out.push(pair[1].with_pose(pose));
            }
        }
        out
    }

    pub fn length(&self, w_rot: f64) -> f64 {
        self.waypoints
            .windows(2)
            .map(|p| pose_distance(&p[0].pose, &p[1].pose, w_rot))
            .sum()
    }
}

/// Poses from `a` to `b` inclusive, at most `delta` apart.
fn segment(a: &Pose, b: &Pose, delta: f64, w_rot: f64) -> impl Iterator<Item = Pose> {
    let (a, b) = (*a, *b);
    let n = (pose_distance(&a, &b, w_rot) / delta).ceil().max(1.0) as usize;
    (0..=n).map(move |i| interpolate_pose(&a, &b, i as f64 / n as f64))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MotionSettings {
    /// Validation step between densified waypoints.
    pub delta: f64,
    pub rotation_weight: f64,
    /// Wall-clock budget per tree search, seconds.
    pub timeout: f64,
    /// Iteration budget per tree search.
    pub max_iterations: usize,
    /// Longest single tree edge.
    pub step_size: f64,
}

impl Default for MotionSettings {
    fn default() -> Self {
        Self {
            delta: 0.01,
            rotation_weight: 0.1,
            timeout: 0.5,
            max_iterations: 1500,
            step_size: 0.05,
        }
    }
}

impl MotionSettings {
    pub fn validate(&self) -> Result<(), InputError> {
        if !(self.delta > 0.0 && self.step_size > 0.0 && self.rotation_weight > 0.0) {
            return Err(InputError::new(
                "motion delta, step_size and rotation_weight must be positive",
            ));
        }
        if !(self.timeout >= 0.0) {
            return Err(InputError::new("motion timeout must be non-negative"));
        }
        Ok(())
    }
}

/// Gripper model, reachable region for the gripper origin, and search
/// settings.
#[derive(Clone, Debug)]
pub struct Manipulator {
    pub gripper: GripperModel,
    pub bounds: Aabb,
    pub settings: MotionSettings,
}

impl Manipulator {
    pub fn new(gripper: GripperModel, bounds: Aabb, settings: MotionSettings) -> Self {
        Self {
            gripper,
            bounds,
            settings,
        }
    }

    /// Upright gripper pose grasping the top face of a box at `object` with
    /// the given yaw offset, or `None` when no face points close enough to
    /// straight up.
    pub fn top_grasp(&self, shape: &BoxShape, object: &Pose, yaw: f64) -> Option<Pose> {
        let axes: [Vec3; 3] = [Vec3::x(), Vec3::y(), Vec3::z()].map(|e| object.rotation * e);
        let up = (0..3).max_by(|&i, &j| axes[i].z.abs().total_cmp(&axes[j].z.abs()))?;
        let sign = axes[up].z.signum();
        let normal = axes[up] * sign;
        if normal.z.clamp(-1.0, 1.0).acos() > self.gripper.max_tilt {
            return None;
        }
        let top = object.translation + normal * shape.half_extents[up];
        let heading_axis = axes[(up + 1) % 3];
        let heading = heading_axis.y.atan2(heading_axis.x);
        let z = top.z + self.gripper.standoff;
        Some(Pose::from_xyz_yaw(top.x, top.y, z, heading + yaw))
    }

    /// True when the configuration is inside the bounds and both the gripper
    /// body and any held object are clear of the statics and of `context`.
    pub fn config_valid(&self, world: &SimWorld, context: &Arrangement, q: &GripperConfig) -> bool {
        if !self.bounds.contains(&q.pose.translation) {
            return false;
        }
        let body = self.gripper.body_pose(&q.pose);
        if !world.box_clear(&self.gripper.body, &body, context) {
            return false;
        }
        match q.held {
            None => true,
            Some(g) => match world.shape(g.object) {
                Some(shape) => world.box_clear(shape, &q.pose.compose(&g.transform), context),
                None => false,
            },
        }
    }

    fn segment_valid(&self, world: &SimWorld, context: &Arrangement, a: &GripperConfig, b: &Pose) -> bool {
        let s = &self.settings;
        segment(&a.pose, b, s.delta, s.rotation_weight).all(|p| self.config_valid(world, context, &a.with_pose(p)))
    }

    /// Picks a yaw, in random order, whose grasp is collision-free at both
    /// the current and the next pose of `o`. Both returned configurations
    /// hold `o` with the same grasp transform.
    pub fn sample_grasp_confs<R: Rng + ?Sized>(
        &self,
        world: &SimWorld,
        current: &Arrangement,
        next: &Arrangement,
        o: ObjectId,
        rng: &mut R,
    ) -> Option<(GripperConfig, GripperConfig)> {
        let shape = world.shape(o)?;
        let from = current.get(o)?;
        let to = next.get(o)?;
        let rest_current = current.without(o);
        let rest_next = next.without(o);
        let mut yaws = self.gripper.grasp_yaws.clone();
        yaws.shuffle(rng);
        for yaw in yaws {
            let Some(pick) = self.top_grasp(shape, from, yaw) else {
                continue;
            };
            let grasp = Grasp {
                object: o,
                transform: pick.inverse().compose(from),
            };
            let place = to.compose(&grasp.transform.inverse());
            if place.tilt() > self.gripper.max_tilt {
                continue;
            }
            let q = GripperConfig::free(pick);
            let q2 = GripperConfig::free(place);
            if self.config_valid(world, &rest_current, &q) && self.config_valid(world, &rest_next, &q2) {
                return Some((
                    GripperConfig::holding(pick, grasp),
                    GripperConfig::holding(place, grasp),
                ));
            }
        }
        None
    }

    /// Empty-gripper motion from `from` to `to` avoiding every object in
    /// `a`. `Ok(None)` means no path was found within the budget.
    pub fn plan_transit<R: Rng + ?Sized>(
        &self,
        world: &SimWorld,
        a: &Arrangement,
        from: &GripperConfig,
        to: &GripperConfig,
        rng: &mut R,
    ) -> Result<Option<Motion>, InputError> {
        if from.held.is_some() || to.held.is_some() {
            return Err(InputError::new("transit endpoints must not hold an object"));
        }
        if !self.config_valid(world, a, from) || !self.config_valid(world, a, to) {
            return Err(InputError::new("transit endpoint is in collision or out of bounds"));
        }
        Ok(self.search(world, a, from, to, rng).map(|waypoints| Motion {
            kind: MotionKind::Transit,
            waypoints,
            context: a.clone(),
        }))
    }

    /// Motion carrying `o` from its pose in `before` to its pose in `after`,
    /// avoiding the other objects of `before`.
    #[allow(clippy::too_many_arguments)]
    pub fn plan_transfer<R: Rng + ?Sized>(
        &self,
        world: &SimWorld,
        before: &Arrangement,
        o: ObjectId,
        q: &GripperConfig,
        q2: &GripperConfig,
        after: &Arrangement,
        rng: &mut R,
    ) -> Result<Option<Motion>, InputError> {
        let (Some(g), Some(g2)) = (q.held, q2.held) else {
            return Err(InputError::new("transfer endpoints must hold the object"));
        };
        if g.object != o || g2.object != o || g.transform != g2.transform {
            return Err(InputError::new(
                "transfer endpoints must share one grasp of the moved object",
            ));
        }
        let (Some(p), Some(p2)) = (before.get(o), after.get(o)) else {
            return Err(InputError::new(format!(
                "object {o} missing from transfer arrangements"
            )));
        };
        let close = |a: &Pose, b: &Pose| pose_distance(a, b, 1.0) <= 1e-9;
        if !close(&q.object_pose().unwrap(), p) || !close(&q2.object_pose().unwrap(), p2) {
            return Err(InputError::new(
                "transfer endpoints do not place the object at its arrangement poses",
            ));
        }
        let context = before.without(o);
        if !self.config_valid(world, &context, q) || !self.config_valid(world, &context, q2) {
            return Err(InputError::new("transfer endpoint is in collision or out of bounds"));
        }
        Ok(self.search(world, &context, q, q2, rng).map(|waypoints| Motion {
            kind: MotionKind::Transfer,
            waypoints,
            context,
        }))
    }

    /// Straight line, then a lift-move-lower detour, then a bidirectional
    /// tree search over position and yaw.
    fn search<R: Rng + ?Sized>(
        &self,
        world: &SimWorld,
        context: &Arrangement,
        from: &GripperConfig,
        to: &GripperConfig,
        rng: &mut R,
    ) -> Option<Vec<GripperConfig>> {
        if from.pose == to.pose {
            return Some(vec![*from]);
        }
        if self.segment_valid(world, context, from, &to.pose) {
            return Some(vec![*from, *to]);
        }
        if let Some(path) = self.lift_move_lower(world, context, from, to) {
            return Some(path);
        }
        let poses = search::rrt_connect(self, world, context, from, &to.pose, rng)?;
        let n = poses.len();
        Some(
            poses
                .into_iter()
                .enumerate()
                .map(|(i, p)| if i + 1 == n { *to } else { from.with_pose(p) })
                .collect(),
        )
    }

    fn lift_move_lower(
        &self,
        world: &SimWorld,
        context: &Arrangement,
        from: &GripperConfig,
        to: &GripperConfig,
    ) -> Option<Vec<GripperConfig>> {
        let lo = from.pose.translation.z.max(to.pose.translation.z);
        let hi = self.bounds.max.z;
        let mut levels: Vec<f64> = (1..).map(|k| lo + 0.05 * k as f64).take_while(|z| *z < hi).collect();
        levels.push(hi);
        for z in levels {
            let mut up = from.pose;
            up.translation.z = z;
            let mut over = to.pose;
            over.translation.z = z;
            let a = from.with_pose(up);
            let b = from.with_pose(over);
            if self.segment_valid(world, context, from, &up)
                && self.segment_valid(world, context, &a, &over)
                && self.segment_valid(world, context, &b, &to.pose)
            {
                return Some(vec![*from, a, b, *to]);
            }
        }
        None
    }

    /// Re-checks a motion: consistent holding along the path and every
    /// densified waypoint valid in the stored context.
    pub fn validate_motion(&self, world: &SimWorld, m: &Motion) -> bool {
        if m.waypoints.is_empty() {
            return false;
        }
        let held = m.waypoints[0].held;
        let consistent = match m.kind {
            MotionKind::Transit => m.waypoints.iter().all(|q| q.held.is_none()),
            MotionKind::Transfer => {
                held.is_some_and(|g| !m.context.contains(g.object)) && m.waypoints.iter().all(|q| q.held == held)
            }
        };
        let s = &self.settings;
        consistent
            && m.densify(s.delta, s.rotation_weight)
                .iter()
                .all(|q| self.config_valid(world, &m.context, q))
    }
}
