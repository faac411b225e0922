//! The embedded simulator: collision test, settling and static stability.

mod dynamics;
mod oracle;

pub use oracle::{support_margin, support_polygon_oracle};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::arrangement::{Arrangement, ObjectId};
use crate::error::InputError;
use crate::geometry::{box_min_z, box_sphere_intersect, boxes_intersect, rotation_angle, BoxShape, Pose, Vec3};

/// Simulation parameters. All lengths in meters, times in seconds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub dt: f64,
    pub gravity: f64,
    pub friction_coeff: f64,
    /// Steps between displacement checks while settling.
    pub check_interval: usize,
    pub disp_threshold: f64,
    pub max_settle_time: f64,
    pub stability_duration: f64,
    pub penetration_tol: f64,
    /// Meters per radian when converting the displacement threshold to a
    /// rotational one.
    pub rotation_weight: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 1.0 / 240.0,
            gravity: 9.81,
            friction_coeff: 0.6,
            check_interval: 30,
            disp_threshold: 1e-3,
            max_settle_time: 3.0,
            stability_duration: 1.0,
            penetration_tol: 1e-4,
            rotation_weight: 0.1,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), InputError> {
        let bad = |m: &str| Err(InputError::new(format!("sim.{m}")));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad("dt must be positive");
        }
        if self.check_interval < 1 {
            return bad("check_interval must be at least 1");
        }
        if !(self.disp_threshold > 0.0) {
            return bad("disp_threshold must be positive");
        }
        if !(self.stability_duration <= self.max_settle_time) {
            return bad("stability_duration must not exceed max_settle_time");
        }
        if !(self.penetration_tol >= 0.0) {
            return bad("penetration_tol must be non-negative");
        }
        if !(self.rotation_weight > 0.0) {
            return bad("rotation_weight must be positive");
        }
        if !(self.gravity >= 0.0 && self.friction_coeff >= 0.0) {
            return bad("gravity and friction_coeff must be non-negative");
        }
        Ok(())
    }

    pub fn rotation_threshold(&self) -> f64 {
        self.disp_threshold / self.rotation_weight
    }

    fn steps(&self, seconds: f64) -> usize {
        (seconds / self.dt).round().max(0.0) as usize
    }
}

/// Immovable geometry.
#[derive(Clone, Debug, PartialEq)]
pub enum StaticBody {
    /// Infinite horizontal plane; everything below `height` is solid.
    Ground {
        height: f64,
    },
    Box {
        shape: BoxShape,
        pose: Pose,
    },
    Sphere {
        center: Vec3,
        radius: f64,
    },
}

impl StaticBody {
    /// True when the box penetrates this body by more than `tol`.
    pub fn intersects_box(&self, shape: &BoxShape, pose: &Pose, tol: f64) -> bool {
        match self {
            StaticBody::Ground { height } => box_min_z(shape, pose) < height - tol,
            StaticBody::Box { shape: s, pose: p } => boxes_intersect(s, p, shape, pose, tol),
            StaticBody::Sphere { center, radius } => box_sphere_intersect(shape, pose, center, *radius, tol),
        }
    }
}

/// Static environment plus the shapes of the movable objects.
#[derive(Clone, Debug)]
pub struct SimWorld {
    pub statics: Vec<StaticBody>,
    pub objects: BTreeMap<ObjectId, BoxShape>,
    pub config: SimConfig,
}

/// Outcome of [`SimWorld::settle`].
#[derive(Clone, Debug, PartialEq)]
pub struct Settled {
    pub arrangement: Arrangement,
    pub settled: bool,
}

impl SimWorld {
    pub fn new(statics: Vec<StaticBody>, objects: BTreeMap<ObjectId, BoxShape>, config: SimConfig) -> Self {
        Self {
            statics,
            objects,
            config,
        }
    }

    pub fn shape(&self, o: ObjectId) -> Option<&BoxShape> {
        self.objects.get(&o)
    }

    fn require_known(&self, a: &Arrangement) -> Result<(), InputError> {
        for o in a.objects() {
            if !self.objects.contains_key(&o) {
                return Err(InputError::new(format!("arrangement names unknown object {o}")));
            }
        }
        Ok(())
    }

    /// True iff the box at `pose` is clear of every static body.
    pub fn box_clear_of_statics(&self, shape: &BoxShape, pose: &Pose) -> bool {
        let tol = self.config.penetration_tol;
        !self.statics.iter().any(|s| s.intersects_box(shape, pose, tol))
    }

    /// True iff the box at `pose` is clear of statics and of every object in
    /// `a`.
    pub fn box_clear(&self, shape: &BoxShape, pose: &Pose, a: &Arrangement) -> bool {
        let tol = self.config.penetration_tol;
        self.box_clear_of_statics(shape, pose)
            && a.iter()
                .all(|(o, p)| !boxes_intersect(&self.objects[&o], p, shape, pose, tol))
    }

    /// Collision test: true when no object–object or object–obstacle pair
    /// penetrates beyond the tolerance.
    pub fn check_collision(&self, a: &Arrangement) -> Result<bool, InputError> {
        self.require_known(a)?;
        Ok(self.collision_free(a))
    }

    pub(crate) fn collision_free(&self, a: &Arrangement) -> bool {
        let tol = self.config.penetration_tol;
        let posed: Vec<(&BoxShape, &Pose)> = a.iter().map(|(o, p)| (&self.objects[&o], p)).collect();
        for (i, (s, p)) in posed.iter().enumerate() {
            if !self.box_clear_of_statics(s, p) {
                return false;
            }
            for (s2, p2) in &posed[i + 1..] {
                if boxes_intersect(s, p, s2, p2, tol) {
                    return false;
                }
            }
        }
        true
    }

    /// Forward-simulates until every object is still over a check interval or
    /// the settle budget runs out.
    pub fn settle(&self, a: &Arrangement) -> Settled {
        self.settle_observed(a, |_| {})
    }

    /// [`SimWorld::settle`], handing the arrangement at every displacement
    /// check to `on_check`.
    pub fn settle_observed(&self, a: &Arrangement, mut on_check: impl FnMut(&Arrangement)) -> Settled {
        let mut sim = dynamics::Simulation::new(self, a);
        let cfg = &self.config;
        let max_steps = cfg.steps(cfg.max_settle_time);
        let mut previous = sim.poses();
        let mut step = 0;
        while step < max_steps {
            let n = cfg.check_interval.min(max_steps - step);
            for _ in 0..n {
                sim.step();
            }
            step += n;
            on_check(&sim.arrangement());
            let current = sim.poses();
            if n == cfg.check_interval && self.within_threshold(&previous, &current) {
                return Settled {
                    arrangement: sim.arrangement(),
                    settled: true,
                };
            }
            previous = current;
        }
        Settled {
            arrangement: sim.arrangement(),
            settled: false,
        }
    }

    /// Static stability: simulate for the stability duration and require that
    /// no object ever strays beyond the displacement threshold from its
    /// initial pose.
    pub fn check_stable(&self, a: &Arrangement) -> bool {
        if a.is_empty() {
            return true;
        }
        let mut sim = dynamics::Simulation::new(self, a);
        let initial = sim.poses();
        let cfg = &self.config;
        let steps = cfg.steps(cfg.stability_duration);
        for _ in 0..steps {
            sim.step();
            if !self.within_threshold(&initial, &sim.poses()) {
                return false;
            }
        }
        true
    }

    fn within_threshold(&self, a: &[Pose], b: &[Pose]) -> bool {
        let lin = self.config.disp_threshold;
        let ang = self.config.rotation_threshold();
        a.iter().zip(b).all(|(p, q)| {
            (p.translation - q.translation).norm() <= lin && rotation_angle(&p.rotation, &q.rotation) <= ang
        })
    }
}
