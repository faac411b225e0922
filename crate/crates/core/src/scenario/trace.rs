//! JSON solution traces for offline rendering and re-validation.
//!
//! A trace embeds the problem document, one record per step with densified
//! motions, and a frame stream sampled at a fixed period assuming the
//! gripper moves at [`GRIPPER_SPEED`].

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::arrangement::Arrangement;
use crate::error::{Error, InputError};
use crate::geometry::{interpolate_pose, pose_distance, Pose};
use crate::manipulation::{GripperConfig, Motion, MotionKind};
use crate::planner::{PlanStats, Solution, Step};

use super::{parse_problem, serialize_problem, ProblemSpec, SceneSpec};

pub const TRACE_VERSION: u32 = 1;
/// Meters per second (of pose distance) along densified motions.
pub const GRIPPER_SPEED: f64 = 0.25;
const DENSIFY_DELTA: f64 = 0.01;
const ROTATION_WEIGHT: f64 = 0.1;

type NamedPoses = BTreeMap<String, Pose>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceStep {
    pub object: String,
    pub pick: GripperConfig,
    pub place: GripperConfig,
    pub transit: Option<Vec<GripperConfig>>,
    pub transfer: Option<Vec<GripperConfig>>,
    pub arrangement: NamedPoses,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Frame {
    pub time: f64,
    pub gripper: Pose,
    pub held: Option<String>,
    pub arrangement: NamedPoses,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionTrace {
    pub version: u32,
    /// The problem document the solution answers.
    pub problem: String,
    pub home: GripperConfig,
    pub steps: Vec<TraceStep>,
    pub frames: Vec<Frame>,
}

fn named(scene: &SceneSpec, a: &Arrangement) -> NamedPoses {
    a.iter()
        .map(|(o, p)| (scene.object_name(o).map_or_else(|| o.to_string(), str::to_string), *p))
        .collect()
}

fn unnamed(scene: &SceneSpec, poses: &NamedPoses) -> Result<Arrangement, InputError> {
    let mut a = Arrangement::new();
    for (name, p) in poses {
        let o = scene
            .object_id(name)
            .ok_or_else(|| InputError::new(format!("trace names unknown object '{name}'")))?;
        a.set(o, *p);
    }
    Ok(a)
}

/// A keyframe of the world: gripper configuration plus the poses of the
/// objects not being carried.
struct Key {
    q: GripperConfig,
    resting: Arrangement,
}

struct Timeline {
    keys: Vec<Key>,
    /// Cumulative time at each key.
    times: Vec<f64>,
}

impl Timeline {
    fn push(&mut self, q: GripperConfig, resting: &Arrangement) {
        let t = match self.keys.last() {
            Some(k) => {
                self.times[self.times.len() - 1] + pose_distance(&k.q.pose, &q.pose, ROTATION_WEIGHT) / GRIPPER_SPEED
            }
            None => 0.0,
        };
        self.keys.push(Key {
            q,
            resting: resting.clone(),
        });
        self.times.push(t);
    }

    fn end(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    fn frame(&self, scene: &SceneSpec, t: f64) -> Frame {
        let i = self.times.partition_point(|&s| s <= t).saturating_sub(1);
        let key = &self.keys[i];
        let pose = match self.keys.get(i + 1) {
            Some(next) if self.times[i + 1] > self.times[i] => interpolate_pose(
                &key.q.pose,
                &next.q.pose,
                (t - self.times[i]) / (self.times[i + 1] - self.times[i]),
            ),
            _ => key.q.pose,
        };
        let q = GripperConfig { pose, held: key.q.held };
        let mut a = key.resting.clone();
        if let (Some(g), Some(p)) = (q.held, q.object_pose()) {
            a.set(g.object, p);
        }
        Frame {
            time: t,
            gripper: pose,
            held: q.held.and_then(|g| scene.object_name(g.object).map(str::to_string)),
            arrangement: named(scene, &a),
        }
    }
}

fn dense(m: &Option<Motion>) -> Option<Vec<GripperConfig>> {
    m.as_ref().map(|m| m.densify(DENSIFY_DELTA, ROTATION_WEIGHT))
}

/// Records `sol` with frames every `period` seconds. The last frame always
/// shows the final arrangement with the gripper empty.
pub fn export_trace(
    scene: &SceneSpec,
    problem: &ProblemSpec,
    sol: &Solution,
    period: f64,
) -> Result<SolutionTrace, InputError> {
    if !(period > 0.0 && period.is_finite()) {
        return Err(InputError::new("trace period must be positive"));
    }
    let mut steps = Vec::with_capacity(sol.len());
    let mut line = Timeline {
        keys: Vec::new(),
        times: Vec::new(),
    };
    line.push(sol.home, &sol.start);
    for (before, step) in sol.befores().zip(&sol.steps) {
        let transit = dense(&step.transit);
        let transfer = dense(&step.transfer);
        for q in transit.iter().flatten() {
            line.push(*q, before);
        }
        line.push(step.pick.released(), before);
        let rest = before.without(step.object);
        line.push(step.pick, &rest);
        for q in transfer.iter().flatten() {
            line.push(*q, &rest);
        }
        line.push(step.place, &rest);
        line.push(step.place.released(), &step.arrangement);
        steps.push(TraceStep {
            object: scene
                .object_name(step.object)
                .map_or_else(|| step.object.to_string(), str::to_string),
            pick: step.pick,
            place: step.place,
            transit,
            transfer,
            arrangement: named(scene, &step.arrangement),
        });
    }

    let end = line.end();
    let mut frames: Vec<Frame> = (0..)
        .map(|k| k as f64 * period)
        .take_while(|t| *t < end)
        .map(|t| line.frame(scene, t))
        .collect();
    frames.push(Frame {
        time: end,
        gripper: line.keys[line.keys.len() - 1].q.pose,
        held: None,
        arrangement: named(scene, sol.final_arrangement()),
    });

    Ok(SolutionTrace {
        version: TRACE_VERSION,
        problem: serialize_problem(scene, problem),
        home: sol.home,
        steps,
        frames,
    })
}

/// Rebuilds the scene, problem and solution recorded in a trace. Motion
/// contexts are recovered from the arrangements before each step.
pub fn solution_from_trace(trace: &SolutionTrace) -> Result<(SceneSpec, ProblemSpec, Solution), Error> {
    if trace.version != TRACE_VERSION {
        return Err(InputError::new(format!("unsupported trace version {}", trace.version)).into());
    }
    let (scene, problem) =
        parse_problem(&trace.problem).map_err(|e| InputError::new(format!("embedded problem: {e}")))?;
    let mut before = problem.start.clone();
    let mut steps = Vec::with_capacity(trace.steps.len());
    for (k, s) in trace.steps.iter().enumerate() {
        let object = scene
            .object_id(&s.object)
            .ok_or_else(|| InputError::new(format!("step {k} moves unknown object '{}'", s.object)))?;
        let arrangement = unnamed(&scene, &s.arrangement)?;
        let motion =
            |kind, w: &Option<Vec<GripperConfig>>, context: &Arrangement| -> Result<Option<Motion>, InputError> {
                match w {
                    None => Ok(None),
                    Some(w) if w.is_empty() => Err(InputError::new(format!("step {k} has an empty motion"))),
                    Some(w) => Ok(Some(Motion {
                        kind,
                        waypoints: w.clone(),
                        context: context.clone(),
                    })),
                }
            };
        steps.push(Step {
            object,
            pick: s.pick,
            place: s.place,
            transit: motion(MotionKind::Transit, &s.transit, &before)?,
            transfer: motion(MotionKind::Transfer, &s.transfer, &before.without(object))?,
            arrangement: arrangement.clone(),
        });
        before = arrangement;
    }
    let sol = Solution {
        start: problem.start.clone(),
        home: trace.home,
        steps,
        stats: PlanStats::default(),
    };
    Ok((scene, problem, sol))
}
