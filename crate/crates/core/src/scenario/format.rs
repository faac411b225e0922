//! The TOML problem document.
//!
//! ```toml
//! version = 1
//!
//! [scene]
//! workspace = { min = [0.0, 0.0, 0.0], max = [1.0, 1.0, 0.5] }
//! ground_height = 0.0
//!
//! [[scene.objects]]
//! id = "a"
//! half_extents = [0.03, 0.03, 0.03]
//! mass = 0.1
//!
//! [problem]
//! seed = 7
//! time_limit = 60.0
//! home = [0.1, 0.1, 0.4, 0.0, 0.0, 0.0, 1.0]
//! start = { a = [0.5, 0.5, 0.03, 0.0, 0.0, 0.0, 1.0] }
//! goal = { a = [0.3, 0.5, 0.03, 0.0, 0.0, 0.0, 1.0] }
//! ```
//!
//! Poses are `[x, y, z, qx, qy, qz, qw]`. Optional tables: `scene.tiles`,
//! `scene.bumps`, `scene.obstacles` (arrays), `scene.gripper`, and `sim`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arrangement::Arrangement;
use crate::geometry::{Aabb, BoxShape, Pose, Vec3};
use crate::manipulation::GripperModel;
use crate::physics::SimConfig;

use super::{Bump, ObjectSpec, Obstacle, ProblemSpec, SceneSpec, Tile};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid `{field}`: {message}")]
    Semantic { field: String, message: String },
}

fn semantic(field: impl Into<String>, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Semantic {
        field: field.into(),
        message: message.into(),
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    version: u32,
    scene: SceneDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sim: Option<SimConfig>,
    problem: ProblemDoc,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WorkspaceDoc {
    min: [f64; 3],
    max: [f64; 3],
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneDoc {
    workspace: WorkspaceDoc,
    #[serde(default)]
    ground_height: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    tiles: Vec<BoxDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    bumps: Vec<BumpDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    obstacles: Vec<BoxDoc>,
    objects: Vec<ObjectDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gripper: Option<GripperDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BoxDoc {
    pose: Pose,
    half_extents: [f64; 3],
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BumpDoc {
    center: [f64; 3],
    radius: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObjectDoc {
    id: String,
    half_extents: [f64; 3],
    mass: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GripperDoc {
    half_extents: [f64; 3],
    body_offset: [f64; 3],
    grasp_yaws: Vec<f64>,
    standoff: f64,
    max_tilt: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemDoc {
    seed: u64,
    time_limit: f64,
    home: Pose,
    start: BTreeMap<String, Pose>,
    goal: BTreeMap<String, Pose>,
}

fn v3(a: [f64; 3]) -> Vec3 {
    Vec3::new(a[0], a[1], a[2])
}

fn a3(v: &Vec3) -> [f64; 3] {
    [v.x, v.y, v.z]
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

fn arrangement(field: &str, poses: &BTreeMap<String, Pose>, scene: &SceneSpec) -> Result<Arrangement, ScenarioError> {
    let mut a = Arrangement::new();
    for (name, pose) in poses {
        let Some(o) = scene.object_id(name) else {
            return Err(semantic(format!("{field}.{name}"), "no object with this id"));
        };
        if !scene.workspace.contains(&pose.translation) {
            return Err(semantic(format!("{field}.{name}"), "pose lies outside the workspace"));
        }
        a.set(o, *pose);
    }
    for o in &scene.objects {
        if !poses.contains_key(&o.name) {
            return Err(semantic(format!("{field}.{}", o.name), "missing pose"));
        }
    }
    Ok(a)
}

/// Parses a problem document into its scene and problem.
pub fn parse_problem(text: &str) -> Result<(SceneSpec, ProblemSpec), ScenarioError> {
    let doc: Document = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((0, 0), |s| line_column(text, s.start));
        ScenarioError::Syntax {
            line,
            column,
            message: e.message().to_string(),
        }
    })?;
    if doc.version != FORMAT_VERSION {
        return Err(semantic(
            "version",
            format!("unsupported version {}, expected {FORMAT_VERSION}", doc.version),
        ));
    }
    let s = doc.scene;
    let workspace =
        Aabb::new(v3(s.workspace.min), v3(s.workspace.max)).map_err(|e| semantic("scene.workspace", e.message))?;

    let mut objects = Vec::with_capacity(s.objects.len());
    for (i, o) in s.objects.iter().enumerate() {
        let field = format!("scene.objects[{i}]");
        if objects.iter().any(|p: &ObjectSpec| p.name == o.id) {
            return Err(semantic(format!("{field}.id"), format!("duplicate id '{}'", o.id)));
        }
        BoxShape::new(v3(o.half_extents), o.mass).map_err(|e| semantic(format!("{field}.half_extents"), e.message))?;
        if !(o.mass > 0.0) {
            return Err(semantic(format!("{field}.mass"), "must be positive"));
        }
        objects.push(ObjectSpec {
            name: o.id.clone(),
            half_extents: v3(o.half_extents),
            mass: o.mass,
        });
    }
    if objects.is_empty() {
        return Err(semantic("scene.objects", "at least one object is required"));
    }

    let tiles: Vec<Tile> = s
        .tiles
        .iter()
        .map(|t| Tile {
            pose: t.pose,
            half_extents: v3(t.half_extents),
        })
        .collect();
    for (i, t) in tiles.iter().enumerate() {
        let shape = BoxShape {
            half_extents: t.half_extents,
            mass: 0.0,
        };
        if t.half_extents.iter().any(|h| !(*h > 0.0)) {
            return Err(semantic(format!("scene.tiles[{i}].half_extents"), "must be positive"));
        }
        if !shape.corners(&t.pose).iter().all(|c| workspace.contains(c)) {
            return Err(semantic(
                format!("scene.tiles[{i}]"),
                "tile extends outside the workspace",
            ));
        }
    }
    let bumps: Vec<Bump> = s
        .bumps
        .iter()
        .map(|b| Bump {
            center: v3(b.center),
            radius: b.radius,
        })
        .collect();
    for (i, b) in bumps.iter().enumerate() {
        if !(b.radius > 0.0) {
            return Err(semantic(format!("scene.bumps[{i}].radius"), "must be positive"));
        }
        if !workspace.contains(&b.center) {
            return Err(semantic(
                format!("scene.bumps[{i}].center"),
                "bump lies outside the workspace",
            ));
        }
    }
    let obstacles: Vec<Obstacle> = s
        .obstacles
        .iter()
        .map(|o| Obstacle {
            pose: o.pose,
            half_extents: v3(o.half_extents),
        })
        .collect();
    for (i, o) in obstacles.iter().enumerate() {
        if o.half_extents.iter().any(|h| !(*h > 0.0 && h.is_finite())) {
            return Err(semantic(
                format!("scene.obstacles[{i}].half_extents"),
                "must be positive",
            ));
        }
    }
    let gripper = match s.gripper {
        None => GripperModel::default(),
        Some(g) => GripperModel {
            body: BoxShape {
                half_extents: v3(g.half_extents),
                mass: 0.0,
            },
            body_offset: v3(g.body_offset),
            grasp_yaws: g.grasp_yaws,
            standoff: g.standoff,
            max_tilt: g.max_tilt,
        },
    };
    gripper.validate().map_err(|e| semantic("scene.gripper", e.message))?;
    let sim = doc.sim.unwrap_or_default();
    sim.validate().map_err(|e| semantic("sim", e.message))?;

    let scene = SceneSpec {
        workspace,
        ground_height: s.ground_height,
        tiles,
        bumps,
        obstacles,
        objects,
        sim,
        gripper,
    };

    let p = doc.problem;
    let start = arrangement("problem.start", &p.start, &scene)?;
    let goal = arrangement("problem.goal", &p.goal, &scene)?;
    if !workspace.contains(&p.home.translation) {
        return Err(semantic("problem.home", "lies outside the workspace"));
    }
    if !(p.time_limit > 0.0 && p.time_limit.is_finite()) {
        return Err(semantic("problem.time_limit", "must be positive"));
    }
    let problem = ProblemSpec {
        start,
        goal,
        home: p.home,
        seed: p.seed,
        time_limit: p.time_limit,
    };
    Ok((scene, problem))
}

/// Writes a problem document that parses back to the same scene and
/// problem.
pub fn serialize_problem(scene: &SceneSpec, problem: &ProblemSpec) -> String {
    let named = |a: &Arrangement| -> BTreeMap<String, Pose> {
        a.iter()
            .map(|(o, p)| (scene.object_name(o).map_or_else(|| o.to_string(), str::to_string), *p))
            .collect()
    };
    let gripper = (scene.gripper != GripperModel::default()).then(|| GripperDoc {
        half_extents: a3(&scene.gripper.body.half_extents),
        body_offset: a3(&scene.gripper.body_offset),
        grasp_yaws: scene.gripper.grasp_yaws.clone(),
        standoff: scene.gripper.standoff,
        max_tilt: scene.gripper.max_tilt,
    });
    let doc = Document {
        version: FORMAT_VERSION,
        scene: SceneDoc {
            workspace: WorkspaceDoc {
                min: a3(&scene.workspace.min),
                max: a3(&scene.workspace.max),
            },
            ground_height: scene.ground_height,
            tiles: scene
                .tiles
                .iter()
                .map(|t| BoxDoc {
                    pose: t.pose,
                    half_extents: a3(&t.half_extents),
                })
                .collect(),
            bumps: scene
                .bumps
                .iter()
                .map(|b| BumpDoc {
                    center: a3(&b.center),
                    radius: b.radius,
                })
                .collect(),
            obstacles: scene
                .obstacles
                .iter()
                .map(|o| BoxDoc {
                    pose: o.pose,
                    half_extents: a3(&o.half_extents),
                })
                .collect(),
            objects: scene
                .objects
                .iter()
                .map(|o| ObjectDoc {
                    id: o.name.clone(),
                    half_extents: a3(&o.half_extents),
                    mass: o.mass,
                })
                .collect(),
            gripper,
        },
        sim: (scene.sim != SimConfig::default()).then(|| scene.sim.clone()),
        problem: ProblemDoc {
            seed: problem.seed,
            time_limit: problem.time_limit,
            home: problem.home,
            start: named(&problem.start),
            goal: named(&problem.goal),
        },
    };
    toml::to_string(&doc).expect("problem documents always serialize")
}
