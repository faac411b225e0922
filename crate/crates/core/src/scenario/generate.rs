//! Generators for the three benchmark families.
//!
//! * `reverse`: a tower of `n` cubes is restacked on the same base in
//!   reverse order.
//! * `transform`: a tower becomes a pyramid (rows along x) centered on the
//!   tower's base, over randomly placed flat tiles.
//! * `rotate`: a pyramid along one diagonal is rebuilt along the other
//!   diagonal around the same center, over randomly placed bumps.
//!
//! Structure positions are drawn from the central half of the workspace.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::arrangement::{Arrangement, ObjectId};
use crate::error::{Error, InputError};
use crate::geometry::{Aabb, Pose, Vec3};
use crate::manipulation::GripperModel;
use crate::physics::SimConfig;

use super::{Bump, ObjectSpec, Obstacle, ProblemSpec, SceneSpec, Tile};

const WORKSPACE_MAX: [f64; 3] = [1.0, 1.0, 0.5];
const CUBE_MASS: f64 = 0.1;
const PYRAMID_GAP: f64 = 0.001;
const HOME: [f64; 3] = [0.1, 0.1, 0.4];
const TIME_LIMIT: f64 = 60.0;
/// Clearance kept between terrain features and structure footprints.
const CLEARANCE: f64 = 0.01;
const MAX_ATTEMPTS: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Reverse,
    Transform,
    Rotate,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Reverse => "reverse",
            Family::Transform => "transform",
            Family::Rotate => "rotate",
        })
    }
}

impl FromStr for Family {
    type Err = InputError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "reverse" => Ok(Family::Reverse),
            "transform" => Ok(Family::Transform),
            "rotate" => Ok(Family::Rotate),
            _ => Err(InputError::new(format!(
                "unknown family '{s}' (expected reverse, transform or rotate)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorOptions {
    /// Cube edge length, meters.
    pub edge: f64,
    /// Adds a full-height wall at x = 0.75 and keeps the structures on the
    /// home side of it.
    pub blocking_wall: bool,
}

impl Default for GeneratorOptions {
    fn default() -> Self {
        Self {
            edge: 0.06,
            blocking_wall: false,
        }
    }
}

/// Rows of a pyramid holding `n` cubes, if `n` is a triangular number of
/// at least 3.
fn pyramid_rows(n: usize) -> Option<usize> {
    (2..=n).find(|k| k * (k + 1) / 2 == n)
}

/// Generates a problem with the default options and the given edge.
pub fn generate_problem(family: Family, n: usize, edge: f64, seed: u64) -> Result<(SceneSpec, ProblemSpec), Error> {
    generate_problem_with(
        family,
        n,
        seed,
        &GeneratorOptions {
            edge,
            ..GeneratorOptions::default()
        },
    )
}

pub fn generate_problem_with(
    family: Family,
    n: usize,
    seed: u64,
    options: &GeneratorOptions,
) -> Result<(SceneSpec, ProblemSpec), Error> {
    let e = options.edge;
    if !(e > 0.0 && e <= 0.15) {
        return Err(InputError::new("edge must lie in (0, 0.15] meters").into());
    }
    let rows = match family {
        Family::Reverse if n < 2 => return Err(InputError::new("reverse needs at least 2 cubes").into()),
        Family::Reverse => None,
        _ => Some(pyramid_rows(n).ok_or_else(|| {
            InputError::new(format!(
                "{family} needs a triangular number of cubes (3, 6, 10, ...), got {n}"
            ))
        })?),
    };
    let tallest = match rows {
        Some(k) if family == Family::Transform => n.max(k),
        Some(k) => k,
        None => n,
    };
    if (tallest + 2) as f64 * e > WORKSPACE_MAX[2] {
        return Err(InputError::new(format!(
            "a stack of {tallest} cubes of edge {e} does not fit under the workspace ceiling"
        ))
        .into());
    }

    let workspace = Aabb::new(Vec3::zeros(), Vec3::from(WORKSPACE_MAX)).expect("fixed workspace is valid");
    let x_max = if options.blocking_wall { 0.6 } else { 0.75 };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    for _ in 0..MAX_ATTEMPTS {
        let (start, goal) = structures(family, n, rows, e, x_max, &mut rng);
        let footprint: Vec<Vec3> = start.iter().chain(&goal).map(|p| p.translation).collect();
        let (tiles, bumps) = match family {
            Family::Reverse => (Vec::new(), Vec::new()),
            Family::Transform => (tiles(&footprint, e, &mut rng), Vec::new()),
            Family::Rotate => (Vec::new(), bumps(&footprint, e, &mut rng)),
        };
        let obstacles = if options.blocking_wall {
            vec![Obstacle {
                pose: Pose::from_translation(0.75, 0.5, 0.3),
                half_extents: Vec3::new(0.01, 0.55, 0.3),
            }]
        } else {
            Vec::new()
        };
        let scene = SceneSpec {
            workspace,
            ground_height: 0.0,
            tiles,
            bumps,
            obstacles,
            objects: (0..n)
                .map(|i| ObjectSpec {
                    name: format!("c{i}"),
                    half_extents: Vec3::repeat(0.5 * e),
                    mass: CUBE_MASS,
                })
                .collect(),
            sim: SimConfig::default(),
            gripper: GripperModel::for_edge(e),
        };
        let arrange =
            |poses: &[Pose]| Arrangement::from_poses(poses.iter().enumerate().map(|(i, p)| (ObjectId(i), *p)));
        let problem = ProblemSpec {
            start: arrange(&start),
            goal: arrange(&goal),
            home: Pose::from_translation(HOME[0], HOME[1], HOME[2]),
            seed,
            time_limit: TIME_LIMIT,
        };
        let world = scene.world();
        let valid = |a: &Arrangement| world.check_collision(a).unwrap_or(false) && world.check_stable(a);
        if valid(&problem.start) && valid(&problem.goal) {
            return Ok((scene, problem));
        }
    }
    Err(Error::Generation(format!(
        "no valid {family} instance with {n} cubes after {MAX_ATTEMPTS} attempts"
    )))
}

/// Cube poses of a tower with its base at (x, y).
fn tower(n: usize, e: f64, x: f64, y: f64) -> Vec<Pose> {
    (0..n)
        .map(|i| Pose::from_translation(x, y, 0.5 * e + i as f64 * e))
        .collect()
}

/// Cube poses of a pyramid with `k` bottom cubes laid along `yaw`, bottom
/// row first.
fn pyramid(k: usize, e: f64, x: f64, y: f64, yaw: f64) -> Vec<Pose> {
    let pitch = e + PYRAMID_GAP;
    let (s, c) = yaw.sin_cos();
    let mut out = Vec::with_capacity(k * (k + 1) / 2);
    for row in 0..k {
        let width = k - row;
        for j in 0..width {
            let along = (j as f64 - 0.5 * (width - 1) as f64) * pitch;
            out.push(Pose::from_xyz_yaw(
                x + c * along,
                y + s * along,
                0.5 * e + row as f64 * e,
                yaw,
            ));
        }
    }
    out
}

fn structures(
    family: Family,
    n: usize,
    rows: Option<usize>,
    e: f64,
    x_max: f64,
    rng: &mut ChaCha8Rng,
) -> (Vec<Pose>, Vec<Pose>) {
    // Distance from the structure center to the farthest cube corner in xy.
    let reach = match rows {
        Some(k) => 0.5 * (k - 1) as f64 * (e + PYRAMID_GAP) + FRAC_1_SQRT_2 * e,
        None => FRAC_1_SQRT_2 * e,
    };
    let x = rng.random_range(0.25 + reach..=x_max - reach);
    let y = rng.random_range(0.25 + reach..=0.75 - reach);
    match family {
        Family::Reverse => {
            let start = tower(n, e, x, y);
            let goal = start.iter().rev().copied().collect();
            (start, goal)
        }
        Family::Transform => (tower(n, e, x, y), pyramid(rows.unwrap(), e, x, y, 0.0)),
        Family::Rotate => (
            pyramid(rows.unwrap(), e, x, y, FRAC_PI_4),
            pyramid(rows.unwrap(), e, x, y, -FRAC_PI_4),
        ),
    }
}

/// Distance in xy from a point to an axis-aligned square.
fn square_distance(p: &Vec3, center: &Vec3, half: f64) -> f64 {
    let dx = ((p.x - center.x).abs() - half).max(0.0);
    let dy = ((p.y - center.y).abs() - half).max(0.0);
    dx.hypot(dy)
}

fn tiles(footprint: &[Vec3], e: f64, rng: &mut ChaCha8Rng) -> Vec<Tile> {
    let count = rng.random_range(4..=8);
    let keep_out = FRAC_1_SQRT_2 * e + CLEARANCE;
    let mut out = Vec::with_capacity(count);
    let mut tries = 0;
    while out.len() < count && tries < 1000 {
        tries += 1;
        let side: f64 = rng.random_range(0.05..=0.15);
        let height: f64 = rng.random_range(0.005..=0.02);
        let half = 0.5 * side;
        let center = Vec3::new(
            rng.random_range(half..=1.0 - half),
            rng.random_range(half..=1.0 - half),
            0.5 * height,
        );
        if footprint.iter().any(|p| square_distance(p, &center, half) < keep_out) {
            continue;
        }
        out.push(Tile {
            pose: Pose::from_translation(center.x, center.y, center.z),
            half_extents: Vec3::new(half, half, 0.5 * height),
        });
    }
    out
}

fn bumps(footprint: &[Vec3], e: f64, rng: &mut ChaCha8Rng) -> Vec<Bump> {
    let count = rng.random_range(6..=12);
    let keep_out = FRAC_1_SQRT_2 * e + CLEARANCE;
    let mut out = Vec::with_capacity(count);
    let mut tries = 0;
    while out.len() < count && tries < 1000 {
        tries += 1;
        let radius: f64 = rng.random_range(0.005..=0.015);
        let center = Vec3::new(
            rng.random_range(radius..=1.0 - radius),
            rng.random_range(radius..=1.0 - radius),
            0.0,
        );
        if footprint
            .iter()
            .any(|p| (p.xy() - center.xy()).norm() < keep_out + radius)
        {
            continue;
        }
        out.push(Bump { center, radius });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_names_round_trip() {
        for f in [Family::Reverse, Family::Transform, Family::Rotate] {
            assert_eq!(f.to_string().parse::<Family>().unwrap(), f);
        }
        assert_eq!("REVERSE".parse::<Family>().unwrap(), Family::Reverse);
        assert!("shuffle".parse::<Family>().is_err());
    }

    #[test]
    fn pyramid_row_counts() {
        assert_eq!(pyramid_rows(3), Some(2));
        assert_eq!(pyramid_rows(6), Some(3));
        assert_eq!(pyramid_rows(10), Some(4));
        assert_eq!(pyramid_rows(4), None);
        assert_eq!(pyramid_rows(1), None);
    }

    #[test]
    fn bad_counts_are_input_errors() {
        assert!(matches!(
            generate_problem(Family::Reverse, 1, 0.06, 0),
            Err(Error::Input(_))
        ));
        assert!(matches!(
            generate_problem(Family::Transform, 5, 0.06, 0),
            Err(Error::Input(_))
        ));
        assert!(matches!(
            generate_problem(Family::Rotate, 7, 0.06, 0),
            Err(Error::Input(_))
        ));
        assert!(matches!(
            generate_problem(Family::Reverse, 9, 0.06, 0),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn reverse_three_restacks_in_place() {
        let (scene, problem) = generate_problem(Family::Reverse, 3, 0.06, 7).unwrap();
        assert_eq!(scene.objects.len(), 3);
        let base = problem.start.get(ObjectId(0)).unwrap().translation;
        assert!((0.25..=0.75).contains(&base.x) && (0.25..=0.75).contains(&base.y));
        for i in 0..3 {
            let s = problem.start.get(ObjectId(i)).unwrap();
            let g = problem.goal.get(ObjectId(2 - i)).unwrap();
            assert_eq!(s, g);
            assert!((s.translation.z - (0.03 + 0.06 * i as f64)).abs() < 1e-12);
        }
    }

    #[test]
    fn transform_six_builds_a_three_row_pyramid_over_tiles() {
        let (scene, problem) = generate_problem(Family::Transform, 6, 0.06, 1).unwrap();
        assert!((4..=8).contains(&scene.tiles.len()));
        for t in &scene.tiles {
            assert!((0.025..=0.075).contains(&t.half_extents.x));
            assert!((0.0025..=0.01).contains(&t.half_extents.z));
        }
        let mut heights: Vec<i64> = problem
            .goal
            .iter()
            .map(|(_, p)| (p.translation.z / 0.06).floor() as i64)
            .collect();
        heights.sort();
        assert_eq!(heights, vec![0, 0, 0, 1, 1, 2]);
    }

    #[test]
    fn rotate_swaps_diagonals_over_bumps() {
        let (scene, problem) = generate_problem(Family::Rotate, 3, 0.06, 3).unwrap();
        assert!((6..=12).contains(&scene.bumps.len()));
        for (_, p) in problem.start.iter() {
            assert!((p.yaw() - FRAC_PI_4).abs() < 1e-9);
        }
        for (_, p) in problem.goal.iter() {
            assert!((p.yaw() + FRAC_PI_4).abs() < 1e-9);
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate_problem(Family::Transform, 3, 0.06, 11).unwrap();
        let b = generate_problem(Family::Transform, 3, 0.06, 11).unwrap();
        assert_eq!(a, b);
        let c = generate_problem(Family::Transform, 3, 0.06, 12).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn wall_keeps_structures_on_the_home_side() {
        let opts = GeneratorOptions {
            blocking_wall: true,
            ..GeneratorOptions::default()
        };
        let (scene, problem) = generate_problem_with(Family::Transform, 3, 5, &opts).unwrap();
        assert_eq!(scene.obstacles.len(), 1);
        assert!(problem
            .start
            .iter()
            .chain(problem.goal.iter())
            .all(|(_, p)| p.translation.x < 0.7));
    }
}
