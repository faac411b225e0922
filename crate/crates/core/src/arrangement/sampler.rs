use rand::Rng;

use crate::arrangement::Arrangement;
use crate::error::Error;
use crate::geometry::{boxes_intersect, uniform_rotation, Aabb, Pose};
use crate::physics::SimWorld;

#[derive(Clone, Debug, PartialEq)]
pub struct SamplerConfig {
    /// Full redraws allowed before giving up.
    pub max_attempts: usize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self { max_attempts: 10_000 }
    }
}

/// Rough feasibility check: the objects' largest faces must fit in the
/// workspace floor area.
fn fits(world: &SimWorld, bounds: &Aabb) -> bool {
    let e = bounds.extent();
    let area: f64 = world
        .objects
        .values()
        .map(|s| {
            let h = s.half_extents * 2.0;
            (h.x * h.y).max(h.y * h.z).max(h.x * h.z)
        })
        .sum();
    area <= e.x * e.y
}

/// Draws a valid arrangement: uniform poses within `bounds`, redrawn until
/// intersection-free, then settled under gravity and accepted only if the
/// result is at rest, stable and still inside `bounds`.
pub fn sample_arrangement<R: Rng + ?Sized>(
    world: &SimWorld,
    bounds: &Aabb,
    rng: &mut R,
    cfg: &SamplerConfig,
) -> Result<Arrangement, Error> {
    if !fits(world, bounds) {
        return Err(Error::Input(crate::error::InputError::new(
            "workspace is too small to hold every object",
        )));
    }
    let tol = world.config.penetration_tol;
    let shapes: Vec<_> = world.objects.iter().map(|(o, s)| (*o, *s)).collect();

    for _ in 0..cfg.max_attempts {
        let mut poses: Vec<Pose> = Vec::with_capacity(shapes.len());
        let mut ok = true;
        for (_, shape) in &shapes {
            let t = bounds.sample(rng);
            let r = uniform_rotation(rng);
            let pose = Pose::new(t, r);
            if !world.box_clear_of_statics(shape, &pose)
                || poses
                    .iter()
                    .zip(&shapes)
                    .any(|(p, (_, s))| boxes_intersect(s, p, shape, &pose, tol))
            {
                ok = false;
                // keep consuming the same number of draws per attempt
            }
            poses.push(pose);
        }
        if !ok {
            continue;
        }
        let drawn = Arrangement::from_poses(shapes.iter().map(|(o, _)| *o).zip(poses));
        let settled = world.settle(&drawn);
        if !settled.settled {
            continue;
        }
        let a = settled.arrangement;
        if !a.iter().all(|(_, p)| bounds.contains(&p.translation)) {
            continue;
        }
        if world.collision_free(&a) && world.check_stable(&a) {
            return Ok(a);
        }
    }
    Err(Error::SamplingFailed {
        attempts: cfg.max_attempts,
    })
}
