//! Quasi-static stability of axis-aligned stacks: a body is held up iff the
//! combined center of mass of itself and everything resting on it (directly
//! or transitively) projects strictly inside its support rectangle.

use crate::arrangement::{Arrangement, ObjectId};
use crate::error::Error;
use crate::geometry::{BoxShape, Pose, Vec3};

use super::{SimWorld, StaticBody};

#[derive(Clone, Copy)]
struct Rect {
    min: [f64; 2],
    max: [f64; 2],
}

impl Rect {
    fn footprint(shape: &BoxShape, pose: &Pose) -> Rect {
        let c = pose.translation;
        let h = shape.half_extents;
        Rect {
            min: [c.x - h.x, c.y - h.y],
            max: [c.x + h.x, c.y + h.y],
        }
    }

    fn intersect(&self, o: &Rect) -> Option<Rect> {
        let r = Rect {
            min: [self.min[0].max(o.min[0]), self.min[1].max(o.min[1])],
            max: [self.max[0].min(o.max[0]), self.max[1].min(o.max[1])],
        };
        (r.min[0] < r.max[0] && r.min[1] < r.max[1]).then_some(r)
    }

    /// Distance from `p` to the nearest edge, positive inside.
    fn margin(&self, p: [f64; 2]) -> f64 {
        (p[0] - self.min[0])
            .min(self.max[0] - p[0])
            .min(p[1] - self.min[1])
            .min(self.max[1] - p[1])
    }
}

enum Support {
    Ground,
    Object(ObjectId),
    Tile(Rect),
}

/// Signed stability margin of an axis-aligned stack arrangement: the smallest
/// distance, over all objects, from the projected cumulative center of mass to
/// the edge of the object's support rectangle. Positive means every body is
/// held up.
pub fn support_margin(world: &SimWorld, a: &Arrangement) -> Result<f64, Error> {
    let tol = world.config.penetration_tol.max(1e-9);
    let domain = |m: String| Error::OracleDomain(m);

    for (o, p) in a.iter() {
        if world.shape(o).is_none() {
            return Err(domain(format!("unknown object {o}")));
        }
        let ang = p.rotation.angle();
        if ang > 1e-9 {
            return Err(domain(format!("object {o} is rotated")));
        }
    }

    let bottom = |o: ObjectId, p: &Pose| p.translation.z - world.objects[&o].half_extents.z;
    let top = |o: ObjectId, p: &Pose| p.translation.z + world.objects[&o].half_extents.z;

    let mut support: Vec<(ObjectId, Support)> = Vec::new();
    for (o, p) in a.iter() {
        let fp = Rect::footprint(&world.objects[&o], p);
        let z = bottom(o, p);
        let mut found: Vec<Support> = Vec::new();
        for (q, pq) in a.iter() {
            if q != o
                && (top(q, pq) - z).abs() <= tol
                && fp.intersect(&Rect::footprint(&world.objects[&q], pq)).is_some()
            {
                found.push(Support::Object(q));
            }
        }
        for s in &world.statics {
            match s {
                StaticBody::Ground { height } => {
                    if (height - z).abs() <= tol {
                        found.push(Support::Ground);
                    }
                }
                StaticBody::Box { shape, pose } => {
                    let tr = Rect::footprint(shape, pose);
                    let tile_top = pose.translation.z + shape.half_extents.z;
                    if fp.intersect(&tr).is_some() {
                        if pose.rotation.angle() > 1e-9 {
                            return Err(domain("rotated static box under an object".into()));
                        }
                        if (tile_top - z).abs() <= tol {
                            found.push(Support::Tile(tr));
                        } else if tile_top > z {
                            return Err(domain(format!("object {o} overlaps a static box")));
                        }
                    }
                }
                StaticBody::Sphere { center, radius } => {
                    let h = world.objects[&o].half_extents;
                    let c = p.translation;
                    let near = (center.x - c.x).abs() < h.x + radius && (center.y - c.y).abs() < h.y + radius;
                    if near && center.z + radius > z - tol {
                        return Err(domain(format!("object {o} touches a bump")));
                    }
                }
            }
        }
        match found.len() {
            0 => return Err(domain(format!("object {o} has no support"))),
            1 => support.push((o, found.pop().unwrap())),
            _ => {
                // resting on the ground next to a tile edge is still flat support
                if found.iter().all(|s| matches!(s, Support::Ground | Support::Tile(_))) {
                    support.push((o, Support::Ground));
                } else {
                    return Err(domain(format!("object {o} rests on more than one body")));
                }
            }
        }
    }

    // objects carried by each object, transitively
    let carried_by = |o: ObjectId| -> Vec<ObjectId> {
        let mut out = vec![o];
        let mut i = 0;
        while i < out.len() {
            let cur = out[i];
            for (q, s) in &support {
                if matches!(s, Support::Object(x) if *x == cur) && !out.contains(q) {
                    out.push(*q);
                }
            }
            i += 1;
        }
        out
    };

    let mut margin = f64::INFINITY;
    for (o, s) in &support {
        let p = a.get(*o).unwrap();
        let fp = Rect::footprint(&world.objects[o], p);
        let base = match s {
            Support::Ground => fp,
            Support::Object(q) => match fp.intersect(&Rect::footprint(&world.objects[q], a.get(*q).unwrap())) {
                Some(r) => r,
                None => return Err(domain(format!("object {o} has no contact patch"))),
            },
            Support::Tile(t) => match fp.intersect(t) {
                Some(r) => r,
                None => return Err(domain(format!("object {o} has no contact patch"))),
            },
        };
        let group = carried_by(*o);
        let mut mass = 0.0;
        let mut com = Vec3::zeros();
        for q in &group {
            let m = world.objects[q].mass;
            mass += m;
            com += a.get(*q).unwrap().translation * m;
        }
        if mass <= 0.0 {
            return Err(domain(format!("object {o} stack has no mass")));
        }
        com /= mass;
        margin = margin.min(base.margin([com.x, com.y]));
    }
    Ok(margin)
}

/// True iff every object's cumulative center of mass lies strictly inside its
/// support rectangle. Only defined for unrotated boxes in single-support
/// chains.
pub fn support_polygon_oracle(world: &SimWorld, a: &Arrangement) -> Result<bool, Error> {
    Ok(support_margin(world, a)? > 0.0)
}
