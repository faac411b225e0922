//! Rigid-box dynamics: speculative contact manifolds, a warm-started
//! sequential-impulse solver with Coulomb friction, and split-impulse
//! position correction. Everything runs in a fixed order, so a run is a pure function
//! of its inputs.

use std::collections::BTreeMap;

use nalgebra::{Matrix3, Quaternion, UnitQuaternion};

use crate::arrangement::{Arrangement, ObjectId};
use crate::geometry::{Pose, Rot, Vec3};

use super::{SimWorld, StaticBody};

const VELOCITY_ITERATIONS: usize = 48;
const POSITION_ITERATIONS: usize = 8;
const BAUMGARTE: f64 = 0.2;
const SLOP: f64 = 2e-5;
const MAX_CORRECTION_SPEED: f64 = 0.5;
const BASE_MARGIN: f64 = 2e-3;
const ANGULAR_DAMPING: f64 = 0.05;
const WARM_MATCH_RADIUS: f64 = 3e-3;

struct Body {
    pos: Vec3,
    rot: Rot,
    vel: Vec3,
    omega: Vec3,
    half: Vec3,
    inv_mass: f64,
    inv_inertia_local: Vec3,
    inv_inertia_world: Matrix3<f64>,
    push_vel: Vec3,
    push_omega: Vec3,
}

impl Body {
    fn update_inertia(&mut self) {
        let r = self.rot.to_rotation_matrix();
        let m = r.matrix();
        self.inv_inertia_world = m * Matrix3::from_diagonal(&self.inv_inertia_local) * m.transpose();
    }

    fn axes(&self) -> [Vec3; 3] {
        let m = self.rot.to_rotation_matrix();
        let m = m.matrix();
        [
            m.column(0).into_owned(),
            m.column(1).into_owned(),
            m.column(2).into_owned(),
        ]
    }

    fn bounding_radius(&self) -> f64 {
        self.half.norm()
    }
}

/// A posed box as seen by the narrow phase.
struct BoxView<'a> {
    center: &'a Vec3,
    axes: [Vec3; 3],
    half: &'a Vec3,
}

impl BoxView<'_> {
    fn project(&self, axis: &Vec3) -> f64 {
        (0..3).map(|i| self.half[i] * self.axes[i].dot(axis).abs()).sum()
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Other {
    Body(usize),
    Static(usize),
}

/// Contact point with normal pointing from body `a` toward the other body.
struct ContactPoint {
    point: Vec3,
    normal: Vec3,
    separation: f64,
}

struct Constraint {
    a: usize,
    b: Option<usize>,
    key: (usize, Other),
    local_a: Vec3,
    ra: Vec3,
    rb: Vec3,
    normal: Vec3,
    tangents: [Vec3; 2],
    mass_n: f64,
    mass_t: [f64; 2],
    target: f64,
    /// Separating speed demanded by the position pass.
    bias: f64,
    pn: f64,
    pt: [f64; 2],
    order: f64,
}

#[derive(Clone)]
struct Cached {
    local_a: Vec3,
    pn: f64,
    friction: Vec3,
}

pub(super) struct Simulation<'w> {
    world: &'w SimWorld,
    ids: Vec<ObjectId>,
    bodies: Vec<Body>,
    warm: BTreeMap<(usize, Other), Vec<Cached>>,
}

impl<'w> Simulation<'w> {
    pub(super) fn new(world: &'w SimWorld, a: &Arrangement) -> Self {
        let mut ids = Vec::with_capacity(a.len());
        let mut bodies = Vec::with_capacity(a.len());
        for (o, p) in a.iter() {
            let shape = world.objects[&o];
            let h = shape.half_extents;
            let m = shape.mass;
            let (inv_mass, inv_inertia_local) = if m > 0.0 {
                let e = h * 2.0;
                let ix = m / 12.0 * (e.y * e.y + e.z * e.z);
                let iy = m / 12.0 * (e.x * e.x + e.z * e.z);
                let iz = m / 12.0 * (e.x * e.x + e.y * e.y);
                (1.0 / m, Vec3::new(1.0 / ix, 1.0 / iy, 1.0 / iz))
            } else {
                (0.0, Vec3::zeros())
            };
            let mut body = Body {
                pos: p.translation,
                rot: p.rotation,
                vel: Vec3::zeros(),
                omega: Vec3::zeros(),
                half: h,
                inv_mass,
                inv_inertia_local,
                inv_inertia_world: Matrix3::zeros(),
                push_vel: Vec3::zeros(),
                push_omega: Vec3::zeros(),
            };
            body.update_inertia();
            ids.push(o);
            bodies.push(body);
        }
        Self {
            world,
            ids,
            bodies,
            warm: BTreeMap::new(),
        }
    }

    pub(super) fn poses(&self) -> Vec<Pose> {
        self.bodies.iter().map(|b| Pose::new(b.pos, b.rot)).collect()
    }

    pub(super) fn arrangement(&self) -> Arrangement {
        Arrangement::from_poses(
            self.ids
                .iter()
                .zip(&self.bodies)
                .map(|(o, b)| (*o, Pose::new(b.pos, b.rot))),
        )
    }

    pub(super) fn step(&mut self) {
        let cfg = &self.world.config;
        let dt = cfg.dt;
        let g = Vec3::new(0.0, 0.0, -cfg.gravity);
        let damp = 1.0 / (1.0 + ANGULAR_DAMPING * dt);
        for b in &mut self.bodies {
            if b.inv_mass > 0.0 {
                b.vel += g * dt;
                b.omega *= damp;
            }
        }

        let mut constraints = self.build_constraints(dt);
        // bottom-up ordering lets support forces propagate through stacks in
        // few iterations
        constraints.sort_by(|x, y| x.order.total_cmp(&y.order));

        for c in &constraints {
            let p = c.normal * c.pn + c.tangents[0] * c.pt[0] + c.tangents[1] * c.pt[1];
            apply(&mut self.bodies, c, &p);
        }
        let mu = cfg.friction_coeff;
        for _ in 0..VELOCITY_ITERATIONS {
            for c in constraints.iter_mut() {
                for k in 0..2 {
                    let vt = relative(&self.bodies, c, false).dot(&c.tangents[k]);
                    let limit = mu * c.pn;
                    let old = c.pt[k];
                    c.pt[k] = (old - c.mass_t[k] * vt).clamp(-limit, limit);
                    let d = c.tangents[k] * (c.pt[k] - old);
                    apply(&mut self.bodies, c, &d);
                }
                let vn = relative(&self.bodies, c, false).dot(&c.normal);
                let old = c.pn;
                c.pn = (old + c.mass_n * (c.target - vn)).max(0.0);
                let d = c.normal * (c.pn - old);
                apply(&mut self.bodies, c, &d);
            }
        }

        // split impulse: penetration is removed through pseudo-velocities
        // that move positions but never enter the momentum state
        for b in &mut self.bodies {
            b.push_vel = Vec3::zeros();
            b.push_omega = Vec3::zeros();
        }
        if constraints.iter().any(|c| c.bias > 0.0) {
            let mut acc = vec![0.0; constraints.len()];
            for _ in 0..POSITION_ITERATIONS {
                for (c, acc) in constraints.iter().zip(acc.iter_mut()) {
                    let vn = relative(&self.bodies, c, true).dot(&c.normal);
                    let old = *acc;
                    *acc = (old + c.mass_n * (c.bias - vn)).max(0.0);
                    let d = c.normal * (*acc - old);
                    apply_push(&mut self.bodies, c, &d);
                }
            }
        }

        self.warm.clear();
        for c in &constraints {
            self.warm.entry(c.key).or_default().push(Cached {
                local_a: c.local_a,
                pn: c.pn,
                friction: c.tangents[0] * c.pt[0] + c.tangents[1] * c.pt[1],
            });
        }

        for b in &mut self.bodies {
            if b.inv_mass == 0.0 {
                continue;
            }
            b.pos += (b.vel + b.push_vel) * dt;
            let w = b.omega + b.push_omega;
            let q = b.rot.into_inner();
            let dq = Quaternion::new(0.0, w.x, w.y, w.z) * q * (0.5 * dt);
            b.rot = UnitQuaternion::new_normalize(q + dq);
            b.update_inertia();
        }
    }

    fn build_constraints(&self, dt: f64) -> Vec<Constraint> {
        let mut out = Vec::new();
        let n = self.bodies.len();
        for i in 0..n {
            let a = &self.bodies[i];
            if a.inv_mass == 0.0 {
                continue;
            }
            let view_a = BoxView {
                center: &a.pos,
                axes: a.axes(),
                half: &a.half,
            };
            let ra = a.bounding_radius();
            let speed_a = a.vel.norm() + a.omega.norm() * ra;

            for (s_idx, s) in self.world.statics.iter().enumerate() {
                let margin = BASE_MARGIN + speed_a * dt;
                let points = match s {
                    StaticBody::Ground { height } => box_plane(&view_a, *height, margin),
                    StaticBody::Box { shape, pose } => {
                        let d = (pose.translation - a.pos).norm();
                        if d > ra + shape.half_extents.norm() + margin {
                            continue;
                        }
                        let m = pose.rotation.to_rotation_matrix();
                        let m = m.matrix();
                        let view_b = BoxView {
                            center: &pose.translation,
                            axes: [
                                m.column(0).into_owned(),
                                m.column(1).into_owned(),
                                m.column(2).into_owned(),
                            ],
                            half: &shape.half_extents,
                        };
                        box_box(&view_a, &view_b, margin)
                    }
                    StaticBody::Sphere { center, radius } => {
                        if (center - a.pos).norm() > ra + radius + margin {
                            continue;
                        }
                        box_sphere(&view_a, center, *radius, margin)
                    }
                };
                let key = (i, Other::Static(s_idx));
                for cp in points {
                    out.push(self.make_constraint(i, None, key, cp, dt));
                }
            }

            for j in (i + 1)..n {
                let b = &self.bodies[j];
                let rb = b.bounding_radius();
                let speed_b = b.vel.norm() + b.omega.norm() * rb;
                let margin = BASE_MARGIN + (speed_a + speed_b) * dt;
                if (b.pos - a.pos).norm() > ra + rb + margin {
                    continue;
                }
                let view_b = BoxView {
                    center: &b.pos,
                    axes: b.axes(),
                    half: &b.half,
                };
                let key = (i, Other::Body(j));
                for cp in box_box(&view_a, &view_b, margin) {
                    out.push(self.make_constraint(i, Some(j), key, cp, dt));
                }
            }
        }
        out
    }

    fn make_constraint(
        &self,
        i: usize,
        j: Option<usize>,
        key: (usize, Other),
        cp: ContactPoint,
        dt: f64,
    ) -> Constraint {
        let a = &self.bodies[i];
        let ra = cp.point - a.pos;
        let (rb, inv_mb, inv_ib) = match j {
            Some(j) => {
                let b = &self.bodies[j];
                (cp.point - b.pos, b.inv_mass, b.inv_inertia_world)
            }
            None => (Vec3::zeros(), 0.0, Matrix3::zeros()),
        };
        let eff = |dir: &Vec3| -> f64 {
            let ta = ra.cross(dir);
            let tb = rb.cross(dir);
            let k = a.inv_mass + inv_mb + ta.dot(&(a.inv_inertia_world * ta)) + tb.dot(&(inv_ib * tb));
            if k > 0.0 {
                1.0 / k
            } else {
                0.0
            }
        };
        let n = cp.normal;
        let tangents = tangent_basis(&n);
        let target = cp.separation.max(0.0) / -dt;
        let bias = (BAUMGARTE * (-cp.separation - SLOP).max(0.0) / dt).min(MAX_CORRECTION_SPEED);
        let local_a = a.rot.inverse() * ra;

        let mut pn = 0.0;
        let mut pt = [0.0; 2];
        if let Some(cached) = self.warm.get(&key) {
            let mut best: Option<(&Cached, f64)> = None;
            for c in cached {
                let d = (c.local_a - local_a).norm();
                if d < WARM_MATCH_RADIUS && best.is_none_or(|(_, bd)| d < bd) {
                    best = Some((c, d));
                }
            }
            if let Some((c, _)) = best {
                pn = c.pn;
                pt = [c.friction.dot(&tangents[0]), c.friction.dot(&tangents[1])];
            }
        }
        let order = match j {
            None => f64::NEG_INFINITY,
            Some(j) => a.pos.z.min(self.bodies[j].pos.z),
        };

        Constraint {
            a: i,
            b: j,
            key,
            local_a,
            ra,
            rb,
            normal: n,
            tangents,
            mass_n: eff(&n),
            mass_t: [eff(&tangents[0]), eff(&tangents[1])],
            target,
            bias,
            pn,
            pt,
            order,
        }
    }
}

/// Applies `p` to the second body and `-p` to the first.
fn apply(bodies: &mut [Body], c: &Constraint, p: &Vec3) {
    {
        let a = &mut bodies[c.a];
        a.vel -= p * a.inv_mass;
        a.omega -= a.inv_inertia_world * c.ra.cross(p);
    }
    if let Some(j) = c.b {
        let b = &mut bodies[j];
        b.vel += p * b.inv_mass;
        b.omega += b.inv_inertia_world * c.rb.cross(p);
    }
}

fn apply_push(bodies: &mut [Body], c: &Constraint, p: &Vec3) {
    {
        let a = &mut bodies[c.a];
        a.push_vel -= p * a.inv_mass;
        a.push_omega -= a.inv_inertia_world * c.ra.cross(p);
    }
    if let Some(j) = c.b {
        let b = &mut bodies[j];
        b.push_vel += p * b.inv_mass;
        b.push_omega += b.inv_inertia_world * c.rb.cross(p);
    }
}

/// Velocity of the second body relative to the first at the contact, from
/// either the real or the pseudo-velocity state.
fn relative(bodies: &[Body], c: &Constraint, push: bool) -> Vec3 {
    let at = |b: &Body, r: &Vec3| {
        if push {
            b.push_vel + b.push_omega.cross(r)
        } else {
            b.vel + b.omega.cross(r)
        }
    };
    let va = at(&bodies[c.a], &c.ra);
    let vb = c.b.map_or_else(Vec3::zeros, |j| at(&bodies[j], &c.rb));
    vb - va
}

fn tangent_basis(n: &Vec3) -> [Vec3; 2] {
    let helper = if n.x.abs() < 0.57 {
        Vec3::x()
    } else if n.y.abs() < 0.57 {
        Vec3::y()
    } else {
        Vec3::z()
    };
    let t1 = n.cross(&helper).normalize();
    let t2 = n.cross(&t1);
    [t1, t2]
}

fn box_plane(a: &BoxView, height: f64, margin: f64) -> Vec<ContactPoint> {
    let mut out = Vec::new();
    for i in 0..8 {
        let mut c = *a.center;
        for (k, axis) in a.axes.iter().enumerate() {
            let s = if i & (1 << k) == 0 { -1.0 } else { 1.0 };
            c += axis * (s * a.half[k]);
        }
        let sep = c.z - height;
        if sep <= margin {
            out.push(ContactPoint {
                point: Vec3::new(c.x, c.y, c.z - 0.5 * sep),
                normal: -Vec3::z(),
                separation: sep,
            });
        }
    }
    out
}

fn box_sphere(a: &BoxView, center: &Vec3, radius: f64, margin: f64) -> Vec<ContactPoint> {
    let d = center - a.center;
    let local = Vec3::new(d.dot(&a.axes[0]), d.dot(&a.axes[1]), d.dot(&a.axes[2]));
    let clamped = Vec3::new(
        local.x.clamp(-a.half.x, a.half.x),
        local.y.clamp(-a.half.y, a.half.y),
        local.z.clamp(-a.half.z, a.half.z),
    );
    let closest = a.center + a.axes[0] * clamped.x + a.axes[1] * clamped.y + a.axes[2] * clamped.z;
    let delta = center - closest;
    let dist = delta.norm();
    if dist > 1e-12 {
        let sep = dist - radius;
        if sep > margin {
            return Vec::new();
        }
        return vec![ContactPoint {
            point: closest,
            normal: delta / dist,
            separation: sep,
        }];
    }
    // sphere center inside the box: push out through the nearest face
    let mut best = (0, f64::INFINITY, 1.0);
    for k in 0..3 {
        let depth = a.half[k] - local[k].abs();
        if depth < best.1 {
            best = (k, depth, if local[k] >= 0.0 { 1.0 } else { -1.0 });
        }
    }
    vec![ContactPoint {
        point: *center,
        normal: a.axes[best.0] * best.2,
        separation: -(best.1 + radius),
    }]
}

/// Contact manifold between two boxes, normal pointing from `a` to `b`.
fn box_box(a: &BoxView, b: &BoxView, margin: f64) -> Vec<ContactPoint> {
    let d = b.center - a.center;

    // (separation, axis oriented a→b, kind) where kind: 0..3 face of a,
    // 3..6 face of b, 6.. edge pair
    let mut best_face: Option<(f64, Vec3, usize)> = None;
    for k in 0..6 {
        let axis = if k < 3 { a.axes[k] } else { b.axes[k - 3] };
        let s = d.dot(&axis).abs() - a.project(&axis) - b.project(&axis);
        if s > margin {
            return Vec::new();
        }
        let oriented = if d.dot(&axis) < 0.0 { -axis } else { axis };
        // small preference for faces of `a` keeps the reference face stable
        let bias = if k < 3 { 1e-7 } else { 0.0 };
        if best_face.is_none_or(|(bs, _, _)| s + bias > bs) {
            best_face = Some((s + bias, oriented, k));
        }
    }
    let mut best_edge: Option<(f64, Vec3, usize, usize)> = None;
    for i in 0..3 {
        for j in 0..3 {
            let c = a.axes[i].cross(&b.axes[j]);
            let n = c.norm();
            if n < 1e-6 {
                continue;
            }
            let axis = c / n;
            let s = d.dot(&axis).abs() - a.project(&axis) - b.project(&axis);
            if s > margin {
                return Vec::new();
            }
            let oriented = if d.dot(&axis) < 0.0 { -axis } else { axis };
            if best_edge.is_none_or(|(bs, _, _, _)| s > bs) {
                best_edge = Some((s, oriented, i, j));
            }
        }
    }
    let (face_sep, face_axis, face_kind) = best_face.unwrap();
    if let Some((edge_sep, axis, i, j)) = best_edge {
        // edge contacts only when clearly better than any face
        if edge_sep > face_sep + 1e-4 {
            return edge_contact(a, b, &axis, i, j, edge_sep);
        }
    }
    if face_kind < 3 {
        face_contact(a, b, &face_axis, face_kind, margin, false)
    } else {
        face_contact(b, a, &(-face_axis), face_kind - 3, margin, true)
    }
}

fn edge_contact(a: &BoxView, b: &BoxView, n: &Vec3, i: usize, j: usize, sep: f64) -> Vec<ContactPoint> {
    let mut pa = *a.center;
    for k in 0..3 {
        if k != i {
            let s = if a.axes[k].dot(n) > 0.0 { 1.0 } else { -1.0 };
            pa += a.axes[k] * (s * a.half[k]);
        }
    }
    let mut pb = *b.center;
    for k in 0..3 {
        if k != j {
            let s = if b.axes[k].dot(n) < 0.0 { 1.0 } else { -1.0 };
            pb += b.axes[k] * (s * b.half[k]);
        }
    }
    let (ua, ub) = (a.axes[i], b.axes[j]);
    let r = pa - pb;
    let aa = ua.dot(&ub);
    let denom = 1.0 - aa * aa;
    let (mut sa, mut sb) = (0.0, 0.0);
    if denom > 1e-12 {
        let e = ua.dot(&r);
        let f = ub.dot(&r);
        sa = ((aa * f - e) / denom).clamp(-a.half[i], a.half[i]);
        sb = (f + aa * sa).clamp(-b.half[j], b.half[j]);
    }
    let ca = pa + ua * sa;
    let cb = pb + ub * sb;
    vec![ContactPoint {
        point: (ca + cb) * 0.5,
        normal: *n,
        separation: sep,
    }]
}

/// Clips the incident face of `inc` against the reference face `k` of `rf`.
/// `n` is the reference face's outward normal (pointing toward `inc`).
/// When `swapped`, `rf` is the second body and normals are flipped back so
/// they still point from the first body to the second.
fn face_contact(rf: &BoxView, inc: &BoxView, n: &Vec3, k: usize, margin: f64, swapped: bool) -> Vec<ContactPoint> {
    let ref_center = rf.center + n * rf.half[k];
    let (u, v) = ((k + 1) % 3, (k + 2) % 3);
    let (axis_u, axis_v) = (rf.axes[u], rf.axes[v]);
    let (hu, hv) = (rf.half[u], rf.half[v]);

    // incident face: the one whose outward normal is most opposed to n
    let mut m = 0;
    let mut best = f64::NEG_INFINITY;
    for (idx, axis) in inc.axes.iter().enumerate() {
        let dp = axis.dot(n).abs();
        if dp > best {
            best = dp;
            m = idx;
        }
    }
    let sign = if inc.axes[m].dot(n) > 0.0 { -1.0 } else { 1.0 };
    let face_center = inc.center + inc.axes[m] * (sign * inc.half[m]);
    let (iu, iv) = ((m + 1) % 3, (m + 2) % 3);
    let eu = inc.axes[iu] * inc.half[iu];
    let ev = inc.axes[iv] * inc.half[iv];
    let mut poly: Vec<Vec3> = vec![
        face_center + eu + ev,
        face_center - eu + ev,
        face_center - eu - ev,
        face_center + eu - ev,
    ];

    for (axis, h) in [(axis_u, hu), (-axis_u, hu), (axis_v, hv), (-axis_v, hv)] {
        poly = clip(&poly, &axis, axis.dot(&ref_center) + h);
        if poly.is_empty() {
            return Vec::new();
        }
    }

    let normal = if swapped { -n } else { *n };
    let mut out = Vec::with_capacity(poly.len());
    for p in poly {
        let sep = n.dot(&(p - ref_center));
        if sep <= margin {
            out.push(ContactPoint {
                point: p - n * (0.5 * sep),
                normal,
                separation: sep,
            });
        }
    }
    out
}

/// Sutherland–Hodgman against the half-space `axis·x ≤ offset`.
fn clip(poly: &[Vec3], axis: &Vec3, offset: f64) -> Vec<Vec3> {
    let mut out = Vec::with_capacity(poly.len() + 2);
    let n = poly.len();
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        let dp = axis.dot(&p) - offset;
        let dq = axis.dot(&q) - offset;
        if dp <= 0.0 {
            out.push(p);
        }
        if (dp <= 0.0) != (dq <= 0.0) {
            let t = dp / (dp - dq);
            out.push(p + (q - p) * t);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn view<'a>(center: &'a Vec3, half: &'a Vec3, rot: Rot) -> BoxView<'a> {
        let m = rot.to_rotation_matrix();
        let m = m.matrix();
        BoxView {
            center,
            axes: [
                m.column(0).into_owned(),
                m.column(1).into_owned(),
                m.column(2).into_owned(),
            ],
            half,
        }
    }

    #[test]
    fn stacked_cubes_make_four_point_manifold() {
        let h = Vec3::repeat(0.5);
        let ca = Vec3::zeros();
        let cb = Vec3::new(0.0, 0.0, 0.999);
        let pts = box_box(&view(&ca, &h, Rot::identity()), &view(&cb, &h, Rot::identity()), 1e-3);
        assert_eq!(pts.len(), 4);
        for p in &pts {
            assert!((p.normal - Vec3::z()).norm() < 1e-12);
            assert!((p.separation + 0.001).abs() < 1e-9);
        }
    }

    #[test]
    fn offset_stack_manifold_spans_overlap() {
        let h = Vec3::repeat(0.5);
        let ca = Vec3::zeros();
        let cb = Vec3::new(0.3, 0.0, 1.0);
        let pts = box_box(&view(&ca, &h, Rot::identity()), &view(&cb, &h, Rot::identity()), 1e-3);
        let xs: Vec<f64> = pts.iter().map(|p| p.point.x).collect();
        let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!((lo + 0.2).abs() < 1e-9 && (hi - 0.5).abs() < 1e-9);
    }

    #[test]
    fn separated_boxes_have_no_contacts() {
        let h = Vec3::repeat(0.5);
        let ca = Vec3::zeros();
        let cb = Vec3::new(0.0, 0.0, 1.1);
        assert!(box_box(&view(&ca, &h, Rot::identity()), &view(&cb, &h, Rot::identity()), 1e-3).is_empty());
    }

    #[test]
    fn plane_contacts_at_bottom_corners() {
        let h = Vec3::repeat(0.5);
        let c = Vec3::new(0.0, 0.0, 0.5);
        let pts = box_plane(&view(&c, &h, Rot::identity()), 0.0, 1e-3);
        assert_eq!(pts.len(), 4);
    }
}
