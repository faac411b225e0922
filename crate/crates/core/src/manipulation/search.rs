//! Bidirectional RRT-Connect over gripper position and yaw.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use rand::Rng;

use crate::arrangement::{Arrangement, Gnat};
use crate::geometry::{interpolate_pose, pose_distance, Pose, Rot, Vec3};
use crate::physics::SimWorld;

use super::{GripperConfig, Manipulator};

type Metric = Box<dyn Fn(&Pose, &Pose) -> f64>;

struct Tree {
    parent: Vec<Option<usize>>,
    poses: Vec<Pose>,
    index: Gnat<Pose, Metric>,
}

impl Tree {
    fn new(root: Pose, w_rot: f64) -> Self {
        let metric: Metric = Box::new(move |a: &Pose, b: &Pose| pose_distance(a, b, w_rot));
        let mut index = Gnat::new(metric);
        index.insert(root, 0);
        Self {
            parent: vec![None],
            poses: vec![root],
            index,
        }
    }

    fn add(&mut self, pose: Pose, parent: usize) -> usize {
        let id = self.poses.len();
        self.poses.push(pose);
        self.parent.push(Some(parent));
        self.index.insert(pose, id);
        id
    }

    fn branch(&self, mut id: usize) -> Vec<Pose> {
        let mut out = vec![self.poses[id]];
        while let Some(p) = self.parent[id] {
            out.push(self.poses[p]);
            id = p;
        }
        out
    }
}

enum Growth {
    Reached(usize),
    Advanced(usize),
    Trapped,
}

struct Search<'a> {
    m: &'a Manipulator,
    world: &'a SimWorld,
    context: &'a Arrangement,
    probe: GripperConfig,
}

impl Search<'_> {
    fn edge_valid(&self, a: &Pose, b: &Pose) -> bool {
        self.m
            .segment_valid(self.world, self.context, &self.probe.with_pose(*a), b)
    }

    fn grow(&self, tree: &mut Tree, target: &Pose) -> Growth {
        let (near, near_id, d) = match tree.index.nearest(target) {
            Some((p, id, d)) => (*p, id, d),
            None => return Growth::Trapped,
        };
        let step = self.m.settings.step_size;
        let (new, reached) = if d <= step {
            (*target, true)
        } else {
            (interpolate_pose(&near, target, step / d), false)
        };
        if !self.edge_valid(&near, &new) {
            return Growth::Trapped;
        }
        let id = tree.add(new, near_id);
        if reached {
            Growth::Reached(id)
        } else {
            Growth::Advanced(id)
        }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Pose {
        let t = self.m.bounds.sample(rng);
        let yaw = rng.random_range(-PI..PI);
        Pose::new(t, Rot::from_axis_angle(&Vec3::z_axis(), yaw))
    }

    /// Greedy shortcutting: from each kept waypoint jump to the farthest
    /// later waypoint reachable in a straight line.
    fn shortcut(&self, path: Vec<Pose>) -> Vec<Pose> {
        let mut out = vec![path[0]];
        let mut i = 0;
        while i + 1 < path.len() {
            let mut j = path.len() - 1;
            while j > i + 1 && !self.edge_valid(&path[i], &path[j]) {
                j -= 1;
            }
            out.push(path[j]);
            i = j;
        }
        out
    }
}

/// Pose path from `from` to `to`, both included, or `None` when the budget
/// runs out first.
pub(super) fn rrt_connect<R: Rng + ?Sized>(
    m: &Manipulator,
    world: &SimWorld,
    context: &Arrangement,
    from: &GripperConfig,
    to: &Pose,
    rng: &mut R,
) -> Option<Vec<Pose>> {
    let s = &m.settings;
    let search = Search {
        m,
        world,
        context,
        probe: *from,
    };
    let deadline = Instant::now() + Duration::from_secs_f64(s.timeout);
    let mut a = Tree::new(from.pose, s.rotation_weight);
    let mut b = Tree::new(*to, s.rotation_weight);
    let mut a_is_start = true;

    for _ in 0..s.max_iterations {
        if Instant::now() >= deadline {
            return None;
        }
        let target = search.sample(rng);
        let new = match search.grow(&mut a, &target) {
            Growth::Trapped => None,
            Growth::Reached(id) | Growth::Advanced(id) => Some(id),
        };
        if let Some(new) = new {
            let goal = a.poses[new];
            let joined = loop {
                match search.grow(&mut b, &goal) {
                    Growth::Advanced(_) => continue,
                    Growth::Reached(id) => break Some(id),
                    Growth::Trapped => break None,
                }
            };
            if let Some(joined) = joined {
                let mut path = a.branch(new);
                path.reverse();
                path.extend(b.branch(joined).into_iter().skip(1));
                if !a_is_start {
                    path.reverse();
                }
                return Some(search.shortcut(path));
            }
        }
        std::mem::swap(&mut a, &mut b);
        a_is_start = !a_is_start;
    }
    None
}
