use crate::manipulation::{GripperConfig, Motion};

use super::tree::ArrangementTree;
use super::{PlanStats, Solution, Step};

/// Joins the start-tree branch ending at `start_vertex` with the goal-tree
/// branch ending at `goal_vertex` (the same arrangement). Start-tree edges
/// are replayed as stored; goal-tree edges are replayed backwards with pick
/// and place swapped and motions reversed. The transit before each reversed
/// edge is the reversed transit of the edge replayed just before it, except
/// for the first, which is the junction transit.
pub fn reconstruct_path(
    start_tree: &ArrangementTree,
    start_vertex: usize,
    goal_tree: &ArrangementTree,
    goal_vertex: usize,
    junction: Option<Motion>,
    home: GripperConfig,
    stats: PlanStats,
) -> Solution {
    let mut steps: Vec<Step> = start_tree
        .branch(start_vertex)
        .into_iter()
        .map(|e| Step {
            object: e.object,
            pick: e.pick,
            place: e.place,
            transit: e.transit.clone(),
            transfer: e.transfer.clone(),
            arrangement: start_tree.arrangement(e.child).clone(),
        })
        .collect();

    let mut backwards = goal_tree.branch(goal_vertex);
    backwards.reverse();
    for (i, e) in backwards.iter().enumerate() {
        let transit = if i == 0 {
            junction.clone()
        } else {
            backwards[i - 1].transit.as_ref().map(Motion::reversed)
        };
        steps.push(Step {
            object: e.object,
            pick: e.place,
            place: e.pick,
            transit,
            transfer: e.transfer.as_ref().map(Motion::reversed),
            arrangement: goal_tree.arrangement(e.parent).clone(),
        });
    }

    Solution {
        start: start_tree.arrangement(0).clone(),
        home,
        steps,
        stats,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arrangement::{Arrangement, ObjectId};
    use crate::geometry::Pose;
    use crate::manipulation::{Grasp, MotionKind};
    use crate::planner::tree::{RootKind, TreeEdge};

    fn cfg(x: f64, held: Option<ObjectId>) -> GripperConfig {
        let pose = Pose::from_translation(x, 0.0, 0.3);
        match held {
            None => GripperConfig::free(pose),
            Some(o) => GripperConfig::holding(
                pose,
                Grasp {
                    object: o,
                    transform: Pose::from_translation(0.0, 0.0, -0.1),
                },
            ),
        }
    }

    fn motion(kind: MotionKind, a: GripperConfig, b: GripperConfig, ctx: &Arrangement) -> Motion {
        Motion {
            kind,
            waypoints: vec![a, b],
            context: ctx.clone(),
        }
    }

    fn arr(xs: &[f64]) -> Arrangement {
        Arrangement::from_poses(
            xs.iter()
                .enumerate()
                .map(|(i, x)| (ObjectId(i), Pose::from_translation(*x, 0.0, 0.03))),
        )
    }

    #[test]
    fn one_edge_per_side_joins_through_the_junction() {
        let home = cfg(0.0, None);
        let a0 = arr(&[0.1, 0.5]);
        let a1 = arr(&[0.2, 0.5]);
        let a2 = arr(&[0.2, 0.6]);

        let mut st = ArrangementTree::new(RootKind::Start, a0.clone(), Some(home), 0.1);
        let (p0, q0) = (cfg(0.1, Some(ObjectId(0))), cfg(0.2, Some(ObjectId(0))));
        st.add(
            TreeEdge {
                parent: 0,
                child: 0,
                object: ObjectId(0),
                pick: p0,
                place: q0,
                transit: Some(motion(MotionKind::Transit, home, p0.released(), &a0)),
                transfer: Some(motion(MotionKind::Transfer, p0, q0, &a0.without(ObjectId(0)))),
            },
            a1.clone(),
        );

        // goal tree grew from the goal by moving object 1 back to 0.5
        let mut gt = ArrangementTree::new(RootKind::Goal, a2.clone(), None, 0.1);
        let (p1, q1) = (cfg(0.6, Some(ObjectId(1))), cfg(0.5, Some(ObjectId(1))));
        gt.add(
            TreeEdge {
                parent: 0,
                child: 0,
                object: ObjectId(1),
                pick: p1,
                place: q1,
                transit: None,
                transfer: Some(motion(MotionKind::Transfer, p1, q1, &a2.without(ObjectId(1)))),
            },
            a1.clone(),
        );

        let junction = motion(MotionKind::Transit, q0.released(), q1.released(), &a1);
        let sol = reconstruct_path(&st, 1, &gt, 1, Some(junction.clone()), home, PlanStats::default());
        assert_eq!(sol.len(), 2);
        assert_eq!(sol.steps[0].arrangement, a1);
        assert_eq!(sol.steps[1].arrangement, a2);
        assert_eq!(sol.steps[1].transit.as_ref(), Some(&junction));
        assert_eq!(sol.steps[1].pick, q1);
        assert_eq!(sol.steps[1].place, p1);
        let tr = sol.steps[1].transfer.as_ref().unwrap();
        assert_eq!(*tr.first(), q1);
        assert_eq!(*tr.last(), p1);
        assert_eq!(*sol.final_arrangement(), a2);
    }

    #[test]
    fn roots_as_junction() {
        let home = cfg(0.0, None);
        let a0 = arr(&[0.1]);
        let st = ArrangementTree::new(RootKind::Start, a0.clone(), Some(home), 0.1);
        let gt = ArrangementTree::new(RootKind::Goal, a0.clone(), None, 0.1);
        let sol = reconstruct_path(&st, 0, &gt, 0, None, home, PlanStats::default());
        assert!(sol.is_empty());
        assert_eq!(sol.start, a0);
    }
}
