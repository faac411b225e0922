use proptest::prelude::*;

use stackplan::geometry::pose_distance;
use stackplan::planner::{PlanOutcome, Planner, PlannerConfig, Solution};
use stackplan::scenario::{generate_problem, Family, ProblemSpec, SceneSpec};

const EDGE: f64 = 0.06;

fn reverse(n: usize, seed: u64) -> (SceneSpec, ProblemSpec) {
    generate_problem(Family::Reverse, n, EDGE, seed).unwrap()
}

fn planner(scene: &SceneSpec, problem: &ProblemSpec, tweak: impl FnOnce(&mut PlannerConfig)) -> Planner {
    let mut cfg = PlannerConfig {
        time_limit: 60.0,
        ..PlannerConfig::for_problem(problem)
    };
    tweak(&mut cfg);
    Planner::new(scene, &cfg).unwrap()
}

fn solved(p: &Planner, problem: &ProblemSpec) -> Solution {
    match p.plan(problem).unwrap() {
        PlanOutcome::Solved(s) => s,
        PlanOutcome::Timeout(stats) => panic!("timed out after {} iterations", stats.iterations),
    }
}

fn close(a: &stackplan::geometry::Pose, b: &stackplan::geometry::Pose) -> bool {
    pose_distance(a, b, 1.0) <= 1e-9
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(3))]

    #[test]
    fn every_tree_vertex_and_edge_is_valid(seed in 0u64..1000) {
        let (scene, problem) = reverse(3, seed);
        let p = planner(&scene, &problem, |_| {});
        let search = p.search(&problem).unwrap();
        prop_assert!(matches!(search.outcome, PlanOutcome::Solved(_)));
        // replay against the simulator directly, bypassing the planner's cache
        let w = scene.world();
        for tree in &search.trees {
            for v in &tree.vertices {
                prop_assert!(w.check_collision(&v.arrangement).unwrap());
                prop_assert!(w.check_stable(&v.arrangement));
            }
            for e in &tree.edges {
                let (parent, child) = (tree.arrangement(e.parent), tree.arrangement(e.child));
                prop_assert_eq!(parent.differing_objects(child).collect::<Vec<_>>(), vec![e.object]);
                prop_assert!(w.check_stable(&parent.without(e.object)));
                prop_assert!(w.check_stable(&child.without(e.object)));
                prop_assert!(close(&e.pick.object_pose().unwrap(), parent.get(e.object).unwrap()));
                prop_assert!(close(&e.place.object_pose().unwrap(), child.get(e.object).unwrap()));
                for m in e.transit.iter().chain(&e.transfer) {
                    prop_assert!(p.manipulator.validate_motion(&w, m));
                }
            }
        }
    }

    #[test]
    fn solutions_validate_and_simplify_monotonically(seed in 0u64..1000) {
        let (scene, problem) = reverse(3, seed);
        let p = planner(&scene, &problem, |c| c.seed = seed);
        let sol = solved(&p, &problem);
        prop_assert_eq!(p.validation_error(&problem, &sol), None);
        prop_assert_eq!(&sol.start, &problem.start);
        prop_assert_eq!(sol.final_arrangement(), &problem.goal);
        prop_assert!(sol.stats.nodes() >= 2);

        let (simple, stats) = p.simplify(&sol, seed);
        prop_assert!(simple.len() <= sol.len());
        prop_assert!(stats.candidates <= sol.len().pow(3));
        prop_assert_eq!(p.validation_error(&problem, &simple), None);
        let (again, _) = p.simplify(&simple, seed);
        prop_assert_eq!(again.len(), simple.len());

        let w = scene.world();
        for step in &simple.steps {
            let transit = step.transit.as_ref().unwrap();
            let transfer = step.transfer.as_ref().unwrap();
            prop_assert!(p.manipulator.validate_motion(&w, &transit.reversed()));
            prop_assert!(p.manipulator.validate_motion(&w, &transfer.reversed()));
            prop_assert!(transfer.waypoints.iter().all(|q| q.held == step.pick.held));
            prop_assert!(transit.waypoints.iter().all(|q| q.held.is_none()));
        }
    }
}

#[test]
fn start_equal_to_goal_needs_no_moves() {
    let (scene, mut problem) = reverse(2, 4);
    problem.goal = problem.start.clone();
    let p = planner(&scene, &problem, |_| {});
    let sol = solved(&p, &problem);
    assert!(sol.is_empty());
    assert!(p.validate_solution(&problem, &sol));
}

#[test]
fn single_worker_planning_is_reproducible() {
    let (scene, problem) = reverse(3, 11);
    let a = solved(&planner(&scene, &problem, |_| {}), &problem);
    let b = solved(&planner(&scene, &problem, |_| {}), &problem);
    assert_eq!(a, b);
}

#[test]
fn parallel_sampling_is_reproducible() {
    let (scene, problem) = reverse(3, 12);
    let a = solved(&planner(&scene, &problem, |c| c.workers = 3), &problem);
    let b = solved(&planner(&scene, &problem, |c| c.workers = 3), &problem);
    assert_eq!(a, b);
}

#[test]
fn tiny_budget_times_out() {
    let (scene, problem) = reverse(4, 0);
    let p = planner(&scene, &problem, |c| c.time_limit = 1e-6);
    assert!(matches!(p.plan(&problem).unwrap(), PlanOutcome::Timeout(_)));
}

#[test]
fn ablated_solutions_lack_motions_until_completed() {
    let (scene, problem) = reverse(3, 2);
    let p = planner(&scene, &problem, |c| c.motion_checks = false);
    let sol = solved(&p, &problem);
    assert!(!sol.has_motions());
    assert!(!p.validate_solution(&problem, &sol));
    if let Some(full) = p.complete_motions(&sol) {
        assert_eq!(p.validation_error(&problem, &full), None);
    }
}

#[test]
fn tampered_solutions_are_rejected() {
    let (scene, problem) = reverse(3, 5);
    let p = planner(&scene, &problem, |_| {});
    let sol = solved(&p, &problem);

    let mut short = sol.clone();
    short.steps.pop();
    assert!(p.validation_error(&problem, &short).unwrap().contains("goal"));

    let mut swapped = sol.clone();
    swapped.steps.swap(0, 1);
    assert!(!p.validate_solution(&problem, &swapped));

    let mut moved = sol.clone();
    moved.start = problem.goal.clone();
    assert!(!p.validate_solution(&problem, &moved));

    let mut bare = sol;
    bare.steps[0].transit = None;
    assert!(p.validation_error(&problem, &bare).unwrap().contains("transit"));
}
