//! End-to-end acceptance checks. Each test prints one PASS/FAIL line to the
//! unbuffered stderr handle so the verdicts show even when output is
//! captured.

use std::collections::{HashSet, VecDeque};
use std::io::Write;
use std::sync::{Mutex, MutexGuard, OnceLock};
use std::time::{Duration, Instant};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use stackplan::arrangement::{arrangement_distance, sample_arrangement, Arrangement, Gnat, ObjectId, SamplerConfig};
use stackplan::bench::{run_batch_records, run_trial, BatchConfig, BatchReport, TrialRecord};
use stackplan::geometry::{uniform_rotation, BoxShape, Pose};
use stackplan::manipulation::{Manipulator, Motion, MotionSettings};
use stackplan::physics::{support_polygon_oracle, SimConfig, SimWorld, StaticBody};
use stackplan::planner::{Planner, PlannerConfig, Solution};
use stackplan::scenario::{generate_problem, Family, GeneratorOptions, ProblemSpec, SceneSpec};

const EDGE: f64 = 0.06;

/// Planning is timed, so acceptance tests never overlap.
fn exclusive() -> MutexGuard<'static, ()> {
    static LOCK: Mutex<()> = Mutex::new(());
    LOCK.lock().unwrap_or_else(|e| e.into_inner())
}

fn verdict(n: u32, what: &str, pass: bool, detail: String) {
    let tag = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "[acceptance {n:2}] {tag}  {what}: {detail}");
}

struct Batch {
    report: BatchReport,
    records: Vec<TrialRecord>,
}

fn batch(cfg: BatchConfig) -> Batch {
    let (report, records) = run_batch_records(&cfg).unwrap();
    Batch { report, records }
}

fn reverse4_config() -> BatchConfig {
    BatchConfig {
        family: Family::Reverse,
        cubes: 4,
        trials: 20,
        time_limit: 60.0,
        master_seed: 0,
        ..BatchConfig::default()
    }
}

fn reverse3_config() -> BatchConfig {
    BatchConfig {
        family: Family::Reverse,
        cubes: 3,
        trials: 10,
        time_limit: 60.0,
        master_seed: 0,
        ..BatchConfig::default()
    }
}

fn walled_transform_config(ablate: bool) -> BatchConfig {
    BatchConfig {
        family: Family::Transform,
        cubes: 3,
        trials: 20,
        time_limit: 60.0,
        master_seed: 0,
        ablate_motion_checks: ablate,
        generator: GeneratorOptions {
            blocking_wall: true,
            ..GeneratorOptions::default()
        },
        ..BatchConfig::default()
    }
}

fn reverse4() -> &'static Batch {
    static B: OnceLock<Batch> = OnceLock::new();
    B.get_or_init(|| batch(reverse4_config()))
}

fn reverse3() -> &'static Batch {
    static B: OnceLock<Batch> = OnceLock::new();
    B.get_or_init(|| batch(reverse3_config()))
}

fn walled(ablate: bool) -> &'static Batch {
    static ABLATED: OnceLock<Batch> = OnceLock::new();
    static CHECKED: OnceLock<Batch> = OnceLock::new();
    let cell = if ablate { &ABLATED } else { &CHECKED };
    cell.get_or_init(|| batch(walled_transform_config(ablate)))
}

fn all_batches() -> [&'static Batch; 4] {
    [reverse4(), reverse3(), walled(false), walled(true)]
}

/// Every solution a batch emitted together with its problem: raw searches
/// (motion-complete ones only) and simplified outputs.
fn emitted(b: &Batch) -> impl Iterator<Item = (&SceneSpec, &ProblemSpec, &Solution)> {
    b.records.iter().flat_map(|r| {
        let ctx = r.scene.as_ref().zip(r.problem.as_ref());
        [r.solution.as_ref(), r.simplified.as_ref()]
            .into_iter()
            .flatten()
            .filter(|s| s.has_motions())
            .filter_map(move |s| ctx.map(|(sc, pr)| (sc, pr, s)))
    })
}

/// Replays a solution against a fresh simulator and gripper model without
/// going through the planner.
fn replay(scene: &SceneSpec, problem: &ProblemSpec, sol: &Solution) -> Result<(), String> {
    let w = scene.world();
    let m = Manipulator::new(scene.gripper.clone(), scene.workspace, MotionSettings::default());
    if sol.start != problem.start || *sol.final_arrangement() != problem.goal {
        return Err("does not join start to goal".into());
    }
    if !(w.check_collision(&sol.start).unwrap() && w.check_stable(&sol.start)) {
        return Err("start is invalid".into());
    }
    let mut prev = sol.home;
    for (k, (before, step)) in sol.befores().zip(&sol.steps).enumerate() {
        let o = step.object;
        let after = &step.arrangement;
        let err = |m: &str| Err(format!("step {k}: {m}"));
        if before.differing_objects(after).collect::<Vec<_>>() != vec![o] {
            return err("moves something other than one object");
        }
        if !(w.check_collision(after).unwrap() && w.check_stable(after)) {
            return err("intermediate arrangement invalid");
        }
        if !w.check_stable(&before.without(o)) {
            return err("picking leaves the rest unstable");
        }
        if !w.check_stable(&after.without(o)) {
            return err("placing onto an unstable rest");
        }
        let (Some(transit), Some(transfer)) = (&step.transit, &step.transfer) else {
            return err("missing motion");
        };
        if transit.context != *before || transfer.context != before.without(o) {
            return err("motion context mismatch");
        }
        if *transit.first() != prev.released() || *transit.last() != step.pick.released() {
            return err("transit endpoints");
        }
        if *transfer.first() != step.pick || *transfer.last() != step.place {
            return err("transfer endpoints");
        }
        if !m.validate_motion(&w, transit) || !m.validate_motion(&w, transfer) {
            return err("motion collides");
        }
        prev = step.place;
    }
    Ok(())
}

fn check_both_routes(scene: &SceneSpec, problem: &ProblemSpec, sol: &Solution) -> Result<(), String> {
    let planner = Planner::new(scene, &PlannerConfig::for_problem(problem)).unwrap();
    if let Some(e) = planner.validation_error(problem, sol) {
        return Err(format!("validator: {e}"));
    }
    replay(scene, problem, sol).map_err(|e| format!("replay: {e}"))
}

fn cubes(n: usize) -> SimWorld {
    let objects = (0..n).map(|i| (ObjectId(i), BoxShape::cube(EDGE, 0.1))).collect();
    SimWorld::new(vec![StaticBody::Ground { height: 0.0 }], objects, SimConfig::default())
}

/// Signed distance from the combined center of mass of each sub-stack to
/// the edge of the region supporting it, minimized over levels. Positive
/// means every level is supported.
fn stack_margin(centers: &[[f64; 2]]) -> f64 {
    let h = EDGE / 2.0;
    let mut margin = f64::INFINITY;
    for i in 0..centers.len() {
        let above = &centers[i..];
        let com = [
            above.iter().map(|c| c[0]).sum::<f64>() / above.len() as f64,
            above.iter().map(|c| c[1]).sum::<f64>() / above.len() as f64,
        ];
        let (mut lo, mut hi) = (
            [centers[i][0] - h, centers[i][1] - h],
            [centers[i][0] + h, centers[i][1] + h],
        );
        if i > 0 {
            let below = centers[i - 1];
            for d in 0..2 {
                lo[d] = lo[d].max(below[d] - h);
                hi[d] = hi[d].min(below[d] + h);
            }
        }
        for d in 0..2 {
            margin = margin.min(com[d] - lo[d]).min(hi[d] - com[d]);
        }
    }
    margin
}

#[test]
fn c01_stability_oracle_equivalence() {
    let _g = exclusive();
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut outside, mut agree, mut oracle_agree, mut stable_cases) = (0, 0, 0, 0);
    while outside < 550 {
        let n = rng.random_range(1..=3);
        let mut centers = vec![[0.5, 0.5]];
        for i in 1..n {
            let prev: [f64; 2] = centers[i - 1];
            centers.push([
                prev[0] + rng.random_range(-0.6..0.6) * EDGE,
                prev[1] + rng.random_range(-0.6..0.6) * EDGE,
            ]);
        }
        let a = Arrangement::from_poses(
            centers
                .iter()
                .enumerate()
                .map(|(i, c)| (ObjectId(i), Pose::from_translation(c[0], c[1], (i as f64 + 0.5) * EDGE))),
        );
        let margin = stack_margin(&centers);
        if margin.abs() <= 0.05 * EDGE {
            continue;
        }
        outside += 1;
        let expected = margin > 0.0;
        stable_cases += expected as usize;
        let w = cubes(n);
        agree += (w.check_stable(&a) == expected) as usize;
        oracle_agree += (support_polygon_oracle(&w, &a).unwrap() == expected) as usize;
    }
    let elapsed = t.elapsed();
    let rate = agree as f64 / outside as f64;
    let pass = outside >= 500 && rate >= 0.98 && oracle_agree == outside && elapsed <= Duration::from_secs(120);
    verdict(
        1,
        "stability oracle equivalence",
        pass,
        format!(
            "{agree}/{outside} outside band agree ({:.2}%), {stable_cases} stable; library oracle {oracle_agree}/{outside}; {:.1} s",
            100.0 * rate,
            elapsed.as_secs_f64()
        ),
    );
    assert!(outside >= 500, "only {outside} cases outside the band");
    assert!(rate >= 0.98);
    assert_eq!(oracle_agree, outside);
    assert!(elapsed <= Duration::from_secs(120));
}

#[test]
fn c02_sampler_validity() {
    let _g = exclusive();
    let t = Instant::now();
    let mut valid = 0;
    let mut calls = 0;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for (k, family) in [Family::Reverse, Family::Transform, Family::Rotate]
        .into_iter()
        .enumerate()
    {
        let (scene, problem) = generate_problem(family, 3, EDGE, 100 + k as u64).unwrap();
        let planner = Planner::new(&scene, &PlannerConfig::for_problem(&problem)).unwrap();
        let replay = scene.world();
        let quota = if k == 2 { 66 } else { 67 };
        for _ in 0..quota {
            calls += 1;
            let a =
                sample_arrangement(&planner.world, &planner.workspace, &mut rng, &SamplerConfig::default()).unwrap();
            let ok = a.len() == 3
                && replay.check_collision(&a).unwrap()
                && replay.check_stable(&a)
                && a.iter().all(|(_, p)| scene.workspace.contains(&p.translation));
            valid += ok as usize;
        }
    }
    let elapsed = t.elapsed();
    let pass = calls == 200 && valid == calls && elapsed <= Duration::from_secs(120);
    verdict(
        2,
        "sampler validity",
        pass,
        format!("{valid}/{calls} valid on replay; {:.1} s", elapsed.as_secs_f64()),
    );
    assert_eq!(calls, 200);
    assert_eq!(valid, calls);
    assert!(elapsed <= Duration::from_secs(120));
}

#[test]
fn c03_gnat_exactness() {
    let _g = exclusive();
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (_, problem) = generate_problem(Family::Reverse, 3, EDGE, 0).unwrap();
    let ws = stackplan::geometry::Aabb::new(
        stackplan::geometry::Vec3::zeros(),
        stackplan::geometry::Vec3::new(1.0, 1.0, 0.5),
    )
    .unwrap();
    let random = |rng: &mut ChaCha8Rng| {
        Arrangement::from_poses(
            problem
                .start
                .objects()
                .map(|o| (o, Pose::new(ws.sample(rng), uniform_rotation(rng)))),
        )
    };
    let metric = |a: &Arrangement, b: &Arrangement| arrangement_distance(a, b, 0.1);
    let mut exact = 0;
    for _ in 0..100 {
        let size = rng.random_range(1..=500);
        let set: Vec<Arrangement> = (0..size).map(|_| random(&mut rng)).collect();
        let query = random(&mut rng);
        let mut index = Gnat::new(metric);
        for (h, a) in set.iter().enumerate() {
            index.insert(a.clone(), h);
        }
        let (_, h, d) = index.nearest(&query).unwrap();
        let (best_h, best) = set.iter().enumerate().map(|(i, a)| (i, metric(&query, a))).fold(
            (usize::MAX, f64::INFINITY),
            |acc, (i, d)| if d < acc.1 { (i, d) } else { acc },
        );
        exact += (d == best && h == best_h) as usize;
    }
    let elapsed = t.elapsed();
    let pass = exact == 100 && elapsed <= Duration::from_secs(30);
    verdict(
        3,
        "GNAT exactness",
        pass,
        format!("{exact}/100 exact; {:.1} s", elapsed.as_secs_f64()),
    );
    assert_eq!(exact, 100);
    assert!(elapsed <= Duration::from_secs(30));
}

#[test]
fn c04_reverse4_success_rate() {
    let _g = exclusive();
    let t = Instant::now();
    let b = reverse4();
    let elapsed = t.elapsed();
    let rate = b.report.success_rate.unwrap();
    let pass = rate >= 0.90 && elapsed <= Duration::from_secs(25 * 60);
    verdict(
        4,
        "REVERSE-4 success rate",
        pass,
        format!(
            "{}/{} solved ({rate:.2}); mean solve {:.1} s; batch {:.0} s",
            b.report.successes,
            b.report.trials,
            b.report.solve_time.map_or(f64::NAN, |s| s.mean),
            elapsed.as_secs_f64()
        ),
    );
    assert!(rate >= 0.90);
    assert!(elapsed <= Duration::from_secs(25 * 60));
}

/// Fewest pick-and-place moves reversing an `n`-tower in place, by
/// breadth-first search over symbolic states: the stack on the tower's
/// spot plus any number of stacks elsewhere on the table.
fn optimal_reversal(n: u8) -> usize {
    type State = (Vec<u8>, Vec<Vec<u8>>);
    let normal = |base: Vec<u8>, mut others: Vec<Vec<u8>>| -> State {
        others.retain(|s| !s.is_empty());
        others.sort();
        (base, others)
    };
    let start: State = ((0..n).collect(), Vec::new());
    let goal: State = ((0..n).rev().collect(), Vec::new());
    let mut seen = HashSet::from([start.clone()]);
    let mut queue = VecDeque::from([(start, 0)]);
    while let Some(((base, others), depth)) = queue.pop_front() {
        if (base.clone(), others.clone()) == goal {
            return depth;
        }
        // source 0 is the tower spot, k > 0 is others[k - 1]
        for src in 0..=others.len() {
            let (mut b, mut o) = (base.clone(), others.clone());
            let top = if src == 0 { b.pop() } else { o[src - 1].pop() };
            let Some(top) = top else { continue };
            let mut next = Vec::new();
            let mut onto_base = b.clone();
            onto_base.push(top);
            next.push(normal(onto_base, o.clone()));
            for dst in 0..o.len() {
                if dst + 1 != src {
                    let mut o2 = o.clone();
                    o2[dst].push(top);
                    next.push(normal(b.clone(), o2));
                }
            }
            o.push(vec![top]);
            next.push(normal(b, o));
            for s in next {
                if seen.insert(s.clone()) {
                    queue.push_back((s, depth + 1));
                }
            }
        }
    }
    unreachable!("reversal is always possible")
}

#[test]
fn c05_optimal_length_recovery() {
    let _g = exclusive();
    let (opt3, opt4) = (optimal_reversal(3), optimal_reversal(4));
    let r3: Vec<usize> = reverse3()
        .records
        .iter()
        .filter_map(|r| r.metrics.simplified_length)
        .collect();
    let r4 = reverse4().report.simplified_length.unwrap();
    let all_opt = r3.len() == 10 && r3.iter().all(|&l| l == opt3);
    let pass = opt3 == 6 && opt4 == 8 && all_opt && r4.mean <= 9.0;
    verdict(
        5,
        "optimal length recovery",
        pass,
        format!(
            "REVERSE-3 simplified {r3:?} (optimum {opt3}); REVERSE-4 simplified mean {:.2} (optimum {opt4})",
            r4.mean
        ),
    );
    assert_eq!((opt3, opt4), (6, 8));
    assert!(all_opt, "{r3:?}");
    assert!(r4.mean <= 9.0);
}

#[test]
fn c06_simplification_improvement() {
    let _g = exclusive();
    let b = reverse4();
    let improvement = b.report.improvement.unwrap();
    let mut lengthened = 0;
    let mut checked = 0;
    let mut invalid = 0;
    for batch in all_batches() {
        for r in &batch.records {
            if let (Some(raw), Some(simple)) = (&r.solution, &r.simplified) {
                checked += 1;
                lengthened += (simple.len() > raw.len()) as usize;
                let (scene, problem) = (r.scene.as_ref().unwrap(), r.problem.as_ref().unwrap());
                invalid += check_both_routes(scene, problem, simple).is_err() as usize;
            }
        }
    }
    let raw = b.report.solution_length.unwrap();
    let simple = b.report.simplified_length.unwrap();
    let pass = improvement.mean >= 30.0 && lengthened == 0 && invalid == 0;
    verdict(
        6,
        "simplification improvement",
        pass,
        format!(
            "REVERSE-4 mean reduction {:.1}% (se {:.1}; raw {:.2} -> {:.2}); {lengthened} lengthened, {invalid} invalid of {checked}",
            improvement.mean, improvement.se, raw.mean, simple.mean
        ),
    );
    assert_eq!(lengthened, 0);
    assert_eq!(invalid, 0);
    assert!(improvement.mean >= 30.0, "mean reduction {:.1}%", improvement.mean);
}

#[test]
fn c07_ablation_direction() {
    let _g = exclusive();
    let ablated = &walled(true).report;
    let checked = &walled(false).report;
    let fa = ablated.feasible_fraction.unwrap_or(0.0);
    let fc = checked.feasible_fraction.unwrap_or(0.0);
    let pass = fa < fc && fc == 1.0;
    verdict(
        7,
        "ablation direction",
        pass,
        format!(
            "walled TRANSFORM-3: feasible {fa:.2} ablated ({} solved) vs {fc:.2} with checks ({} solved)",
            ablated.successes, checked.successes
        ),
    );
    assert!(fa < fc);
    assert_eq!(fc, 1.0);
}

#[test]
fn c08_end_to_end_validity() {
    let _g = exclusive();
    let mut total = 0;
    let mut failures = Vec::new();
    for b in all_batches() {
        for (scene, problem, sol) in emitted(b) {
            total += 1;
            if let Err(e) = check_both_routes(scene, problem, sol) {
                failures.push(e);
            }
        }
    }
    let pass = total > 0 && failures.is_empty();
    verdict(
        8,
        "end-to-end validity",
        pass,
        format!("{}/{total} emitted solutions valid", total - failures.len()),
    );
    assert!(total > 0);
    assert!(failures.is_empty(), "{failures:?}");
}

#[test]
fn c09_determinism() {
    let _g = exclusive();
    let first = reverse3();
    let again = batch(reverse3_config());
    let mut same = first
        .records
        .iter()
        .zip(&again.records)
        .filter(|(a, b)| a.metrics.same_outcome(&b.metrics) && a.solution == b.solution && a.simplified == b.simplified)
        .count();
    let mut compared = first.records.len();

    let cfg = reverse4_config();
    for i in [0, 7] {
        let a = &reverse4().records[i];
        let b = run_trial(&cfg, i);
        compared += 1;
        same +=
            (a.metrics.same_outcome(&b.metrics) && a.solution == b.solution && a.simplified == b.simplified) as usize;
    }
    let pass = same == compared;
    verdict(9, "determinism", pass, format!("{same}/{compared} reruns identical"));
    assert_eq!(same, compared);
}

#[test]
fn c10_motion_reversibility() {
    let _g = exclusive();
    let mut stored: Vec<(&SceneSpec, &Motion)> = Vec::new();
    for b in [reverse4(), walled(false)] {
        for (scene, _, sol) in emitted(b) {
            for step in &sol.steps {
                stored.extend(step.transit.iter().chain(&step.transfer).map(|m| (scene, m)));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let picked: Vec<_> = stored.choose_multiple(&mut rng, 100).collect();
    let ok = picked
        .iter()
        .filter(|(scene, m)| {
            let w = scene.world();
            let manip = Manipulator::new(scene.gripper.clone(), scene.workspace, MotionSettings::default());
            let r = m.reversed();
            r.context == m.context && r.first() == m.last() && manip.validate_motion(&w, &r)
        })
        .count();
    let pass = picked.len() == 100 && ok == 100;
    verdict(
        10,
        "motion reversibility",
        pass,
        format!(
            "{ok}/{} reversed motions revalidate (from {} stored)",
            picked.len(),
            stored.len()
        ),
    );
    assert_eq!(picked.len(), 100);
    assert_eq!(ok, 100);
}
