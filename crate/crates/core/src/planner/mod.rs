//! Bidirectional search over valid arrangements. Each tree edge moves one
//! object and is backed by simulated stability checks plus transit and
//! transfer motions for the gripper.

mod path;
mod simplify;
mod tree;

pub use path::reconstruct_path;
pub use simplify::SimplifyStats;
pub use tree::{ArrangementTree, RootKind, TreeEdge, Vertex};

use std::cell::RefCell;
use std::collections::{HashMap, VecDeque};
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::arrangement::{sample_arrangement, Arrangement, ArrangementKey, ObjectId, SamplerConfig};
use crate::error::{Error, InputError};
use crate::geometry::{pose_distance, Aabb, Pose};
use crate::manipulation::{GripperConfig, Manipulator, Motion, MotionKind, MotionSettings};
use crate::physics::SimWorld;
use crate::scenario::{ProblemSpec, SceneSpec};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlannerConfig {
    /// Wall-clock limit for the search, seconds.
    pub time_limit: f64,
    /// Meters per radian in pose and arrangement distances.
    pub rotation_weight: f64,
    pub seed: u64,
    /// Threads drawing arrangement samples.
    pub workers: usize,
    /// Plan transit and transfer motions while growing the trees. Turning
    /// this off leaves every edge without motions.
    pub motion_checks: bool,
    pub motion: MotionSettings,
    /// Redraws allowed per arrangement sample.
    pub sampler_attempts: usize,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            time_limit: 60.0,
            rotation_weight: 0.1,
            seed: 0,
            workers: 1,
            motion_checks: true,
            motion: MotionSettings::default(),
            sampler_attempts: SamplerConfig::default().max_attempts,
        }
    }
}

impl PlannerConfig {
    /// Defaults with the problem's seed and time limit.
    pub fn for_problem(problem: &ProblemSpec) -> Self {
        Self {
            time_limit: problem.time_limit,
            seed: problem.seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), InputError> {
        if !(self.time_limit > 0.0) {
            return Err(InputError::new("planner.time_limit must be positive"));
        }
        if !(self.rotation_weight > 0.0) {
            return Err(InputError::new("planner.rotation_weight must be positive"));
        }
        if self.workers == 0 {
            return Err(InputError::new("planner.workers must be at least 1"));
        }
        if self.sampler_attempts == 0 {
            return Err(InputError::new("planner.sampler_attempts must be at least 1"));
        }
        self.motion.validate()
    }
}

/// One pick-and-place of a solution: a transit to `pick`, then a transfer
/// carrying `object` to `place`, leaving `arrangement`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub object: ObjectId,
    pub pick: GripperConfig,
    pub place: GripperConfig,
    pub transit: Option<Motion>,
    pub transfer: Option<Motion>,
    pub arrangement: Arrangement,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PlanStats {
    pub iterations: usize,
    pub start_nodes: usize,
    pub goal_nodes: usize,
}

impl PlanStats {
    pub fn nodes(&self) -> usize {
        self.start_nodes + self.goal_nodes
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub start: Arrangement,
    pub home: GripperConfig,
    pub steps: Vec<Step>,
    pub stats: PlanStats,
}

impl Solution {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn final_arrangement(&self) -> &Arrangement {
        self.steps.last().map_or(&self.start, |s| &s.arrangement)
    }

    /// Arrangement before each step.
    pub fn befores(&self) -> impl Iterator<Item = &Arrangement> {
        std::iter::once(&self.start)
            .chain(self.steps.iter().map(|s| &s.arrangement))
            .take(self.steps.len())
    }

    /// True when every step carries both of its motions.
    pub fn has_motions(&self) -> bool {
        self.steps.iter().all(|s| s.transit.is_some() && s.transfer.is_some())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum PlanOutcome {
    Solved(Solution),
    Timeout(PlanStats),
}

/// Result of [`Planner::search`]: the outcome and the start and goal trees.
pub struct Search {
    pub outcome: PlanOutcome,
    pub trees: [ArrangementTree; 2],
}

/// Vertex of the other tree that a connection aims at.
#[derive(Clone, Debug)]
pub struct ConnectTarget {
    pub arrangement: Arrangement,
    pub preceding: Option<GripperConfig>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExtendOutcome {
    /// No object could move.
    Stalled,
    /// Last vertex added.
    Advanced(usize),
    /// The target was reached and joined. `junction` runs from the
    /// start-side to the goal-side gripper configuration; it is absent when
    /// the goal side is the goal root or motions are disabled.
    Connected { vertex: usize, junction: Option<Motion> },
}

#[derive(Clone, Debug, PartialEq)]
pub enum ConnectOutcome {
    Stalled,
    Connected { vertex: usize, junction: Option<Motion> },
}

/// Search context for one scene: simulator, gripper, settings and a memo of
/// stability results.
pub struct Planner {
    pub world: SimWorld,
    pub manipulator: Manipulator,
    pub config: PlannerConfig,
    pub workspace: Aabb,
    stability: RefCell<HashMap<ArrangementKey, bool>>,
}

impl Planner {
    pub fn new(scene: &SceneSpec, config: &PlannerConfig) -> Result<Self, InputError> {
        scene.validate()?;
        config.validate()?;
        let mut settings = config.motion.clone();
        settings.rotation_weight = config.rotation_weight;
        Ok(Self {
            world: scene.world(),
            manipulator: Manipulator::new(scene.gripper.clone(), scene.workspace, settings),
            config: config.clone(),
            workspace: scene.workspace,
            stability: RefCell::new(HashMap::new()),
        })
    }

    pub fn is_stable(&self, a: &Arrangement) -> bool {
        let key = a.key();
        if let Some(s) = self.stability.borrow().get(&key) {
            return *s;
        }
        let s = self.world.check_stable(a);
        self.stability.borrow_mut().insert(key, s);
        s
    }

    pub fn is_valid(&self, a: &Arrangement) -> bool {
        self.world.collision_free(a) && self.is_stable(a)
    }

    fn sample_batch(&self, rng: &mut ChaCha8Rng) -> Result<Vec<Arrangement>, Error> {
        let seeds: Vec<u64> = (0..self.config.workers).map(|_| rng.random()).collect();
        let cfg = SamplerConfig {
            max_attempts: self.config.sampler_attempts,
        };
        let draw = |seed: u64| {
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            sample_arrangement(&self.world, &self.workspace, &mut r, &cfg)
        };
        if seeds.len() == 1 {
            return Ok(vec![draw(seeds[0])?]);
        }
        let world = &self.world;
        let workspace = &self.workspace;
        std::thread::scope(|s| {
            let handles: Vec<_> = seeds
                .iter()
                .map(|&seed| {
                    let cfg = cfg.clone();
                    s.spawn(move || {
                        let mut r = ChaCha8Rng::seed_from_u64(seed);
                        sample_arrangement(world, workspace, &mut r, &cfg)
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("sampler thread panicked"))
                .collect()
        })
    }

    /// Empty-gripper motion joining the two trees, oriented start side to
    /// goal side. `None` when it cannot be planned; `Some(None)` when no
    /// motion is needed.
    fn junction_transit<R: Rng + ?Sized>(
        &self,
        a: &Arrangement,
        start_side: Option<&GripperConfig>,
        goal_side: Option<&GripperConfig>,
        rng: &mut R,
    ) -> Option<Option<Motion>> {
        let (Some(s), Some(g)) = (start_side, goal_side) else {
            return Some(None);
        };
        if !self.config.motion_checks {
            return Some(None);
        }
        match self
            .manipulator
            .plan_transit(&self.world, a, &s.released(), &g.released(), rng)
        {
            Ok(Some(m)) => Some(Some(m)),
            _ => None,
        }
    }

    /// Grows `tree` from vertex `from` toward `target`, one object at a time
    /// in random order. With a connect target, reaching it also requires the
    /// junction transit.
    pub fn extend<R: Rng + ?Sized>(
        &self,
        tree: &mut ArrangementTree,
        from: usize,
        target: &Arrangement,
        connect: Option<&ConnectTarget>,
        rng: &mut R,
    ) -> ExtendOutcome {
        let mut order: Vec<ObjectId> = target.objects().collect();
        order.shuffle(rng);
        let mut cur = from;
        for o in order {
            let current = tree.arrangement(cur);
            let Some(&pose) = target.get(o) else { continue };
            if current.get(o) == Some(&pose) {
                continue;
            }
            let next = current.with(o, pose);
            if !self.world.collision_free(&next)
                || !self.is_stable(&current.without(o))
                || !self.is_stable(&next.without(o))
                || !self.is_stable(&next)
            {
                continue;
            }
            let Some((pick, place)) = self.manipulator.sample_grasp_confs(&self.world, current, &next, o, rng) else {
                continue;
            };
            let (transit, transfer) = if self.config.motion_checks {
                let transit = match &tree.vertices[cur].preceding {
                    None => None,
                    Some(prev) => {
                        match self.manipulator.plan_transit(
                            &self.world,
                            current,
                            &prev.released(),
                            &pick.released(),
                            rng,
                        ) {
                            Ok(Some(m)) => Some(m),
                            _ => continue,
                        }
                    }
                };
                match self
                    .manipulator
                    .plan_transfer(&self.world, current, o, &pick, &place, &next, rng)
                {
                    Ok(Some(m)) => (transit, Some(m)),
                    _ => continue,
                }
            } else {
                (None, None)
            };
            let edge = TreeEdge {
                parent: cur,
                child: 0,
                object: o,
                pick,
                place,
                transit,
                transfer,
            };
            if let Some(c) = connect.filter(|c| c.arrangement == next) {
                let junction = match tree.kind {
                    RootKind::Start => self.junction_transit(&next, Some(&place), c.preceding.as_ref(), rng),
                    RootKind::Goal => self.junction_transit(&next, c.preceding.as_ref(), Some(&place), rng),
                };
                if let Some(junction) = junction {
                    let vertex = tree.add(edge, next);
                    return ExtendOutcome::Connected { vertex, junction };
                }
                continue;
            }
            cur = tree.add(edge, next);
        }
        if cur == from {
            ExtendOutcome::Stalled
        } else {
            ExtendOutcome::Advanced(cur)
        }
    }

    /// Repeatedly extends the vertex of `tree` nearest to the target until
    /// the target is joined or an extension stalls.
    pub fn connect<R: Rng + ?Sized>(
        &self,
        tree: &mut ArrangementTree,
        target: &ConnectTarget,
        deadline: Instant,
        rng: &mut R,
    ) -> ConnectOutcome {
        loop {
            if Instant::now() >= deadline {
                return ConnectOutcome::Stalled;
            }
            let near = tree.nearest(&target.arrangement);
            if tree.arrangement(near) == &target.arrangement {
                let mine = tree.vertices[near].preceding;
                let junction = match tree.kind {
                    RootKind::Start => {
                        self.junction_transit(&target.arrangement, mine.as_ref(), target.preceding.as_ref(), rng)
                    }
                    RootKind::Goal => {
                        self.junction_transit(&target.arrangement, target.preceding.as_ref(), mine.as_ref(), rng)
                    }
                };
                return match junction {
                    Some(junction) => ConnectOutcome::Connected { vertex: near, junction },
                    None => ConnectOutcome::Stalled,
                };
            }
            match self.extend(tree, near, &target.arrangement, Some(target), rng) {
                ExtendOutcome::Stalled => return ConnectOutcome::Stalled,
                ExtendOutcome::Advanced(_) => {}
                ExtendOutcome::Connected { vertex, junction } => return ConnectOutcome::Connected { vertex, junction },
            }
        }
    }

    fn check_problem(&self, problem: &ProblemSpec) -> Result<GripperConfig, InputError> {
        for (label, a) in [("start", &problem.start), ("goal", &problem.goal)] {
            if !self.world.check_collision(a)? {
                return Err(InputError::new(format!("problem.{label} arrangement is in collision")));
            }
            if !self.is_stable(a) {
                return Err(InputError::new(format!("problem.{label} arrangement is not stable")));
            }
        }
        let home = GripperConfig::free(problem.home);
        if !self.manipulator.config_valid(&self.world, &problem.start, &home) {
            return Err(InputError::new("problem.home collides with the start arrangement"));
        }
        Ok(home)
    }

    /// Runs the search until the trees connect or the time limit passes.
    pub fn plan(&self, problem: &ProblemSpec) -> Result<PlanOutcome, Error> {
        self.search(problem).map(|s| s.outcome)
    }

    /// [`Planner::plan`], also returning both trees as they stood at the end.
    pub fn search(&self, problem: &ProblemSpec) -> Result<Search, Error> {
        let home = self.check_problem(problem)?;
        let w = self.config.rotation_weight;
        let mut trees = [
            ArrangementTree::new(RootKind::Start, problem.start.clone(), Some(home), w),
            ArrangementTree::new(RootKind::Goal, problem.goal.clone(), None, w),
        ];
        if problem.start == problem.goal {
            let outcome = PlanOutcome::Solved(Solution {
                start: problem.start.clone(),
                home,
                steps: Vec::new(),
                stats: PlanStats {
                    iterations: 0,
                    start_nodes: 1,
                    goal_nodes: 1,
                },
            });
            return Ok(Search { outcome, trees });
        }
        let deadline = Instant::now() + Duration::from_secs_f64(self.config.time_limit);
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        let mut samples: VecDeque<Arrangement> = VecDeque::new();
        let mut iterations = 0;
        let mut a = 0;
        while Instant::now() < deadline {
            iterations += 1;
            if samples.is_empty() {
                samples.extend(self.sample_batch(&mut rng)?);
            }
            let target = samples.pop_front().expect("batch is non-empty");
            let [t0, t1] = &mut trees;
            let (ta, tb) = if a == 0 { (t0, t1) } else { (t1, t0) };
            let near = ta.nearest(&target);
            if let ExtendOutcome::Advanced(v) = self.extend(ta, near, &target, None, &mut rng) {
                let reached = ConnectTarget {
                    arrangement: ta.arrangement(v).clone(),
                    preceding: ta.vertices[v].preceding,
                };
                if let ConnectOutcome::Connected { vertex, junction } = self.connect(tb, &reached, deadline, &mut rng) {
                    let (st, sv, gt, gv) = match ta.kind {
                        RootKind::Start => (&*ta, v, &*tb, vertex),
                        RootKind::Goal => (&*tb, vertex, &*ta, v),
                    };
                    let stats = PlanStats {
                        iterations,
                        start_nodes: st.len(),
                        goal_nodes: gt.len(),
                    };
                    let outcome = PlanOutcome::Solved(reconstruct_path(st, sv, gt, gv, junction, home, stats));
                    return Ok(Search { outcome, trees });
                }
            }
            a = 1 - a;
        }
        let outcome = PlanOutcome::Timeout(PlanStats {
            iterations,
            start_nodes: trees[0].len(),
            goal_nodes: trees[1].len(),
        });
        Ok(Search { outcome, trees })
    }

    /// Plans every missing transit and transfer of `sol` in order. `None`
    /// when any of them is infeasible.
    pub fn complete_motions(&self, sol: &Solution) -> Option<Solution> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed ^ 0x5eed_f111);
        let mut out = sol.clone();
        let mut prev = sol.home;
        let befores: Vec<Arrangement> = sol.befores().cloned().collect();
        for (step, before) in out.steps.iter_mut().zip(&befores) {
            if step.transit.is_none() {
                let m = self.manipulator.plan_transit(
                    &self.world,
                    before,
                    &prev.released(),
                    &step.pick.released(),
                    &mut rng,
                );
                step.transit = Some(m.ok()??);
            }
            if step.transfer.is_none() {
                let m = self.manipulator.plan_transfer(
                    &self.world,
                    before,
                    step.object,
                    &step.pick,
                    &step.place,
                    &step.arrangement,
                    &mut rng,
                );
                step.transfer = Some(m.ok()??);
            }
            prev = step.place;
        }
        Some(out)
    }

    /// Replays a solution: every arrangement valid, each move changes one
    /// object and leaves both sides stable without it, grasps put the object
    /// where the arrangements say, motions chain up and re-validate, and the
    /// last arrangement is the goal.
    pub fn validate_solution(&self, problem: &ProblemSpec, sol: &Solution) -> bool {
        self.validation_error(problem, sol).is_none()
    }

    /// First problem found by [`Planner::validate_solution`], if any.
    pub fn validation_error(&self, problem: &ProblemSpec, sol: &Solution) -> Option<String> {
        if sol.start != problem.start {
            return Some("solution does not begin at the start arrangement".into());
        }
        if sol.home.pose != problem.home || sol.home.held.is_some() {
            return Some("solution does not begin at the home configuration".into());
        }
        if !self.is_valid(&sol.start) {
            return Some("start arrangement is invalid".into());
        }
        let close = |a: &Pose, b: &Pose| pose_distance(a, b, 1.0) <= 1e-9;
        let mut prev = sol.home;
        let mut before = &sol.start;
        for (k, step) in sol.steps.iter().enumerate() {
            let o = step.object;
            let after = &step.arrangement;
            let fail = |m: &str| Some(format!("step {k}: {m}"));
            let (Some(from), Some(to)) = (before.get(o), after.get(o)) else {
                return fail("moved object is missing");
            };
            if !after.same_objects(before) || before.with(o, *to) != *after {
                return fail("step changes something other than the moved object");
            }
            if !self.is_valid(after) {
                return fail("resulting arrangement is invalid");
            }
            if !self.is_stable(&before.without(o)) || !self.is_stable(&after.without(o)) {
                return fail("arrangement without the moved object is unstable");
            }
            if !matches!((step.pick.held, step.place.held), (Some(g), Some(h)) if g == h && g.object == o) {
                return fail("pick and place do not share a grasp of the moved object");
            }
            if !close(&step.pick.object_pose().unwrap(), from) || !close(&step.place.object_pose().unwrap(), to) {
                return fail("grasps do not match the object poses");
            }
            let Some(transit) = &step.transit else {
                return fail("missing transit motion");
            };
            let Some(transfer) = &step.transfer else {
                return fail("missing transfer motion");
            };
            if transit.kind != MotionKind::Transit
                || transit.context != *before
                || *transit.first() != prev.released()
                || *transit.last() != step.pick.released()
            {
                return fail("transit does not join the previous configuration to the pick");
            }
            if transfer.kind != MotionKind::Transfer
                || transfer.context != before.without(o)
                || *transfer.first() != step.pick
                || *transfer.last() != step.place
            {
                return fail("transfer does not join the pick to the place");
            }
            if !self.manipulator.validate_motion(&self.world, transit) {
                return fail("transit collides");
            }
            if !self.manipulator.validate_motion(&self.world, transfer) {
                return fail("transfer collides");
            }
            prev = step.place;
            before = after;
        }
        if *sol.final_arrangement() != problem.goal {
            return Some("solution does not end at the goal arrangement".into());
        }
        None
    }
}

/// Plans a problem from scratch.
pub fn plan(scene: &SceneSpec, problem: &ProblemSpec, config: &PlannerConfig) -> Result<PlanOutcome, Error> {
    problem.validate(scene)?;
    Planner::new(scene, config)?.plan(problem)
}

/// Re-validates a solution with a fresh simulator state.
pub fn validate_solution(scene: &SceneSpec, problem: &ProblemSpec, sol: &Solution, config: &PlannerConfig) -> bool {
    match Planner::new(scene, config) {
        Ok(p) => p.validate_solution(problem, sol),
        Err(_) => false,
    }
}
