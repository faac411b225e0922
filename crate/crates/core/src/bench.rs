//! Seeded trial batches over the generated problem families, with summary
//! statistics and table/CSV output.

use std::fmt::Write as _;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, InputError};
use crate::planner::{PlanOutcome, Planner, PlannerConfig, Solution};
use crate::scenario::{generate_problem_with, Family, GeneratorOptions, ProblemSpec, SceneSpec};

#[derive(Clone, Debug, PartialEq)]
pub struct BatchConfig {
    pub family: Family,
    pub cubes: usize,
    pub trials: usize,
    /// Seconds per trial.
    pub time_limit: f64,
    /// Trial `i` uses seed `master_seed + i` for both generation and
    /// planning.
    pub master_seed: u64,
    /// Search without motion planning, then try to plan the motions of the
    /// found solution afterwards.
    pub ablate_motion_checks: bool,
    pub simplify: bool,
    pub generator: GeneratorOptions,
    /// Sampling threads per trial.
    pub workers: usize,
    /// Run trials concurrently. Timings are then not comparable.
    pub parallel_trials: bool,
}

impl Default for BatchConfig {
    fn default() -> Self {
        Self {
            family: Family::Reverse,
            cubes: 3,
            trials: 1,
            time_limit: 60.0,
            master_seed: 0,
            ablate_motion_checks: false,
            simplify: true,
            generator: GeneratorOptions::default(),
            workers: 1,
            parallel_trials: false,
        }
    }
}

impl BatchConfig {
    pub fn validate(&self) -> Result<(), InputError> {
        if self.trials == 0 {
            return Err(InputError::new("trials must be at least 1"));
        }
        if !(self.time_limit > 0.0) {
            return Err(InputError::new("time_limit must be positive"));
        }
        if self.workers == 0 {
            return Err(InputError::new("workers must be at least 1"));
        }
        Ok(())
    }

    pub fn trial_seed(&self, i: usize) -> u64 {
        self.master_seed.wrapping_add(i as u64)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrialMetrics {
    pub seed: u64,
    pub success: bool,
    /// Seconds spent in the search.
    pub solve_time: f64,
    pub solution_length: Option<usize>,
    pub node_count: usize,
    pub simplify_time: Option<f64>,
    pub simplified_length: Option<usize>,
    /// Percent.
    pub improvement: Option<f64>,
    /// Whether motions could be planned for the solution afterwards; only
    /// set when motion checks were ablated.
    pub ablation_feasible: Option<bool>,
    /// Whether the final solution passed full validation.
    pub valid: Option<bool>,
    pub error: Option<String>,
}

impl TrialMetrics {
    /// Equality ignoring wall-clock times.
    pub fn same_outcome(&self, other: &TrialMetrics) -> bool {
        let strip = |m: &TrialMetrics| TrialMetrics {
            solve_time: 0.0,
            simplify_time: m.simplify_time.map(|_| 0.0),
            ..m.clone()
        };
        strip(self) == strip(other)
    }

    /// Whether the solution turned out executable: validated when searched
    /// with motion checks, feasible afterwards when ablated.
    pub fn feasible(&self) -> Option<bool> {
        if !self.success {
            return None;
        }
        self.ablation_feasible.or(self.valid)
    }
}

/// Everything a trial produced, for callers that need more than metrics.
#[derive(Clone, Debug)]
pub struct TrialRecord {
    pub metrics: TrialMetrics,
    pub scene: Option<SceneSpec>,
    pub problem: Option<ProblemSpec>,
    /// Search result; for ablated runs, with motions filled in when that
    /// succeeded.
    pub solution: Option<Solution>,
    pub simplified: Option<Solution>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    /// Sample standard deviation over √k; zero for a single value.
    pub se: f64,
    pub count: usize,
}

impl Stat {
    pub fn of(values: &[f64]) -> Option<Stat> {
        let k = values.len();
        if k == 0 {
            return None;
        }
        let mean = values.iter().sum::<f64>() / k as f64;
        let se = if k < 2 {
            0.0
        } else {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1) as f64;
            (var / k as f64).sqrt()
        };
        Some(Stat { mean, se, count: k })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BatchReport {
    pub trials: usize,
    pub successes: usize,
    pub errors: usize,
    pub success_rate: Option<f64>,
    pub solve_time: Option<Stat>,
    pub solution_length: Option<Stat>,
    pub node_count: Option<Stat>,
    pub simplify_time: Option<Stat>,
    pub simplified_length: Option<Stat>,
    pub improvement: Option<Stat>,
    /// Fraction of successful trials whose solution was executable.
    pub feasible_fraction: Option<f64>,
    pub metrics: Vec<TrialMetrics>,
}

impl BatchReport {
    /// Success rate over all trials; every other statistic over the
    /// successful ones.
    pub fn from_metrics(metrics: Vec<TrialMetrics>) -> Self {
        let ok: Vec<&TrialMetrics> = metrics.iter().filter(|m| m.success).collect();
        let stat =
            |f: &dyn Fn(&TrialMetrics) -> Option<f64>| Stat::of(&ok.iter().filter_map(|m| f(m)).collect::<Vec<_>>());
        let feasible: Vec<bool> = ok.iter().filter_map(|m| m.feasible()).collect();
        Self {
            trials: metrics.len(),
            successes: ok.len(),
            errors: metrics.iter().filter(|m| m.error.is_some()).count(),
            success_rate: (!metrics.is_empty()).then(|| ok.len() as f64 / metrics.len() as f64),
            solve_time: stat(&|m| Some(m.solve_time)),
            solution_length: stat(&|m| m.solution_length.map(|l| l as f64)),
            node_count: stat(&|m| Some(m.node_count as f64)),
            simplify_time: stat(&|m| m.simplify_time),
            simplified_length: stat(&|m| m.simplified_length.map(|l| l as f64)),
            improvement: stat(&|m| m.improvement),
            feasible_fraction: (!feasible.is_empty())
                .then(|| feasible.iter().filter(|f| **f).count() as f64 / feasible.len() as f64),
            metrics,
        }
    }
}

fn improvement(raw: usize, simplified: usize) -> Option<f64> {
    (raw > 0).then(|| 100.0 * (raw as f64 - simplified as f64) / raw as f64)
}

/// Runs trial `i` of the batch. Failures are recorded in the metrics.
pub fn run_trial(cfg: &BatchConfig, i: usize) -> TrialRecord {
    let seed = cfg.trial_seed(i);
    let mut rec = TrialRecord {
        metrics: TrialMetrics {
            seed,
            ..TrialMetrics::default()
        },
        scene: None,
        problem: None,
        solution: None,
        simplified: None,
    };
    if let Err(e) = trial(cfg, seed, &mut rec) {
        rec.metrics.success = false;
        rec.metrics.error = Some(e.to_string());
    }
    rec
}

fn trial(cfg: &BatchConfig, seed: u64, rec: &mut TrialRecord) -> Result<(), Error> {
    let (scene, mut problem) = generate_problem_with(cfg.family, cfg.cubes, seed, &cfg.generator)?;
    problem.time_limit = cfg.time_limit;
    let pcfg = PlannerConfig {
        time_limit: cfg.time_limit,
        seed,
        workers: cfg.workers,
        motion_checks: !cfg.ablate_motion_checks,
        ..PlannerConfig::default()
    };
    let planner = Planner::new(&scene, &pcfg)?;
    rec.scene = Some(scene);
    let m = &mut rec.metrics;

    let t = Instant::now();
    let outcome = planner.plan(&problem);
    m.solve_time = t.elapsed().as_secs_f64();
    let mut sol = match outcome? {
        PlanOutcome::Timeout(stats) => {
            m.node_count = stats.nodes();
            rec.problem = Some(problem);
            return Ok(());
        }
        PlanOutcome::Solved(sol) => sol,
    };
    m.success = true;
    m.node_count = sol.stats.nodes();
    m.solution_length = Some(sol.len());

    if cfg.ablate_motion_checks {
        match planner.complete_motions(&sol) {
            Some(full) => {
                m.ablation_feasible = Some(true);
                sol = full;
            }
            None => {
                m.ablation_feasible = Some(false);
                rec.solution = Some(sol);
                rec.problem = Some(problem);
                return Ok(());
            }
        }
    }

    if cfg.simplify {
        let t = Instant::now();
        let (simple, _) = planner.simplify(&sol, seed);
        m.simplify_time = Some(t.elapsed().as_secs_f64());
        m.simplified_length = Some(simple.len());
        m.improvement = improvement(sol.len(), simple.len());
        m.valid = Some(planner.validate_solution(&problem, &simple));
        rec.simplified = Some(simple);
    } else {
        m.valid = Some(planner.validate_solution(&problem, &sol));
    }
    rec.solution = Some(sol);
    rec.problem = Some(problem);
    Ok(())
}

/// Runs every trial and keeps the full records.
pub fn run_batch_records(cfg: &BatchConfig) -> Result<(BatchReport, Vec<TrialRecord>), InputError> {
    cfg.validate()?;
    let records: Vec<TrialRecord> = if cfg.parallel_trials && cfg.trials > 1 {
        let threads = std::thread::available_parallelism()
            .map_or(1, |n| n.get())
            .min(cfg.trials);
        let next = AtomicUsize::new(0);
        let slots: Mutex<Vec<Option<TrialRecord>>> = Mutex::new(vec![None; cfg.trials]);
        std::thread::scope(|s| {
            for _ in 0..threads {
                s.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    if i >= cfg.trials {
                        break;
                    }
                    let r = run_trial(cfg, i);
                    slots.lock().expect("no poisoned trials")[i] = Some(r);
                });
            }
        });
        slots
            .into_inner()
            .expect("no poisoned trials")
            .into_iter()
            .map(|r| r.expect("every trial ran"))
            .collect()
    } else {
        (0..cfg.trials).map(|i| run_trial(cfg, i)).collect()
    };
    let report = BatchReport::from_metrics(records.iter().map(|r| r.metrics.clone()).collect());
    Ok((report, records))
}

pub fn run_batch(cfg: &BatchConfig) -> Result<BatchReport, InputError> {
    run_batch_records(cfg).map(|(r, _)| r)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Table,
    Csv,
}

const COLUMNS: [&str; 7] = [
    "success_rate",
    "solve_time",
    "solution_length",
    "node_count",
    "simplify_time",
    "simplified_length",
    "improvement",
];

fn stats(r: &BatchReport) -> [Option<Stat>; 6] {
    [
        r.solve_time,
        r.solution_length,
        r.node_count,
        r.simplify_time,
        r.simplified_length,
        r.improvement,
    ]
}

/// Renders a report. Columns always appear in the order success rate,
/// solve time, solution length, node count, simplify time, simplified
/// length, improvement, followed by the feasible fraction; CSV splits each
/// statistic into `_mean` and `_se`. A report with no trials renders as
/// the header alone.
pub fn emit_report(r: &BatchReport, format: ReportFormat) -> String {
    let mut out = String::new();
    match format {
        ReportFormat::Csv => {
            let mut header = vec![COLUMNS[0].to_string()];
            for c in &COLUMNS[1..] {
                header.push(format!("{c}_mean"));
                header.push(format!("{c}_se"));
            }
            header.push("feasible_fraction".into());
            out.push_str(&header.join(","));
            out.push('\n');
            if r.trials == 0 {
                return out;
            }
            let mut row = vec![r.success_rate.map_or(String::new(), |v| v.to_string())];
            for s in stats(r) {
                match s {
                    Some(s) => {
                        row.push(s.mean.to_string());
                        row.push(s.se.to_string());
                    }
                    None => row.extend([String::new(), String::new()]),
                }
            }
            row.push(r.feasible_fraction.map_or(String::new(), |v| v.to_string()));
            out.push_str(&row.join(","));
            out.push('\n');
        }
        ReportFormat::Table => {
            let mut cells: Vec<String> = Vec::new();
            cells.push(r.success_rate.map_or("-".into(), |v| format!("{v:.2}")));
            for s in stats(r) {
                cells.push(s.map_or("-".into(), |s| format!("{:.2} ({:.2})", s.mean, s.se)));
            }
            cells.push(r.feasible_fraction.map_or("-".into(), |v| format!("{v:.2}")));
            let names: Vec<&str> = COLUMNS.iter().copied().chain(["feasible_fraction"]).collect();
            let widths: Vec<usize> = names.iter().zip(&cells).map(|(n, c)| n.len().max(c.len())).collect();
            let line = |items: &[&str]| {
                items
                    .iter()
                    .zip(&widths)
                    .map(|(s, w)| format!("{s:>w$}"))
                    .collect::<Vec<_>>()
                    .join("  ")
            };
            let _ = writeln!(out, "{}", line(&names));
            if r.trials > 0 {
                let cells: Vec<&str> = cells.iter().map(String::as_str).collect();
                let _ = writeln!(out, "{}", line(&cells));
            }
        }
    }
    out
}
