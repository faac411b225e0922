use stackplan::bench::{
    emit_report, run_batch, run_batch_records, BatchConfig, BatchReport, ReportFormat, TrialMetrics,
};
use stackplan::scenario::Family;

/// Single-pass mean and standard error, independent of the library's
/// two-pass computation.
fn welford(values: impl IntoIterator<Item = f64>) -> (f64, f64) {
    let (mut k, mut mean, mut m2) = (0.0, 0.0, 0.0);
    for v in values {
        k += 1.0;
        let d = v - mean;
        mean += d / k;
        m2 += d * (v - mean);
    }
    let se = if k > 1.0 { (m2 / (k - 1.0) / k).sqrt() } else { 0.0 };
    (mean, se)
}

fn synthetic(k: usize) -> TrialMetrics {
    if k % 5 == 4 {
        return TrialMetrics {
            seed: k as u64,
            solve_time: 60.0,
            node_count: 1000,
            ..TrialMetrics::default()
        };
    }
    let len = 6 + k % 7;
    let simple = (6 + k % 2).min(len);
    TrialMetrics {
        seed: k as u64,
        success: true,
        solve_time: 0.25 * k as f64,
        solution_length: Some(len),
        node_count: 10 + 3 * k,
        simplify_time: Some(0.01 * (k % 3) as f64),
        simplified_length: Some(simple),
        improvement: Some(100.0 * (len - simple) as f64 / len as f64),
        valid: Some(k % 10 != 3),
        ..TrialMetrics::default()
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * (1.0 + b.abs())
}

#[test]
fn three_lengths_by_hand() {
    let metrics = [6, 8, 10]
        .map(|l| TrialMetrics {
            success: true,
            solution_length: Some(l),
            ..TrialMetrics::default()
        })
        .to_vec();
    let s = BatchReport::from_metrics(metrics).solution_length.unwrap();
    // deviations -2, 0, 2: variance 4, sd 2
    assert_eq!(s.mean, 8.0);
    assert!(close(s.se, 2.0 / 3f64.sqrt()));
}

#[test]
fn csv_of_fifty_trials_matches_independent_statistics() {
    let metrics: Vec<TrialMetrics> = (0..50).map(synthetic).collect();
    let ok: Vec<&TrialMetrics> = metrics.iter().filter(|m| m.success).collect();
    assert_eq!(ok.len(), 40);

    let report = BatchReport::from_metrics(metrics.clone());
    let csv = emit_report(&report, ReportFormat::Csv);
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let row: Vec<f64> = lines.next().unwrap().split(',').map(|c| c.parse().unwrap()).collect();
    assert!(lines.next().is_none());
    assert_eq!(header.len(), row.len());
    let col = |name: &str| row[header.iter().position(|h| *h == name).unwrap()];

    assert!(close(col("success_rate"), 0.8));
    let expect: [(&str, Vec<f64>); 6] = [
        ("solve_time", ok.iter().map(|m| m.solve_time).collect()),
        (
            "solution_length",
            ok.iter().map(|m| m.solution_length.unwrap() as f64).collect(),
        ),
        ("node_count", ok.iter().map(|m| m.node_count as f64).collect()),
        ("simplify_time", ok.iter().map(|m| m.simplify_time.unwrap()).collect()),
        (
            "simplified_length",
            ok.iter().map(|m| m.simplified_length.unwrap() as f64).collect(),
        ),
        ("improvement", ok.iter().map(|m| m.improvement.unwrap()).collect()),
    ];
    for (name, values) in expect {
        let (mean, se) = welford(values);
        assert!(close(col(&format!("{name}_mean")), mean), "{name} mean");
        assert!(close(col(&format!("{name}_se")), se), "{name} se");
    }
    // valid is false for k = 3, 13, 23, 33, 43
    assert!(close(col("feasible_fraction"), 35.0 / 40.0));

    let table = emit_report(&report, ReportFormat::Table);
    assert_eq!(table.lines().count(), 2);
    assert!(table.lines().next().unwrap().contains("simplified_length"));
}

#[test]
fn batches_are_valid_and_reproducible() {
    let cfg = BatchConfig {
        family: Family::Reverse,
        cubes: 3,
        trials: 2,
        master_seed: 40,
        ..BatchConfig::default()
    };
    let (a, records) = run_batch_records(&cfg).unwrap();
    assert_eq!(a.trials, 2);
    assert_eq!(a.success_rate, Some(1.0));
    for r in &records {
        assert_eq!(r.metrics.valid, Some(true));
        assert!(r.metrics.simplified_length <= r.metrics.solution_length);
    }
    assert_eq!(records[1].metrics.seed, 41);

    let b = run_batch(&BatchConfig {
        parallel_trials: true,
        ..cfg.clone()
    })
    .unwrap();
    for (x, y) in a.metrics.iter().zip(&b.metrics) {
        assert!(x.same_outcome(y), "{x:?} vs {y:?}");
    }
}

#[test]
fn ablated_batches_report_feasibility() {
    let cfg = BatchConfig {
        cubes: 3,
        trials: 2,
        ablate_motion_checks: true,
        ..BatchConfig::default()
    };
    let r = run_batch(&cfg).unwrap();
    for m in r.metrics.iter().filter(|m| m.success) {
        assert!(m.ablation_feasible.is_some());
        if m.ablation_feasible == Some(true) {
            assert_eq!(m.valid, Some(true));
        }
    }
    assert!(r.feasible_fraction.is_some());
}

#[test]
fn bad_batch_configs_are_rejected() {
    assert!(run_batch(&BatchConfig {
        trials: 0,
        ..BatchConfig::default()
    })
    .is_err());
    let r = run_batch(&BatchConfig {
        cubes: 1,
        ..BatchConfig::default()
    })
    .unwrap();
    assert_eq!(r.errors, 1);
    assert_eq!(r.success_rate, Some(0.0));
}
