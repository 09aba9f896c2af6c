use std::collections::BTreeSet;

use speclab_core::geometry::Domain;
use speclab_core::harness::{run_suite, Corruption, SuiteConfig, Verdict};
use speclab_core::problems::ProblemKind;

#[test]
fn disk_suite_passes_with_unique_names() {
    let report = run_suite(&SuiteConfig::new(Domain::disk(1.0).unwrap(), vec![2, 3]));
    assert_eq!(report.summary.failed, 0, "{:?}", report.failures().collect::<Vec<_>>());
    assert_eq!(report.reports.len(), 2);
    let first: Vec<&str> = report.reports[0].checks.iter().map(|c| c.name.as_str()).collect();
    for r in &report.reports {
        let names: BTreeSet<&str> = r.checks.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(names.len(), r.checks.len(), "duplicate check names");
        assert_eq!(r.checks.iter().map(|c| c.name.as_str()).collect::<Vec<_>>(), first);
        for c in &r.checks {
            if c.verdict == Verdict::Skipped {
                assert!(c.reason.as_deref().is_some_and(|s| !s.is_empty()), "{}", c.name);
            }
        }
    }
}

#[test]
fn curved_metric_gates_flat_only_checks() {
    let report = run_suite(&SuiteConfig::new(Domain::spherical_cap(0.5, 1.0).unwrap(), vec![2]));
    assert_eq!(report.summary.failed, 0);
    let r = &report.reports[0];
    for c in r.checks.iter().filter(|c| c.name.starts_with("planar_") || c.name.starts_with("centroid_")) {
        assert_eq!(c.verdict, Verdict::Skipped, "{}", c.name);
    }
}

#[test]
fn corrupted_eigenvalue_is_reported() {
    let mut config = SuiteConfig::new(Domain::disk(1.0).unwrap(), vec![2]);
    config.corruption = Some(Corruption { kind: ProblemKind::Buckling, index: 1, factor: 0.5 });
    let report = run_suite(&config);
    assert!(report.summary.failed > 0);
    assert!(report.failures().any(|(_, c)| c.name.starts_with("lambda_lower_eta") || c.name.starts_with("field_buckling")));
}

/// Over the default suite levels.
#[test]
fn slack_does_not_degrade_under_refinement() {
    let config = SuiteConfig::new(Domain::square(1.0).unwrap(), vec![3, 4]);
    let report = run_suite(&config);
    assert_eq!(report.summary.failed, 0);
    for pair in report.reports.windows(2) {
        for (a, b) in pair[0].checks.iter().zip(&pair[1].checks) {
            if a.verdict != Verdict::Pass || b.verdict != Verdict::Pass || !a.ratio.is_finite() || !b.ratio.is_finite() {
                continue;
            }
            // the same per-side widening the verdicts use
            let tolerance = config.slack * (a.lhs.abs() + a.rhs.abs());
            assert!(b.slack >= a.slack - tolerance, "{}: {} -> {}", a.name, a.slack, b.slack);
        }
    }
}
