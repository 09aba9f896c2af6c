//! Acceptance criteria, one PASS/FAIL line each. Runs as a plain binary so
//! the lines show up in the `cargo test` log; exits nonzero if any fails.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::Instant;

use speclab_cli::config::RunConfig;
use speclab_cli::{execute, Command};
use speclab_core::constants::{c0, c1, c2, h_kappa, riccati_residual, ComparisonConstants, CurvatureData};
use speclab_core::eigen::SolverOptions;
use speclab_core::geometry::Domain;
use speclab_core::harness::{run_suite, SuiteConfig, SuiteReport, Verdict};
use speclab_core::problems::{solve, Discretization, ProblemKind, SpectralResult};
use speclab_core::rellich::{
    boundary_formula_buckling, boundary_formula_clamped, refinement_slope, QuadratureOptions, Scenario,
};
use speclab_oracle::{
    bessel_j_prime_zero, bessel_j_zero, buckling_disk, clamped_disk, grid_constants, rectangle_dirichlet,
    rectangle_neumann, RadialMode,
};

/// Refinement levels of the convergence studies; the last is the finest
/// shipped mesh.
const LEVELS: [usize; 4] = [2, 3, 4, 5];
const MAX_DOFS: usize = 30_000;
/// Levels of the inequality suite runs.
const SUITE_LEVELS: [usize; 2] = [3, 4];

struct Outcome {
    pass: bool,
    detail: String,
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn spectra(domain: &Domain, level: usize, kinds: &[ProblemKind], k: usize) -> (usize, Vec<SpectralResult>) {
    let mesh = domain.mesh(level).expect("mesh");
    let disc = Discretization::new(domain, &mesh, 2, 4).expect("discretization");
    let opts = SolverOptions::default();
    let results = kinds.iter().map(|&kind| solve(kind, &disc, k, &opts).expect("solve")).collect();
    (disc.dof_count(), results)
}

/// Error at the finest level and observed order over the level sequence.
fn study(name: &str, values: &[f64], exact: f64, tol: f64, min_order: f64, lines: &mut Vec<String>) -> bool {
    let errors: Vec<f64> = values.iter().map(|v| rel(*v, exact)).collect();
    let order = refinement_slope(&errors);
    let finest = *errors.last().unwrap();
    let ok = finest <= tol && order.is_some_and(|o| o >= min_order);
    lines.push(format!(
        "{name} = {:.6} vs {exact:.6}: error {finest:.2e}, order {}",
        values.last().unwrap(),
        order.map_or("-".into(), |o| format!("{o:.2}"))
    ));
    ok
}

fn criterion_1() -> Outcome {
    let j01 = bessel_j_zero(0, 1).powi(2);
    let j11 = bessel_j_zero(1, 1).powi(2);
    let jp11 = bessel_j_prime_zero(1, 1).powi(2);
    let kinds = [ProblemKind::Dirichlet, ProblemKind::Neumann, ProblemKind::Steklov];
    let disk = Domain::disk(1.0).unwrap();
    let square = Domain::square(1.0).unwrap();
    let mut series: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    let mut max_dofs = 0;
    let mut sigma_one = 0f64;
    for level in LEVELS {
        let (dofs, r) = spectra(&disk, level, &kinds, 5);
        max_dofs = max_dofs.max(dofs);
        for (name, v) in [
            ("disk lambda_1", r[0].value(1)),
            ("disk lambda_2", r[0].value(2)),
            ("disk lambda_3", r[0].value(3)),
            ("disk mu_2", r[1].value(2)),
            ("disk sigma_2", r[2].value(2)),
            ("disk sigma_3", r[2].value(3)),
            ("disk sigma_4", r[2].value(4)),
            ("disk sigma_5", r[2].value(5)),
        ] {
            series.entry(name).or_default().push(v);
        }
        sigma_one = sigma_one.max(r[2].value(1).abs());
        let (dofs, r) = spectra(&square, level, &kinds[..2], 2);
        max_dofs = max_dofs.max(dofs);
        series.entry("square lambda_1").or_default().push(r[0].value(1));
        series.entry("square mu_2").or_default().push(r[1].value(2));
    }
    let exact = BTreeMap::from([
        ("disk lambda_1", j01),
        ("disk lambda_2", j11),
        ("disk lambda_3", j11),
        ("disk mu_2", jp11),
        ("disk sigma_2", 1.0),
        ("disk sigma_3", 1.0),
        ("disk sigma_4", 2.0),
        ("disk sigma_5", 2.0),
        ("square lambda_1", rectangle_dirichlet(1.0, 1.0, 1)[0]),
        ("square mu_2", rectangle_neumann(1.0, 1.0, 2)[1]),
    ]);
    let mut lines = Vec::new();
    let mut pass = max_dofs <= MAX_DOFS && sigma_one <= 1e-8;
    for (name, values) in &series {
        pass &= study(name, values, exact[name], 5e-3, 1.8, &mut lines);
    }
    lines.push(format!("disk sigma_1 max |value| {sigma_one:.1e}; finest mesh {max_dofs} dofs"));
    Outcome { pass, detail: lines.join("; ") }
}

fn criterion_2() -> Outcome {
    let disk = Domain::disk(1.0).unwrap();
    let level = *LEVELS.last().unwrap();
    let kinds = [ProblemKind::Bsteklov1, ProblemKind::Buckling, ProblemKind::Clamped];
    let (_, r) = spectra(&disk, level, &kinds, 1);
    let checks = [
        ("eta_1", r[0].value(1), 2.0),
        ("Lambda_1", r[1].value(1), buckling_disk(RadialMode { m: 0, root: 1 })),
        ("Gamma_1^2", r[2].value(1), clamped_disk(RadialMode { m: 0, root: 1 })),
    ];
    let j11 = bessel_j_zero(1, 1).powi(2);
    let mut pass = rel(checks[1].2, j11) < 1e-8;
    let mut lines = Vec::new();
    for (name, v, exact) in checks {
        let e = rel(v, exact);
        pass &= e <= 2e-2;
        lines.push(format!("{name} = {v:.6} vs {exact:.6} (error {e:.2e})"));
    }
    Outcome { pass, detail: lines.join("; ") }
}

fn criterion_3() -> Outcome {
    let q = QuadratureOptions::default();
    let mut pass = true;
    let mut lines = Vec::new();
    for s in [Scenario::SineSquare, Scenario::QuarticSquare, Scenario::LinearPairSquare] {
        let mut worst = 0f64;
        let mut worst_abs = 0f64;
        for level in LEVELS {
            let r = s.run(level, &q).expect("scenario");
            worst = worst.max(r.relative_residual);
            worst_abs = worst_abs.max(r.residual);
        }
        if s == Scenario::LinearPairSquare {
            // every term vanishes identically, so only the absolute residual is meaningful
            pass &= worst_abs <= 1e-10;
            lines.push(format!("{}: max |residual| {worst_abs:.1e}", s.name()));
        } else {
            pass &= worst <= 1e-8;
            lines.push(format!("{}: max relative residual {worst:.1e}", s.name()));
        }
    }
    let residuals: Vec<f64> = LEVELS.iter().map(|&l| Scenario::SaddleDiskLambda.run(l, &q).unwrap().relative_residual).collect();
    let slope = refinement_slope(&residuals);
    pass &= slope.is_some_and(|s| s >= 1.8);
    lines.push(format!(
        "{} residuals {:?} slope {}",
        Scenario::SaddleDiskLambda.name(),
        residuals.iter().map(|r| format!("{r:.2e}")).collect::<Vec<_>>(),
        slope.map_or("-".into(), |s| format!("{s:.2}"))
    ));
    let floor = LEVELS.iter().map(|&l| Scenario::SaddleDisk.run(l, &q).unwrap().relative_residual).fold(0f64, f64::max);
    lines.push(format!("{} (lambda = 0) at roundoff: max {floor:.1e}", Scenario::SaddleDisk.name()));
    Outcome { pass, detail: lines.join("; ") }
}

fn criterion_4() -> Outcome {
    let level = *LEVELS.last().unwrap();
    let mut pass = true;
    let mut lines = Vec::new();
    for (domain, tol) in [(Domain::disk(1.0).unwrap(), 2e-2), (Domain::square(1.0).unwrap(), 3e-2)] {
        let mesh = domain.mesh(level).unwrap();
        let disc = Discretization::new(&domain, &mesh, 2, 4).unwrap();
        let opts = SolverOptions::default();
        let b = solve(ProblemKind::Buckling, &disc, 1, &opts).unwrap();
        let c = solve(ProblemKind::Clamped, &disc, 1, &opts).unwrap();
        for (what, rows) in [("Lambda_1", boundary_formula_buckling(&disc, &b)), ("Gamma_1^2", boundary_formula_clamped(&disc, &c))] {
            match rows {
                Ok(rows) => {
                    let r = &rows[0];
                    pass &= (r.ratio - 1.0).abs() <= tol;
                    lines.push(format!("{} {what}: formula/solver {:.5}", domain.name, r.ratio));
                }
                Err(e) => {
                    pass = false;
                    lines.push(format!("{} {what}: {e}", domain.name));
                }
            }
        }
    }
    Outcome { pass, detail: lines.join("; ") }
}

fn corpus() -> Vec<Domain> {
    vec![
        Domain::disk(1.0).unwrap(),
        Domain::square(1.0).unwrap(),
        Domain::rectangle(2.0, 1.0).unwrap(),
        Domain::ellipse(2.0, 1.0).unwrap(),
        Domain::blob().unwrap(),
        Domain::hyperbolic_disk(1.0, -1.0).unwrap(),
        Domain::spherical_cap(0.5, 1.0).unwrap(),
    ]
}

fn criterion_5() -> Outcome {
    let mut pass = true;
    let mut lines = Vec::new();
    for domain in corpus() {
        let report = run_suite(&SuiteConfig::new(domain.clone(), SUITE_LEVELS.to_vec()));
        let s = report.summary;
        let other_skips: Vec<String> = report
            .reports
            .iter()
            .flat_map(|r| r.checks.iter())
            .filter(|c| c.verdict == Verdict::Skipped && !c.reason.as_deref().unwrap_or("").starts_with("hypothesis not met"))
            .map(|c| format!("{}: {}", c.name, c.reason.clone().unwrap_or_default()))
            .collect();
        pass &= s.failed == 0 && s.passed > 0 && other_skips.is_empty();
        let failures: Vec<String> = report.failures().map(|(l, c)| format!("L{l} {}", c.name)).collect();
        lines.push(format!(
            "{}: {} pass, {} gated, {} fail{}{}",
            domain.name,
            s.passed,
            s.skipped,
            s.failed,
            if failures.is_empty() { String::new() } else { format!(" [{}]", failures.join(", ")) },
            if other_skips.is_empty() { String::new() } else { format!(" non-gating skips [{}]", other_skips.join(", ")) }
        ));
    }
    Outcome { pass, detail: lines.join("; ") }
}

fn criterion_6() -> Outcome {
    const TUPLES: [(usize, f64, f64, f64); 12] = [
        (2, 0.0, 0.0, 1.0),
        (3, 0.0, 0.0, 2.5),
        (4, 0.0, 0.0, 0.3),
        (2, -1.0, -1.0, 1.0),
        (3, -4.0, -0.5, 0.8),
        (2, -0.25, 0.0, 3.0),
        (2, 1.0, 1.0, 0.5),
        (3, 0.5, 2.0, 1.0),
        (2, 0.0, 4.0, 0.7),
        (2, -1.0, 1.0, 0.3),
        (3, -2.0, 0.5, 1.2),
        (5, -0.1, 3.0, 0.9),
    ];
    let mut worst_grid = 0f64;
    for (n, k1, k2, r) in TUPLES {
        let c = ComparisonConstants::evaluate(CurvatureData::new(n, k1, k2, r).unwrap());
        let g = grid_constants(n, k1, k2, r, 10_000);
        for (a, b) in [c.c0, c.c1, c.c2, c.c3].iter().zip(g) {
            worst_grid = worst_grid.max((a - b).abs());
        }
    }
    let mut worst_riccati = 0f64;
    for (n, kappa, limit) in [(2, 0.0, 5.0), (3, -1.0, 5.0), (2, 1.0, 3.0), (4, -0.3, 5.0), (2, 4.0, 1.5)] {
        for i in 1..=100 {
            let r = limit * i as f64 / 101.0;
            let h = h_kappa(n, kappa, r).unwrap() / (n - 1) as f64;
            worst_riccati = worst_riccati.max(riccati_residual(n, kappa, r).unwrap().abs() / (1.0 + h * h));
        }
    }
    let flat = CurvatureData::constant(2, 0.0, 1.0).unwrap();
    let exact = (c0(2, 0.0, 1.0), c1(&flat), c2(&flat));
    let c2_general: Vec<f64> = (2..6).map(|n| c2(&CurvatureData::constant(n, 0.0, 1.0).unwrap()) - (n as f64 - 2.0)).collect();
    let pass = worst_grid <= 1e-9 && worst_riccati <= 1e-6 && exact == (2.0, 2.0, 0.0) && c2_general.iter().all(|&d| d == 0.0);
    Outcome {
        pass,
        detail: format!(
            "grid max deviation {worst_grid:.1e} over 12 tuples; Riccati max {worst_riccati:.1e}; flat n=2 (C0, C1, C2) = {exact:?}; C2 = n - 2 for n = 2..5"
        ),
    }
}

/// Check ratio keyed by level and name; rows whose two sides are both
/// (snapped) zero get ratio 1 so they compare equal.
fn ratios(report: &SuiteReport) -> BTreeMap<(usize, String), (f64, Verdict)> {
    report
        .reports
        .iter()
        .flat_map(|r| {
            r.checks.iter().map(move |c| {
                let ratio = if c.lhs == 0.0 && c.rhs == 0.0 { 1.0 } else { c.ratio };
                ((r.level, c.name.clone()), (ratio, c.verdict))
            })
        })
        .collect()
}

fn criterion_7() -> Outcome {
    let one = run_suite(&SuiteConfig::new(Domain::disk(1.0).unwrap(), SUITE_LEVELS.to_vec()));
    let two = run_suite(&SuiteConfig::new(Domain::disk(2.0).unwrap(), SUITE_LEVELS.to_vec()));
    let (a, b) = (ratios(&one), ratios(&two));
    let mut pass = a.len() == b.len() && !a.is_empty();
    let mut worst = 0f64;
    let mut compared = 0;
    let mut mismatched = Vec::new();
    for (key, (ra, va)) in &a {
        let Some((rb, vb)) = b.get(key) else {
            mismatched.push(format!("L{} {} missing", key.0, key.1));
            continue;
        };
        if va != vb {
            mismatched.push(format!("L{} {} {} vs {}", key.0, key.1, va.as_str(), vb.as_str()));
        }
        if *va != Verdict::Pass {
            continue;
        }
        let d = if ra == rb { 0.0 } else { (ra - rb).abs() / ra.abs().max(rb.abs()) };
        if d.is_finite() {
            worst = worst.max(d);
            compared += 1;
        } else {
            mismatched.push(format!("L{} {} ratio {ra} vs {rb}", key.0, key.1));
        }
    }
    pass &= worst <= 1e-2 && mismatched.is_empty();
    let mut detail = format!("{compared} ratios compared, max relative difference {worst:.2e}");
    if !mismatched.is_empty() {
        detail.push_str(&format!("; mismatches [{}]", mismatched.join(", ")));
    }
    Outcome { pass, detail }
}

fn criterion_8() -> Outcome {
    let config = RunConfig::default();
    let first = execute(&Command::CheckInequalities, &config).expect("first run");
    let second = execute(&Command::CheckInequalities, &config).expect("second run");
    let names: Vec<&str> = first.files.names().collect();
    let identical = names == second.files.names().collect::<Vec<_>>() && names.iter().all(|n| first.files.get(n) == second.files.get(n));
    let bytes: usize = names.iter().map(|n| first.files.get(n).map_or(0, |b| b.len())).sum();
    Outcome { pass: identical && !names.is_empty(), detail: format!("{} files, {bytes} bytes compared", names.len()) }
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("closed-form spectra on disk and square", criterion_1),
        ("biharmonic disk oracles", criterion_2),
        ("Rellich identities", criterion_3),
        ("plate boundary formulas", criterion_4),
        ("inequality suite on the domain corpus", criterion_5),
        ("comparison constants", criterion_6),
        ("scale covariance of the suite", criterion_7),
        ("deterministic check-inequalities reports", criterion_8),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (title, run)) in criteria.iter().enumerate() {
        let id = format!("criterion_{}", i + 1);
        if !filter.is_empty() && !filter.iter().any(|f| id.contains(f.as_str())) {
            continue;
        }
        let t = Instant::now();
        let outcome = run();
        if !outcome.pass {
            failed += 1;
        }
        println!(
            "acceptance {} {}: {} ({:.1}s) | {}",
            i + 1,
            if outcome.pass { "PASS" } else { "FAIL" },
            title,
            t.elapsed().as_secs_f64(),
            outcome.detail
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criteria failed");
        ExitCode::FAILURE
    }
}
