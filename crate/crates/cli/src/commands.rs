//! The six commands. Each returns its buffered files, a console summary and
//! whether everything it checked passed.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use speclab_core::constants::{positivity_radius, ComparisonConstants, CurvatureData, PositivityRadius, Which};
use speclab_core::eigen::Cluster;
use speclab_core::geometry::{geometric_quantities, GeometricQuantities};
use speclab_core::harness::{run_suite, SuiteConfig, SuiteReport, Verdict};
use speclab_core::problems::{self, Discretization, ProblemKind, SpectralResult};
use speclab_core::rellich::{
    boundary_formula_buckling, boundary_formula_clamped, refinement_slope, BoundaryFormula, IdentityResidual,
};

use crate::config::RunConfig;
use crate::output::{num, opt_num, Outputs, Stamp, Table};
use crate::CliError;

pub struct CommandOutput {
    pub files: Outputs,
    pub summary: String,
    pub passed: bool,
}

fn discretize(config: &RunConfig, level: usize) -> Result<(Discretization, f64), CliError> {
    let domain = config.domain()?;
    let mesh = domain.mesh(level).map_err(speclab_core::Error::from)?;
    let h = mesh.max_edge();
    let disc = Discretization::new(&domain, &mesh, config.mesh.order, config.mesh.mass_degree).map_err(speclab_core::Error::from)?;
    Ok((disc, h))
}

fn solve_all(config: &RunConfig, disc: &Discretization, kinds: &[ProblemKind], k: usize) -> Result<Vec<SpectralResult>, CliError> {
    let opts = config.solver_options();
    problems::solve_many(kinds, disc, k, &opts)
        .into_iter()
        .map(|r| r.map_err(|e| CliError::Core(e.into())))
        .collect()
}

#[derive(Serialize)]
struct ProblemSpectrum {
    problem: &'static str,
    values: Vec<f64>,
    clusters: Vec<Cluster>,
    residuals: Vec<f64>,
}

#[derive(Serialize)]
struct LevelSpectra {
    level: usize,
    dofs: usize,
    h_max: f64,
    problems: Vec<ProblemSpectrum>,
}

#[derive(Serialize)]
struct SpectraReport {
    #[serde(flatten)]
    stamp: Stamp,
    domain: String,
    order: usize,
    k_max: usize,
    levels: Vec<LevelSpectra>,
}

fn cluster_id(clusters: &[Cluster], i: usize) -> (usize, usize) {
    clusters.iter().enumerate().find(|(_, c)| c.contains(i)).map_or((0, 1), |(id, c)| (id + 1, c.multiplicity))
}

/// Eigenvalue tables for every configured problem and level.
pub fn spectra(config: &RunConfig) -> Result<CommandOutput, CliError> {
    let stamp = Stamp::new(&config.fingerprint());
    let kinds = config.problem_kinds()?;
    let k = config.problems.k_max;
    let columns = ["level", "h_max", "dofs", "index", "value", "cluster_id", "multiplicity", "residual"];
    let mut tables: Vec<Table> = kinds.iter().map(|_| Table::new(&columns, &stamp)).collect();
    let mut levels = Vec::new();
    let mut summary = String::new();
    for &level in &config.mesh.levels {
        let (disc, h) = discretize(config, level)?;
        let results = solve_all(config, &disc, &kinds, k)?;
        let mut problems = Vec::new();
        for (table, r) in tables.iter_mut().zip(&results) {
            let e = &r.eigen;
            for (i, v) in e.values.iter().enumerate() {
                let (id, mult) = cluster_id(&e.clusters, i);
                table.push(vec![
                    level.to_string(),
                    num(h),
                    r.dof_count.to_string(),
                    (i + 1).to_string(),
                    num(*v),
                    id.to_string(),
                    mult.to_string(),
                    num(e.residual_norms[i]),
                ]);
            }
            let _ = writeln!(summary, "L{level} {:10} {}", r.kind.name(), fmt_values(&e.values));
            problems.push(ProblemSpectrum {
                problem: r.kind.name(),
                values: e.values.clone(),
                clusters: e.clusters.clone(),
                residuals: e.residual_norms.clone(),
            });
        }
        levels.push(LevelSpectra { level, dofs: disc.dof_count(), h_max: h, problems });
    }
    let mut files = Outputs::default();
    for (kind, table) in kinds.iter().zip(&tables) {
        files.csv(&format!("spectra_{}.csv", kind.name()), table)?;
    }
    let domain = config.domain()?.name;
    files.json("spectra.json", &SpectraReport { stamp, domain, order: config.mesh.order, k_max: k, levels })?;
    Ok(CommandOutput { files, summary, passed: true })
}

fn fmt_values(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:.6}")).collect::<Vec<_>>().join(" ")
}

#[derive(Serialize)]
struct CheckReport<'a> {
    #[serde(flatten)]
    stamp: Stamp,
    slack: f64,
    k_max: usize,
    suite: &'a SuiteReport,
}

pub fn suite_config(config: &RunConfig) -> Result<SuiteConfig, CliError> {
    let mut s = SuiteConfig::new(config.domain()?, config.check.levels.clone());
    s.k_max = config.check.k_max;
    s.slack = config.check.slack;
    s.order = config.mesh.order;
    s.mass_degree = config.mesh.mass_degree;
    s.solver = config.solver_options();
    s.quadrature = config.quadrature_options();
    s.corruption = config.corruption()?;
    Ok(s)
}

/// Runs the inequality suite. Passes when no check failed; skips are allowed.
pub fn check_inequalities(config: &RunConfig) -> Result<CommandOutput, CliError> {
    let stamp = Stamp::new(&config.fingerprint());
    if config.mesh.order != 2 {
        return Err(CliError::Config("the inequality suite needs mesh.order = 2".into()));
    }
    let suite = run_suite(&suite_config(config)?);
    let mut table = Table::new(
        &["level", "name", "relation", "lhs", "rhs", "ratio", "gap", "verdict", "trivial", "reason", "inputs", "statement"],
        &stamp,
    );
    let mut summary = String::new();
    for r in &suite.reports {
        let _ = writeln!(
            summary,
            "{} L{} ({} dofs): {} pass, {} skipped, {} fail",
            r.domain, r.level, r.dof_count, r.summary.passed, r.summary.skipped, r.summary.failed
        );
        for c in &r.checks {
            table.push(vec![
                r.level.to_string(),
                c.name.clone(),
                c.relation.as_str().into(),
                num(c.lhs),
                num(c.rhs),
                num(c.ratio),
                num(c.slack),
                c.verdict.as_str().into(),
                c.trivial.to_string(),
                c.reason.clone().unwrap_or_default(),
                c.inputs.clone(),
                c.statement.into(),
            ]);
            if c.verdict == Verdict::Fail {
                let _ = writeln!(summary, "  FAIL {}: {:.10} {} {:.10}", c.name, c.lhs, c.relation.as_str(), c.rhs);
            }
        }
    }
    let passed = suite.summary.failed == 0;
    let mut files = Outputs::default();
    files.csv("inequalities.csv", &table)?;
    files.json("inequalities.json", &CheckReport { stamp, slack: config.check.slack, k_max: config.check.k_max, suite: &suite })?;
    Ok(CommandOutput { files, summary, passed })
}

#[derive(Serialize)]
struct Radii {
    c1: PositivityRadius,
    c2: PositivityRadius,
    c3: PositivityRadius,
}

#[derive(Serialize)]
struct ConstantsReport {
    #[serde(flatten)]
    stamp: Stamp,
    constants: ComparisonConstants,
    positivity_radius: Radii,
}

fn fmt_radius(r: PositivityRadius) -> String {
    match r {
        PositivityRadius::Unbounded => "inf".into(),
        PositivityRadius::Finite(x) => num(x),
        PositivityRadius::NeverPositive => "never".into(),
    }
}

/// Comparison constants and their positivity radii for one curvature set.
pub fn constants(config: &RunConfig, data: CurvatureData) -> Result<CommandOutput, CliError> {
    let stamp = Stamp::new(&config.fingerprint());
    let c = ComparisonConstants::evaluate(data);
    let (n, k1, k2) = (data.n, data.kappa1, data.kappa2);
    let radii = Radii {
        c1: positivity_radius(Which::C1, n, k1, k2),
        c2: positivity_radius(Which::C2, n, k1, k2),
        c3: positivity_radius(Which::C3, n, k1, k2),
    };
    let mut table = Table::new(&["n", "kappa1", "kappa2", "r_max", "quantity", "value", "positivity_radius"], &stamp);
    let rows = [
        ("H_kappa1(r_max)", c.h_at_r_max, String::new()),
        ("C0", c.c0, String::new()),
        ("C1", c.c1, fmt_radius(radii.c1)),
        ("C2", c.c2, fmt_radius(radii.c2)),
        ("C3", c.c3, fmt_radius(radii.c3)),
    ];
    let mut summary = format!("n = {n}, kappa1 = {k1}, kappa2 = {k2}, r_max = {}\n", data.r_max);
    for (name, value, radius) in rows {
        let _ = writeln!(summary, "  {name:16} {value:>22.16}  r0 = {}", if radius.is_empty() { "-" } else { &radius });
        table.push(vec![n.to_string(), num(k1), num(k2), num(data.r_max), name.into(), num(value), radius]);
    }
    let mut files = Outputs::default();
    files.csv("constants.csv", &table)?;
    files.json("constants.json", &ConstantsReport { stamp, constants: c, positivity_radius: radii })?;
    Ok(CommandOutput { files, summary, passed: true })
}

#[derive(Serialize)]
struct ScenarioReport {
    scenario: &'static str,
    analytic: bool,
    levels: Vec<usize>,
    residuals: Vec<IdentityResidual>,
    /// Observed order of the relative residual, when it is above the floor.
    slope: Option<f64>,
    at_floor: bool,
    verdict: Verdict,
}

#[derive(Serialize)]
struct BoundaryReport {
    level: usize,
    buckling: Result<Vec<BoundaryFormula>, String>,
    clamped: Result<Vec<BoundaryFormula>, String>,
    tolerance: f64,
    verdict: Verdict,
}

#[derive(Serialize)]
struct RellichReport {
    #[serde(flatten)]
    stamp: Stamp,
    exact_tol: f64,
    min_slope: f64,
    scenarios: Vec<ScenarioReport>,
    boundary_formulas: BoundaryReport,
}

/// Judges one scenario over the level sequence: exact identities must stay
/// at the floor, the rest must decrease (at `min_slope` when analytic).
fn judge(analytic: bool, residuals: &[IdentityResidual], exact_tol: f64, min_slope: f64) -> (Option<f64>, bool, Verdict) {
    let rel: Vec<f64> = residuals.iter().map(|r| r.relative_residual).collect();
    let at_floor = residuals.iter().all(|r| {
        let scale = r.rhs_terms.values().map(|v| v.abs()).sum::<f64>().max(1.0);
        r.relative_residual <= exact_tol || r.residual <= exact_tol * scale
    });
    let slope = if at_floor { None } else { refinement_slope(&rel) };
    let decreasing = rel.windows(2).all(|w| w[1] < w[0]);
    let ok = at_floor || (rel.len() >= 2 && decreasing && (!analytic || slope.is_some_and(|s| s >= min_slope)));
    (slope, at_floor, if ok { Verdict::Pass } else { Verdict::Fail })
}

/// Rellich-type identities on the built-in scenarios, plus the boundary
/// formulas for the plate problems on the configured domain.
pub fn verify_rellich(config: &RunConfig) -> Result<CommandOutput, CliError> {
    let stamp = Stamp::new(&config.fingerprint());
    let q = config.quadrature_options();
    let levels = &config.mesh.levels;
    let mut table = Table::new(&["scenario", "level", "identity", "quantity", "value"], &stamp);
    let mut summary = String::new();
    let mut scenarios = Vec::new();
    for s in config.scenarios()? {
        let mut residuals = Vec::new();
        for &level in levels {
            let r = s.run(level, &q).map_err(speclab_core::Error::from)?;
            let mut row = |quantity: &str, value: f64| {
                table.push(vec![s.name().into(), level.to_string(), r.identity.into(), quantity.into(), num(value)])
            };
            row("lhs", r.lhs);
            for (term, value) in &r.rhs_terms {
                row(term, *value);
            }
            row("residual", r.residual);
            row("relative_residual", r.relative_residual);
            residuals.push(r);
        }
        let (slope, at_floor, verdict) = judge(s.is_analytic(), &residuals, config.rellich.exact_tol, config.rellich.min_slope);
        let rel: Vec<String> = residuals.iter().map(|r| format!("{:.2e}", r.relative_residual)).collect();
        let _ = writeln!(
            summary,
            "{:20} {:7} relative residuals [{}] {} -> {}",
            s.name(),
            if at_floor { "floor" } else { "" },
            rel.join(", "),
            slope.map(|v| format!("slope {v:.2}")).unwrap_or_default(),
            verdict.as_str()
        );
        scenarios.push(ScenarioReport { scenario: s.name(), analytic: s.is_analytic(), levels: levels.clone(), residuals, slope, at_floor, verdict });
    }

    let level = *levels.last().expect("levels validated nonempty");
    let boundary_formulas = boundary_formulas(config, level)?;
    let _ = writeln!(summary, "boundary formulas at L{level}: {}", boundary_formulas.verdict.as_str());
    for (name, rows) in [("buckling", &boundary_formulas.buckling), ("clamped", &boundary_formulas.clamped)] {
        match rows {
            Ok(rows) => {
                for b in rows {
                    let _ = writeln!(summary, "  {name} {}: formula {:.8} solver {:.8} ratio {:.6}", b.index, b.from_formula, b.from_solver, b.ratio);
                    table.push(vec![format!("boundary-{name}"), level.to_string(), name.into(), format!("ratio[{}]", b.index), num(b.ratio)]);
                }
            }
            Err(reason) => {
                let _ = writeln!(summary, "  {name}: skipped ({reason})");
            }
        }
    }
    let passed = scenarios.iter().all(|s| s.verdict == Verdict::Pass) && boundary_formulas.verdict != Verdict::Fail;
    let report = RellichReport {
        stamp,
        exact_tol: config.rellich.exact_tol,
        min_slope: config.rellich.min_slope,
        scenarios,
        boundary_formulas,
    };
    let mut files = Outputs::default();
    files.csv("rellich.csv", &table)?;
    files.json("rellich.json", &report)?;
    Ok(CommandOutput { files, summary, passed })
}

fn boundary_formulas(config: &RunConfig, level: usize) -> Result<BoundaryReport, CliError> {
    let tolerance = config.rellich.boundary_tol;
    let domain = config.domain()?;
    if !domain.metric.is_euclidean() || config.mesh.order != 2 {
        let reason = "needs a Euclidean domain and P2 elements".to_string();
        return Ok(BoundaryReport { level, buckling: Err(reason.clone()), clamped: Err(reason), tolerance, verdict: Verdict::Skipped });
    }
    let (disc, _) = discretize(config, level)?;
    let results = solve_all(config, &disc, &[ProblemKind::Buckling, ProblemKind::Clamped], 1)?;
    let buckling = boundary_formula_buckling(&disc, &results[0]).map_err(|e| e.to_string());
    let clamped = boundary_formula_clamped(&disc, &results[1]).map_err(|e| e.to_string());
    let rows: Vec<&BoundaryFormula> = buckling.iter().chain(clamped.iter()).flatten().collect();
    let verdict = if rows.is_empty() {
        Verdict::Skipped
    } else if rows.iter().all(|b| (b.ratio - 1.0).abs() <= tolerance) {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(BoundaryReport { level, buckling, clamped, tolerance, verdict })
}

#[derive(Serialize)]
struct GeometryLevel {
    level: usize,
    vertices: usize,
    triangles: usize,
    boundary_edges: usize,
    h_max: f64,
    min_angle_degrees: f64,
    quantities: GeometricQuantities,
}

#[derive(Serialize)]
struct GeometryReport {
    #[serde(flatten)]
    stamp: Stamp,
    domain: String,
    base_point: [f64; 2],
    kappa: f64,
    levels: Vec<GeometryLevel>,
}

/// Mesh statistics and the geometric quantities entering the inequalities.
pub fn geometry(config: &RunConfig) -> Result<CommandOutput, CliError> {
    let stamp = Stamp::new(&config.fingerprint());
    let domain = config.domain()?;
    let mut table = Table::new(
        &[
            "level", "vertices", "triangles", "h_max", "min_angle_degrees", "r_max", "h_min", "h_boundary_max", "volume",
            "boundary_length", "inertia2", "centroid_residual", "diameter", "star_shaped",
        ],
        &stamp,
    );
    let mut levels = Vec::new();
    let mut summary = String::new();
    for &level in &config.mesh.levels {
        let mesh = domain.mesh(level).map_err(speclab_core::Error::from)?;
        let g = geometric_quantities(&domain, &mesh).map_err(speclab_core::Error::from)?;
        let _ = writeln!(
            summary,
            "L{level}: {} triangles, vol {:.10}, |dOmega| {:.10}, r_max {:.6}, h in [{:.6}, {:.6}], star-shaped {}",
            mesh.triangles.len(),
            g.volume,
            g.boundary_length,
            g.r_max,
            g.h_min,
            g.h_max,
            g.star_shaped
        );
        table.push(vec![
            level.to_string(),
            mesh.vertices.len().to_string(),
            mesh.triangles.len().to_string(),
            num(mesh.max_edge()),
            num(mesh.min_angle_degrees()),
            num(g.r_max),
            num(g.h_min),
            num(g.h_max),
            num(g.volume),
            num(g.boundary_length),
            num(g.inertia2),
            opt_num(g.centroid_residual),
            num(g.diameter),
            g.star_shaped.to_string(),
        ]);
        levels.push(GeometryLevel {
            level,
            vertices: mesh.vertices.len(),
            triangles: mesh.triangles.len(),
            boundary_edges: mesh.boundary_edges.len(),
            h_max: mesh.max_edge(),
            min_angle_degrees: mesh.min_angle_degrees(),
            quantities: g,
        });
    }
    let mut files = Outputs::default();
    files.csv("geometry.csv", &table)?;
    files.json(
        "geometry.json",
        &GeometryReport { stamp, domain: domain.name.clone(), base_point: domain.base_point, kappa: domain.metric.kappa, levels },
    )?;
    Ok(CommandOutput { files, summary, passed: true })
}

/// Observed order from three successive values on levels `l0 < l1 < l2`:
/// successive differences shrink like `h^p` with `h ~ 2^-level`.
pub fn local_order(values: [f64; 3], levels: [usize; 3]) -> Option<f64> {
    let d1 = (values[1] - values[0]).abs();
    let d2 = (values[2] - values[1]).abs();
    if !(d1 > 0.0 && d2 > 0.0) {
        return None;
    }
    let span = 0.5 * ((levels[2] - levels[0]) as f64);
    Some((d1 / d2).log2() / span)
}

/// Least-squares order over all successive differences, or `None` with
/// fewer than three levels.
pub fn fitted_order(values: &[f64], levels: &[usize]) -> Option<f64> {
    if values.len() < 3 {
        return None;
    }
    let pts: Vec<(f64, f64)> = (1..values.len())
        .map(|i| (0.5 * (levels[i] + levels[i - 1]) as f64, (values[i] - values[i - 1]).abs()))
        .collect();
    if pts.iter().any(|p| !(p.1 > 0.0)) {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1.log2()).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1.log2() - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(-sxy / sxx)
}

#[derive(Serialize)]
struct ConvergenceSeries {
    problem: &'static str,
    index: usize,
    values: Vec<f64>,
    kernel: bool,
    order: Option<f64>,
}

#[derive(Serialize)]
struct ConvergenceReport {
    #[serde(flatten)]
    stamp: Stamp,
    domain: String,
    levels: Vec<usize>,
    h_max: Vec<f64>,
    dofs: Vec<usize>,
    series: Vec<ConvergenceSeries>,
}

/// Eigenvalue against mesh size with estimated convergence orders.
pub fn convergence(config: &RunConfig) -> Result<CommandOutput, CliError> {
    let stamp = Stamp::new(&config.fingerprint());
    let kinds = config.problem_kinds()?;
    let k = config.problems.k_max;
    let levels = config.mesh.levels.clone();
    let mut values: BTreeMap<(usize, usize), Vec<f64>> = BTreeMap::new();
    let (mut hs, mut dofs) = (Vec::new(), Vec::new());
    for &level in &levels {
        let (disc, h) = discretize(config, level)?;
        hs.push(h);
        dofs.push(disc.dof_count());
        for (p, r) in solve_all(config, &disc, &kinds, k)?.iter().enumerate() {
            for (i, v) in r.values().iter().enumerate() {
                values.entry((p, i)).or_default().push(*v);
            }
        }
    }
    let mut table = Table::new(&["problem", "index", "level", "h_max", "dofs", "value", "difference", "local_order", "fitted_order"], &stamp);
    let mut series = Vec::new();
    let mut summary = String::new();
    // per-problem magnitude, to recognise kernel eigenvalues
    let mut scale = vec![0f64; kinds.len()];
    for ((p, _), vals) in &values {
        scale[*p] = vals.iter().fold(scale[*p], |m, v| m.max(v.abs()));
    }
    for ((p, i), vals) in values {
        let kernel = vals.iter().all(|v| v.abs() <= 1e-8 * scale[p]);
        let order = if kernel { None } else { fitted_order(&vals, &levels) };
        for (j, v) in vals.iter().enumerate() {
            let diff = (j > 0).then(|| v - vals[j - 1]);
            let local = (j > 1 && !kernel).then(|| local_order([vals[j - 2], vals[j - 1], vals[j]], [levels[j - 2], levels[j - 1], levels[j]])).flatten();
            table.push(vec![
                kinds[p].name().into(),
                (i + 1).to_string(),
                levels[j].to_string(),
                num(hs[j]),
                dofs[j].to_string(),
                num(*v),
                opt_num(diff),
                opt_num(local),
                opt_num(order),
            ]);
        }
        let _ = writeln!(
            summary,
            "{:10} {:2}: {:.8} order {}{}",
            kinds[p].name(),
            i + 1,
            vals.last().copied().unwrap_or(f64::NAN),
            order.map(|o| format!("{o:.2}")).unwrap_or_else(|| "-".into()),
            if kernel { " (kernel)" } else { "" }
        );
        series.push(ConvergenceSeries { problem: kinds[p].name(), index: i + 1, values: vals, kernel, order });
    }
    let mut files = Outputs::default();
    files.csv("convergence.csv", &table)?;
    let domain = config.domain()?.name;
    files.json("convergence.json", &ConvergenceReport { stamp, domain, levels, h_max: hs, dofs, series })?;
    Ok(CommandOutput { files, summary, passed: true })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orders_of_exact_powers() {
        let vals: Vec<f64> = (0..4).map(|l| 1.0 + 0.25f64.powi(l)).collect();
        assert!((local_order([vals[0], vals[1], vals[2]], [0, 1, 2]).unwrap() - 2.0).abs() < 1e-12);
        assert!((fitted_order(&vals, &[0, 1, 2, 3]).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(fitted_order(&vals[..2], &[0, 1]), None);
    }
}
