//! Run configuration: a TOML document with flat sections, validated in full
//! before anything is computed. Unknown keys are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use speclab_core::constants::CurvatureData;
use speclab_core::eigen::SolverOptions;
use speclab_core::geometry::Domain;
use speclab_core::harness::Corruption;
use speclab_core::problems::ProblemKind;
use speclab_core::quadrature::{edge_rule, triangle_rule};
use speclab_core::rellich::{QuadratureOptions, Scenario};

use crate::CliError;

/// Finest refinement level accepted; level 7 of the unit disk is already
/// past 200k P2 dofs.
pub const MAX_LEVEL: usize = 7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub domain: DomainConfig,
    pub mesh: MeshConfig,
    pub problems: ProblemsConfig,
    pub solver: SolverConfig,
    pub quadrature: QuadratureConfig,
    pub check: CheckConfig,
    pub constants: ConstantsConfig,
    pub rellich: RellichConfig,
    pub output: OutputConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fault_injection: Option<FaultInjection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DomainConfig {
    pub preset: String,
    pub radius: Option<f64>,
    pub side: Option<f64>,
    pub width: Option<f64>,
    pub height: Option<f64>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub kappa: Option<f64>,
    pub vertices: Option<Vec<[f64; 2]>>,
    pub base_point: Option<[f64; 2]>,
    /// Euclidean dilation applied after construction.
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MeshConfig {
    pub levels: Vec<usize>,
    pub order: usize,
    pub mass_degree: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProblemsConfig {
    pub kinds: Vec<String>,
    pub k_max: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub tol: f64,
    pub cluster_tol: f64,
    pub dense_threshold: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureConfig {
    pub interior_degree: usize,
    pub boundary_degree: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CheckConfig {
    pub levels: Vec<usize>,
    pub k_max: usize,
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConstantsConfig {
    pub n: usize,
    pub kappa1: f64,
    pub kappa2: f64,
    pub r_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RellichConfig {
    pub scenarios: Vec<String>,
    /// Relative residual below which an identity counts as exact.
    pub exact_tol: f64,
    pub min_slope: f64,
    /// Allowed `|ratio - 1|` for the boundary formulas.
    pub boundary_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: String,
}

/// Test hook: scales one computed eigenvalue before the checks run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaultInjection {
    pub problem: String,
    pub index: usize,
    pub factor: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            domain: DomainConfig::default(),
            mesh: MeshConfig::default(),
            problems: ProblemsConfig::default(),
            solver: SolverConfig::default(),
            quadrature: QuadratureConfig::default(),
            check: CheckConfig::default(),
            constants: ConstantsConfig::default(),
            rellich: RellichConfig::default(),
            output: OutputConfig::default(),
            fault_injection: None,
        }
    }
}

impl Default for DomainConfig {
    fn default() -> Self {
        Self {
            preset: "disk".into(),
            radius: None,
            side: None,
            width: None,
            height: None,
            a: None,
            b: None,
            kappa: None,
            vertices: None,
            base_point: None,
            scale: 1.0,
        }
    }
}

impl Default for MeshConfig {
    fn default() -> Self {
        Self { levels: vec![1, 2, 3, 4], order: 2, mass_degree: 4 }
    }
}

impl Default for ProblemsConfig {
    fn default() -> Self {
        Self { kinds: ProblemKind::ALL.iter().map(|k| k.name().to_string()).collect(), k_max: 6 }
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        let s = SolverOptions::default();
        Self { tol: s.tol, cluster_tol: s.cluster_tol, dense_threshold: s.dense_threshold, seed: s.seed }
    }
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        let q = QuadratureOptions::default();
        Self { interior_degree: q.interior_degree, boundary_degree: q.boundary_degree }
    }
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self { levels: vec![3, 4], k_max: 4, slack: 0.02 }
    }
}

impl Default for ConstantsConfig {
    fn default() -> Self {
        Self { n: 2, kappa1: 0.0, kappa2: 0.0, r_max: 1.0 }
    }
}

impl Default for RellichConfig {
    fn default() -> Self {
        Self {
            scenarios: Scenario::ALL.iter().map(|s| s.name().to_string()).collect(),
            exact_tol: 1e-8,
            min_slope: 1.8,
            boundary_tol: 0.03,
        }
    }
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: "speclab-out".into() }
    }
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let config: RunConfig = toml::from_str(text).map_err(|e| bad(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| bad(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Checks every section; nothing is computed before this passes.
    pub fn validate(&self) -> Result<(), CliError> {
        self.domain()?;
        check_levels("mesh.levels", &self.mesh.levels)?;
        check_levels("check.levels", &self.check.levels)?;
        if !(self.mesh.order == 1 || self.mesh.order == 2) {
            return Err(bad(format!("mesh.order must be 1 or 2, got {}", self.mesh.order)));
        }
        triangle_rule(self.mesh.mass_degree).map_err(|e| bad(format!("mesh.mass_degree: {e}")))?;
        self.problem_kinds()?;
        if self.problems.k_max == 0 {
            return Err(bad("problems.k_max must be positive"));
        }
        if self.check.k_max < 2 {
            return Err(bad("check.k_max must be at least 2"));
        }
        if !(self.check.slack >= 0.0 && self.check.slack < 1.0) {
            return Err(bad(format!("check.slack must lie in [0, 1), got {}", self.check.slack)));
        }
        let s = &self.solver;
        if !(s.tol > 0.0 && s.tol < 1e-2) || !(s.cluster_tol >= 0.0 && s.cluster_tol < 1.0) {
            return Err(bad("solver.tol must lie in (0, 1e-2) and solver.cluster_tol in [0, 1)"));
        }
        triangle_rule(self.quadrature.interior_degree).map_err(|e| bad(format!("quadrature.interior_degree: {e}")))?;
        edge_rule(self.quadrature.boundary_degree).map_err(|e| bad(format!("quadrature.boundary_degree: {e}")))?;
        self.curvature_data()?;
        self.scenarios()?;
        let r = &self.rellich;
        if !(r.exact_tol > 0.0 && r.min_slope > 0.0 && r.boundary_tol > 0.0) {
            return Err(bad("rellich tolerances must be positive"));
        }
        if self.output.dir.is_empty() {
            return Err(bad("output.dir is empty"));
        }
        self.corruption()?;
        Ok(())
    }

    pub fn domain(&self) -> Result<Domain, CliError> {
        build_domain(&self.domain)
    }

    pub fn problem_kinds(&self) -> Result<Vec<ProblemKind>, CliError> {
        if self.problems.kinds.is_empty() {
            return Err(bad("problems.kinds is empty"));
        }
        let mut kinds = Vec::new();
        for name in &self.problems.kinds {
            let kind = ProblemKind::parse(name).ok_or_else(|| bad(format!("unknown problem '{name}'")))?;
            if kinds.contains(&kind) {
                return Err(bad(format!("problem '{name}' listed twice")));
            }
            if kind.is_biharmonic() && self.mesh.order != 2 {
                return Err(bad(format!("problem '{name}' needs mesh.order = 2")));
            }
            kinds.push(kind);
        }
        Ok(kinds)
    }

    pub fn scenarios(&self) -> Result<Vec<Scenario>, CliError> {
        self.rellich.scenarios.iter().map(|s| Scenario::parse(s).map_err(|e| bad(e.to_string()))).collect()
    }

    pub fn curvature_data(&self) -> Result<CurvatureData, CliError> {
        let c = &self.constants;
        CurvatureData::new(c.n, c.kappa1, c.kappa2, c.r_max).map_err(|e| bad(format!("constants: {e}")))
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            tol: self.solver.tol,
            cluster_tol: self.solver.cluster_tol,
            dense_threshold: self.solver.dense_threshold,
            seed: self.solver.seed,
            ..SolverOptions::default()
        }
    }

    pub fn quadrature_options(&self) -> QuadratureOptions {
        QuadratureOptions { interior_degree: self.quadrature.interior_degree, boundary_degree: self.quadrature.boundary_degree }
    }

    pub fn corruption(&self) -> Result<Option<Corruption>, CliError> {
        let Some(f) = &self.fault_injection else { return Ok(None) };
        let kind = ProblemKind::parse(&f.problem).ok_or_else(|| bad(format!("fault_injection.problem '{}'", f.problem)))?;
        if f.index == 0 || !f.factor.is_finite() {
            return Err(bad("fault_injection needs a one-based index and a finite factor"));
        }
        Ok(Some(Corruption { kind, index: f.index, factor: f.factor }))
    }

    /// SHA-256 of the canonical JSON form, excluding the output directory,
    /// which does not affect any computed value.
    pub fn fingerprint(&self) -> String {
        let mut canonical = self.clone();
        canonical.output = OutputConfig::default();
        let text = serde_json::to_string(&canonical).expect("config serializes");
        Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn check_levels(key: &str, levels: &[usize]) -> Result<(), CliError> {
    if levels.is_empty() {
        return Err(bad(format!("{key} is empty")));
    }
    if !levels.windows(2).all(|w| w[0] < w[1]) {
        return Err(bad(format!("{key} must be strictly increasing")));
    }
    if let Some(&l) = levels.iter().find(|&&l| l > MAX_LEVEL) {
        return Err(bad(format!("{key}: level {l} exceeds {MAX_LEVEL}")));
    }
    Ok(())
}

/// Parameters each preset accepts besides `preset`, `base_point` and `scale`.
fn allowed_parameters(preset: &str) -> Option<&'static [&'static str]> {
    Some(match preset {
        "disk" => &["radius"],
        "square" => &["side"],
        "rectangle" => &["width", "height"],
        "ellipse" => &["a", "b"],
        "polygon" => &["vertices"],
        "blob" | "lshape" => &[],
        "hyperbolic-disk" | "spherical-cap" => &["radius", "kappa"],
        _ => return None,
    })
}

fn build_domain(c: &DomainConfig) -> Result<Domain, CliError> {
    let allowed = allowed_parameters(&c.preset).ok_or_else(|| bad(format!("unknown domain preset '{}'", c.preset)))?;
    let given = [
        ("radius", c.radius.is_some()),
        ("side", c.side.is_some()),
        ("width", c.width.is_some()),
        ("height", c.height.is_some()),
        ("a", c.a.is_some()),
        ("b", c.b.is_some()),
        ("kappa", c.kappa.is_some()),
        ("vertices", c.vertices.is_some()),
    ];
    for (key, present) in given {
        if present && !allowed.contains(&key) {
            return Err(bad(format!("domain.{key} does not apply to preset '{}'", c.preset)));
        }
    }
    let geometry = |e: speclab_core::geometry::GeometryError| bad(format!("domain: {e}"));
    let mut domain = match c.preset.as_str() {
        "disk" => Domain::disk(c.radius.unwrap_or(1.0)),
        "square" => Domain::square(c.side.unwrap_or(1.0)),
        "rectangle" => Domain::rectangle(c.width.unwrap_or(2.0), c.height.unwrap_or(1.0)),
        "ellipse" => Domain::ellipse(c.a.unwrap_or(2.0), c.b.unwrap_or(1.0)),
        "polygon" => {
            let v = c.vertices.clone().ok_or_else(|| bad("preset 'polygon' needs domain.vertices"))?;
            if v.len() < 3 {
                return Err(bad("domain.vertices needs at least three points"));
            }
            let base = c.base_point.unwrap_or_else(|| speclab_core::geometry::polygon_centroid(&v));
            Domain::polygon(v, base)
        }
        "blob" => Domain::blob(),
        "lshape" => Domain::lshape(),
        "hyperbolic-disk" => Domain::hyperbolic_disk(c.radius.unwrap_or(1.0), c.kappa.unwrap_or(-1.0)),
        "spherical-cap" => Domain::spherical_cap(c.radius.unwrap_or(0.5), c.kappa.unwrap_or(1.0)),
        _ => unreachable!("preset checked above"),
    }
    .map_err(geometry)?;
    if let Some(p) = c.base_point {
        domain = domain.with_base_point(p).map_err(geometry)?;
    }
    if c.scale != 1.0 {
        if !(c.scale > 0.0 && c.scale.is_finite()) {
            return Err(bad(format!("domain.scale must be positive, got {}", c.scale)));
        }
        domain = domain.scaled(c.scale).map_err(geometry)?;
    }
    Ok(domain)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let c = RunConfig::parse("").unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!(c.fingerprint().len(), 64);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::parse("[mesh]\nlevel = [1]\n").is_err());
        assert!(RunConfig::parse("[meshes]\nlevels = [1]\n").is_err());
        assert!(RunConfig::parse("[domain]\npreset = \"disk\"\nwidth = 2.0\n").is_err());
    }

    #[test]
    fn presets_build() {
        for p in ["disk", "square", "rectangle", "ellipse", "blob", "lshape", "hyperbolic-disk", "spherical-cap"] {
            let c = RunConfig::parse(&format!("[domain]\npreset = \"{p}\"\n")).unwrap();
            c.domain().unwrap();
        }
        assert!(matches!(RunConfig::parse("[domain]\npreset = \"torus\"\n"), Err(CliError::Config(_))));
    }

    #[test]
    fn fingerprint_ignores_output_dir() {
        let a = RunConfig::parse("[output]\ndir = \"a\"\n").unwrap();
        let b = RunConfig::parse("[output]\ndir = \"b\"\n[check]\nslack = 0.02\n").unwrap();
        assert_eq!(a.fingerprint(), b.fingerprint());
        let c = RunConfig::parse("[check]\nslack = 0.03\n").unwrap();
        assert_ne!(a.fingerprint(), c.fingerprint());
    }

    #[test]
    fn invalid_values() {
        assert!(RunConfig::parse("[mesh]\nlevels = [3, 2]\n").is_err());
        assert!(RunConfig::parse("[mesh]\nlevels = [9]\n").is_err());
        assert!(RunConfig::parse("[constants]\nkappa1 = 1.0\nkappa2 = 0.0\n").is_err());
        assert!(RunConfig::parse("[problems]\nkinds = [\"dirichlet\", \"dirichlet\"]\n").is_err());
        assert!(RunConfig::parse("[domain]\npreset = \"spherical-cap\"\nradius = 2.0\n").is_err());
    }
}
