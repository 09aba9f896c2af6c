//! Eigenvalue inequality suite: every bound is evaluated on computed spectra,
//! geometric quantities and comparison constants, with hypothesis gating and
//! a relative discretization slack.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::constants::{ComparisonConstants, CurvatureData};
use crate::eigen::SolverOptions;
use crate::geometry::{geometric_quantities, Domain, GeometricQuantities};
use crate::problems::{self, Discretization, ProblemKind, SpectralResult};
use crate::rellich::{self, BoundOutcome, QuadratureOptions, VectorField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
}

impl Relation {
    pub fn as_str(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Skipped,
    Fail,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Skipped => "skipped",
            Verdict::Fail => "fail",
        }
    }
}

/// Outcome for one candidate multiplicity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidateOutcome {
    pub multiplicity: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityCheck {
    pub name: String,
    /// The inequality in plain text.
    pub statement: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub relation: Relation,
    /// `rhs - lhs` for `<=`, `lhs - rhs` for `>=`; non-negative when the
    /// inequality holds without widening.
    pub slack: f64,
    /// `lhs / rhs`, the scale-free form of the comparison.
    pub ratio: f64,
    pub verdict: Verdict,
    pub reason: Option<String>,
    /// The bound holds for structural reasons (`c/0 = inf`, nonpositive side).
    pub trivial: bool,
    /// Digest of the numbers the check consumed.
    pub inputs: String,
    pub discretization_slack: f64,
    /// Per-multiplicity outcomes when the multiplicity is ambiguous across levels.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub candidates: Vec<CandidateOutcome>,
}

fn digest(values: &[f64]) -> String {
    let mut h = Sha256::new();
    for v in values {
        h.update(v.to_bits().to_le_bytes());
    }
    h.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// `lhs <= rhs` after shrinking `lhs` and enlarging `rhs` by the fraction `slack`.
fn holds(relation: Relation, lhs: f64, rhs: f64, slack: f64) -> bool {
    let (small, big) = match relation {
        Relation::Le => (lhs, rhs),
        Relation::Ge => (rhs, lhs),
    };
    if big == f64::INFINITY || small == f64::NEG_INFINITY {
        return true;
    }
    small - slack * small.abs() <= big + slack * big.abs()
}

impl InequalityCheck {
    pub fn compare(
        name: String,
        statement: &'static str,
        relation: Relation,
        lhs: f64,
        rhs: f64,
        inputs: &[f64],
        slack: f64,
    ) -> Self {
        let trivial = match relation {
            Relation::Le => rhs == f64::INFINITY,
            Relation::Ge => lhs == f64::INFINITY,
        };
        let (verdict, reason) = if lhs.is_nan() || rhs.is_nan() {
            (Verdict::Fail, Some("non-finite value".to_string()))
        } else if holds(relation, lhs, rhs, slack) {
            (Verdict::Pass, None)
        } else {
            (Verdict::Fail, None)
        };
        let gap = match relation {
            Relation::Le => rhs - lhs,
            Relation::Ge => lhs - rhs,
        };
        Self {
            name,
            statement,
            lhs,
            rhs,
            relation,
            slack: gap,
            ratio: lhs / rhs,
            verdict,
            reason,
            trivial,
            inputs: digest(inputs),
            discretization_slack: slack,
            candidates: Vec::new(),
        }
    }

    pub fn skipped(name: String, statement: &'static str, relation: Relation, reason: impl Into<String>, slack: f64) -> Self {
        Self {
            name,
            statement,
            lhs: f64::NAN,
            rhs: f64::NAN,
            relation,
            slack: f64::NAN,
            ratio: f64::NAN,
            verdict: Verdict::Skipped,
            reason: Some(reason.into()),
            trivial: false,
            inputs: digest(&[]),
            discretization_slack: slack,
            candidates: Vec::new(),
        }
    }

    fn mark_trivial(mut self, why: &str) -> Self {
        self.trivial = true;
        if self.reason.is_none() {
            self.reason = Some(why.to_string());
        }
        self
    }

    /// Keeps the worst candidate as the headline result.
    fn from_candidates(mut checks: Vec<(usize, InequalityCheck)>) -> Self {
        let candidates: Vec<CandidateOutcome> = checks
            .iter()
            .map(|(m, c)| CandidateOutcome { multiplicity: *m, lhs: c.lhs, rhs: c.rhs, verdict: c.verdict })
            .collect();
        // worst verdict first, then the smallest slack ratio
        checks.sort_by(|a, b| {
            b.1.verdict.cmp(&a.1.verdict).then(a.1.slack.partial_cmp(&b.1.slack).unwrap_or(std::cmp::Ordering::Equal))
        });
        let mut head = checks.swap_remove(0).1;
        if candidates.len() > 1 {
            head.candidates = candidates;
        }
        head
    }
}

/// Computed eigenvalues of one problem with their clusters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    pub kind: ProblemKind,
    pub values: Vec<f64>,
    /// `(start, multiplicity)` with zero-based start.
    pub clusters: Vec<(usize, usize)>,
}

impl Spectrum {
    /// The kernel eigenvalue of Neumann, Steklov and the second biharmonic
    /// Steklov problem is exactly zero; a computed value below `1e-8` times
    /// the next eigenvalue is replaced by zero.
    pub fn from_result(r: &SpectralResult) -> Self {
        let mut values = r.values().to_vec();
        let has_kernel = matches!(r.kind, ProblemKind::Neumann | ProblemKind::Steklov | ProblemKind::Bsteklov2);
        if has_kernel && values.len() > 1 && values[0].abs() <= 1e-8 * values[1].abs() {
            values[0] = 0.0;
        }
        Self { kind: r.kind, values, clusters: r.eigen.clusters.iter().map(|c| (c.start, c.multiplicity)).collect() }
    }

    /// One-based lookup.
    pub fn get(&self, index: usize) -> Option<f64> {
        index.checked_sub(1).and_then(|i| self.values.get(i).copied())
    }

    /// Multiplicity of the cluster holding the one-based `index`.
    pub fn multiplicity(&self, index: usize) -> Option<usize> {
        let i = index.checked_sub(1)?;
        self.clusters.iter().find(|&&(s, m)| i >= s && i < s + m).map(|&(_, m)| m)
    }
}

/// Spectra of one mesh level, keyed by problem, with solver failures kept as text.
pub type SpectrumSet = BTreeMap<ProblemKind, Result<Spectrum, String>>;

fn need<'a>(set: &'a SpectrumSet, kind: ProblemKind) -> Result<&'a Spectrum, String> {
    match set.get(&kind) {
        Some(Ok(s)) => Ok(s),
        Some(Err(e)) => Err(format!("{} solve failed: {e}", kind.name())),
        None => Err(format!("{} spectrum not computed", kind.name())),
    }
}

fn value(s: &Spectrum, index: usize) -> Result<f64, String> {
    s.get(index).ok_or_else(|| format!("insufficient spectrum length: {} index {index} of {}", s.kind.name(), s.values.len()))
}

fn indexed(base: &str, k: usize) -> String {
    format!("{base}[k={k:02}]")
}

/// Shared inputs of the geometric checks.
#[derive(Debug, Clone, Copy)]
pub struct CheckContext<'a> {
    pub slack: f64,
    pub geometry: &'a GeometricQuantities,
    pub metric_kappa: f64,
    pub euclidean: bool,
    pub constants: Option<&'a ComparisonConstants>,
}

const STAR: &str = "star shaped domain with respect to p";
const NONPOSITIVE_CURVATURE: &str = "provided kappa_2 <= 0";
const EUCLIDEAN: &str = "domain in the Euclidean plane";
const CENTROID: &str = "star shaped with respect to its centroid";

/// `mu_k sigma_2 <= xi_k` and `mu_2 sigma_k <= xi_k` for `k = 1..=k_max`.
pub fn check_xi_lower_bounds(set: &SpectrumSet, k_max: usize, slack: f64) -> Vec<InequalityCheck> {
    const A: &str = "mu_k sigma_2 <= xi_k";
    const B: &str = "mu_2 sigma_k <= xi_k";
    let mut out = Vec::new();
    for k in 1..=k_max {
        for (base, statement, pick) in [("xi_lower_mu_k_sigma_2", A, true), ("xi_lower_mu_2_sigma_k", B, false)] {
            let name = indexed(base, k);
            let run = || -> Result<InequalityCheck, String> {
                let (mu, sigma, xi) = (
                    need(set, ProblemKind::Neumann)?,
                    need(set, ProblemKind::Steklov)?,
                    need(set, ProblemKind::Bsteklov2)?,
                );
                let (m, s) = if pick { (value(mu, k)?, value(sigma, 2)?) } else { (value(mu, 2)?, value(sigma, k)?) };
                let x = value(xi, k)?;
                Ok(InequalityCheck::compare(name.clone(), statement, Relation::Le, m * s, x, &[m, s, x], slack))
            };
            out.push(run().unwrap_or_else(|r| InequalityCheck::skipped(name.clone(), statement, Relation::Le, r, slack)));
        }
    }
    out
}

/// `sigma_2 >= h_min mu_2 / (2 r_max mu_2^(1/2) + C_0)`.
pub fn check_sigma2_lower_bound(set: &SpectrumSet, ctx: &CheckContext) -> InequalityCheck {
    const S: &str = "sigma_2 >= h_min mu_2 / (2 r_max mu_2^(1/2) + C_0)";
    let name = "sigma2_lower_mu2".to_string();
    let run = || -> Result<InequalityCheck, String> {
        if !ctx.geometry.star_shaped {
            return Err(format!("hypothesis not met: {STAR}"));
        }
        let c = ctx.constants.ok_or("comparison constants unavailable")?;
        let mu2 = value(need(set, ProblemKind::Neumann)?, 2)?;
        let s2 = value(need(set, ProblemKind::Steklov)?, 2)?;
        let g = ctx.geometry;
        let rhs = g.h_min * mu2 / (2.0 * g.r_max * mu2.sqrt() + c.c0);
        Ok(InequalityCheck::compare(name.clone(), S, Relation::Ge, s2, rhs, &[s2, mu2, g.h_min, g.r_max, c.c0], ctx.slack))
    };
    run().unwrap_or_else(|r| InequalityCheck::skipped(name.clone(), S, Relation::Ge, r, ctx.slack))
}

/// Lower and upper bounds of `lambda_k` through `eta`, and the `eta_1`
/// lower bound. `lambda_multiplicities[k-1]` lists every multiplicity seen
/// for `lambda_k` across the mesh levels.
pub fn check_lambda_eta_bounds(
    set: &SpectrumSet,
    ctx: &CheckContext,
    k_max: usize,
    lambda_multiplicities: &[BTreeSet<usize>],
) -> Vec<InequalityCheck> {
    const LOWER: &str = "C_1 eta_m / h_max <= lambda_k, m the multiplicity of lambda_k";
    const UPPER: &str = "lambda_k <= (4 r_max^2 eta_k^2 - 2 C_2 h_min eta_k) / h_min^2";
    const ETA1: &str = "eta_1 >= h_min C_2 / r_max^2";
    let slack = ctx.slack;
    let g = ctx.geometry;
    let gate = || -> Result<&ComparisonConstants, String> {
        if !g.star_shaped {
            return Err(format!("hypothesis not met: {STAR}"));
        }
        ctx.constants.ok_or_else(|| "comparison constants unavailable".to_string())
    };
    let mut out = Vec::new();
    for k in 1..=k_max {
        let name = indexed("lambda_lower_eta", k);
        let run = || -> Result<InequalityCheck, String> {
            let c = gate()?;
            if c.c1 <= 0.0 {
                return Err(format!("hypothesis not met: C_1 > 0 (C_1 = {:.6e})", c.c1));
            }
            let (lam, eta) = (need(set, ProblemKind::Dirichlet)?, need(set, ProblemKind::Bsteklov1)?);
            let lk = value(lam, k)?;
            let mut ms: BTreeSet<usize> = lambda_multiplicities.get(k - 1).cloned().unwrap_or_default();
            if let Some(m) = lam.multiplicity(k) {
                ms.insert(m);
            }
            if ms.is_empty() {
                return Err(format!("no cluster for lambda_{k}"));
            }
            let mut cands = Vec::new();
            for m in ms {
                let em = value(eta, m)?;
                let rhs = c.c1 * em / g.h_max;
                cands.push((m, InequalityCheck::compare(name.clone(), LOWER, Relation::Ge, lk, rhs, &[lk, em, c.c1, g.h_max], slack)));
            }
            Ok(InequalityCheck::from_candidates(cands))
        };
        out.push(run().unwrap_or_else(|r| InequalityCheck::skipped(name.clone(), LOWER, Relation::Ge, r, slack)));

        let name = indexed("lambda_upper_eta", k);
        let run = || -> Result<InequalityCheck, String> {
            let c = gate()?;
            let lk = value(need(set, ProblemKind::Dirichlet)?, k)?;
            let ek = value(need(set, ProblemKind::Bsteklov1)?, k)?;
            let rhs = (4.0 * g.r_max * g.r_max * ek * ek - 2.0 * c.c2 * g.h_min * ek) / (g.h_min * g.h_min);
            Ok(InequalityCheck::compare(name.clone(), UPPER, Relation::Le, lk, rhs, &[lk, ek, c.c2, g.r_max, g.h_min], slack))
        };
        out.push(run().unwrap_or_else(|r| InequalityCheck::skipped(name.clone(), UPPER, Relation::Le, r, slack)));
    }
    let name = "eta1_lower".to_string();
    let run = || -> Result<InequalityCheck, String> {
        let c = gate()?;
        let e1 = value(need(set, ProblemKind::Bsteklov1)?, 1)?;
        let rhs = g.h_min * c.c2 / (g.r_max * g.r_max);
        let check = InequalityCheck::compare(name.clone(), ETA1, Relation::Ge, e1, rhs, &[e1, c.c2, g.h_min, g.r_max], slack);
        Ok(if c.c2 <= 0.0 { check.mark_trivial("C_2 <= 0: the bound is nonpositive") } else { check })
    };
    out.push(run().unwrap_or_else(|r| InequalityCheck::skipped(name.clone(), ETA1, Relation::Ge, r, slack)));
    out
}

/// `xi_{m+1} <= h_max mu_k^2 / ((C_3 - mu_k I_2 / (n vol)) v 0)` for
/// `k = 2..=k_max`, `m` the multiplicity of `mu_k`.
pub fn check_xi_upper_bounds(
    set: &SpectrumSet,
    ctx: &CheckContext,
    k_max: usize,
    mu_multiplicities: &[BTreeSet<usize>],
) -> Vec<InequalityCheck> {
    const S: &str = "xi_{m+1} <= h_max mu_k^2 / ((C_3 - mu_k I_2 / (n vol)) v 0), m the multiplicity of mu_k";
    let g = ctx.geometry;
    let mut out = Vec::new();
    for k in 2..=k_max.max(2) {
        let name = indexed("xi_upper_mu", k);
        let run = || -> Result<InequalityCheck, String> {
            if ctx.metric_kappa > 0.0 {
                return Err(format!("hypothesis not met: {NONPOSITIVE_CURVATURE}"));
            }
            if !g.star_shaped {
                return Err(format!("hypothesis not met: {STAR}"));
            }
            let c = ctx.constants.ok_or("comparison constants unavailable")?;
            let (mu, xi) = (need(set, ProblemKind::Neumann)?, need(set, ProblemKind::Bsteklov2)?);
            let mk = value(mu, k)?;
            let mut ms = mu_multiplicities.get(k - 1).cloned().unwrap_or_default();
            if let Some(m) = mu.multiplicity(k) {
                ms.insert(m);
            }
            let denom = (c.c3 - mk * g.inertia2 / (2.0 * g.volume)).max(0.0);
            let rhs = if denom > 0.0 { g.h_max * mk * mk / denom } else { f64::INFINITY };
            let mut cands = Vec::new();
            for m in ms {
                let x = value(xi, m + 1)?;
                let check = InequalityCheck::compare(name.clone(), S, Relation::Le, x, rhs, &[x, mk, c.c3, g.inertia2, g.volume, g.h_max], ctx.slack);
                cands.push((m, if denom > 0.0 { check } else { check.mark_trivial("denominator <= 0: bound is +inf") }));
            }
            if cands.is_empty() {
                return Err(format!("no cluster for mu_{k}"));
            }
            Ok(InequalityCheck::from_candidates(cands))
        };
        out.push(run().unwrap_or_else(|r| InequalityCheck::skipped(name.clone(), S, Relation::Le, r, ctx.slack)));
    }
    out
}

fn centroid_gate(ctx: &CheckContext) -> Result<(), String> {
    if !ctx.euclidean {
        return Err(format!("hypothesis not met: {EUCLIDEAN}"));
    }
    let g = ctx.geometry;
    if !g.star_shaped {
        return Err(format!("hypothesis not met: {STAR}"));
    }
    match g.centroid_residual {
        Some(r) if r <= 1e-8 * g.diameter * g.volume => Ok(()),
        _ => Err(format!("hypothesis not met: {CENTROID}")),
    }
}

/// Euclidean centroid bounds `xi_{m_0+1} <= h_max mu_2^2` and
/// `sigma_{m_0+1} <= h_max mu_2`, `m_0` the multiplicity of `mu_2`.
pub fn check_centroid_bounds(set: &SpectrumSet, ctx: &CheckContext, mu2_multiplicities: &BTreeSet<usize>) -> Vec<InequalityCheck> {
    const XI: &str = "xi_{m_0+1} <= h_max mu_2^2, m_0 the multiplicity of mu_2";
    const SIGMA: &str = "sigma_{m_0+1} <= h_max mu_2, m_0 the multiplicity of mu_2";
    let g = ctx.geometry;
    let mut out = Vec::new();
    for (name, statement, kind, power) in [
        ("centroid_xi_upper_mu2", XI, ProblemKind::Bsteklov2, 2),
        ("centroid_sigma_upper_mu2", SIGMA, ProblemKind::Steklov, 1),
    ] {
        let run = || -> Result<InequalityCheck, String> {
            centroid_gate(ctx)?;
            let mu = need(set, ProblemKind::Neumann)?;
            let target = need(set, kind)?;
            let mu2 = value(mu, 2)?;
            let mut ms = mu2_multiplicities.clone();
            if let Some(m) = mu.multiplicity(2) {
                ms.insert(m);
            }
            let rhs = g.h_max * mu2.powi(power);
            let mut cands = Vec::new();
            for m in ms {
                let v = value(target, m + 1)?;
                cands.push((m, InequalityCheck::compare(name.to_string(), statement, Relation::Le, v, rhs, &[v, mu2, g.h_max], ctx.slack)));
            }
            if cands.is_empty() {
                return Err("no cluster for mu_2".into());
            }
            Ok(InequalityCheck::from_candidates(cands))
        };
        out.push(run().unwrap_or_else(|r| InequalityCheck::skipped(name.to_string(), statement, Relation::Le, r, ctx.slack)));
    }
    out
}

/// The five classical planar inequalities between first nonzero eigenvalues.
pub fn check_planar_table(set: &SpectrumSet, ctx: &CheckContext) -> Vec<InequalityCheck> {
    let g = ctx.geometry;
    let s = ctx.slack;
    let planar = || -> Result<(), String> {
        if ctx.euclidean {
            Ok(())
        } else {
            Err(format!("hypothesis not met: {EUCLIDEAN}"))
        }
    };
    let star = || -> Result<(), String> {
        planar()?;
        if g.star_shaped {
            Ok(())
        } else {
            Err(format!("hypothesis not met: {STAR}"))
        }
    };
    type Row<'a> = (&'static str, &'static str, Relation, Box<dyn Fn() -> Result<InequalityCheck, String> + 'a>);
    let rows: Vec<Row> = vec![
        (
            "planar_mu2_sigma2_le_xi2",
            "mu_2 sigma_2 <= xi_2",
            Relation::Le,
            Box::new(|| {
                planar()?;
                let (m, sg, x) = (
                    value(need(set, ProblemKind::Neumann)?, 2)?,
                    value(need(set, ProblemKind::Steklov)?, 2)?,
                    value(need(set, ProblemKind::Bsteklov2)?, 2)?,
                );
                Ok(InequalityCheck::compare("planar_mu2_sigma2_le_xi2".into(), "mu_2 sigma_2 <= xi_2", Relation::Le, m * sg, x, &[m, sg, x], s))
            }),
        ),
        (
            "planar_sigma2_lower",
            "mu_2 h_min / (1 + mu_2^(1/2) r_max) <= 2 sigma_2",
            Relation::Le,
            Box::new(|| {
                star()?;
                let (m, sg) = (value(need(set, ProblemKind::Neumann)?, 2)?, value(need(set, ProblemKind::Steklov)?, 2)?);
                let lhs = m * g.h_min / (1.0 + m.sqrt() * g.r_max);
                Ok(InequalityCheck::compare(
                    "planar_sigma2_lower".into(),
                    "mu_2 h_min / (1 + mu_2^(1/2) r_max) <= 2 sigma_2",
                    Relation::Le,
                    lhs,
                    2.0 * sg,
                    &[m, sg, g.h_min, g.r_max],
                    s,
                ))
            }),
        ),
        (
            "planar_eta1_upper",
            "eta_1 <= lambda_1 h_max / 2",
            Relation::Le,
            Box::new(|| {
                star()?;
                let (e, l) = (value(need(set, ProblemKind::Bsteklov1)?, 1)?, value(need(set, ProblemKind::Dirichlet)?, 1)?);
                Ok(InequalityCheck::compare(
                    "planar_eta1_upper".into(),
                    "eta_1 <= lambda_1 h_max / 2",
                    Relation::Le,
                    e,
                    0.5 * l * g.h_max,
                    &[e, l, g.h_max],
                    s,
                ))
            }),
        ),
        (
            "planar_lambda1_upper",
            "lambda_1^(1/2) <= 2 eta_1 r_max / h_min",
            Relation::Le,
            Box::new(|| {
                star()?;
                let (e, l) = (value(need(set, ProblemKind::Bsteklov1)?, 1)?, value(need(set, ProblemKind::Dirichlet)?, 1)?);
                Ok(InequalityCheck::compare(
                    "planar_lambda1_upper".into(),
                    "lambda_1^(1/2) <= 2 eta_1 r_max / h_min",
                    Relation::Le,
                    l.sqrt(),
                    2.0 * e * g.r_max / g.h_min,
                    &[e, l, g.r_max, g.h_min],
                    s,
                ))
            }),
        ),
        (
            "planar_xi2_upper",
            "xi_2 <= mu_2^2 h_max",
            Relation::Le,
            Box::new(|| {
                centroid_gate(ctx)?;
                let (x, m) = (value(need(set, ProblemKind::Bsteklov2)?, 2)?, value(need(set, ProblemKind::Neumann)?, 2)?);
                Ok(InequalityCheck::compare("planar_xi2_upper".into(), "xi_2 <= mu_2^2 h_max", Relation::Le, x, m * m * g.h_max, &[x, m, g.h_max], s))
            }),
        ),
    ];
    rows.into_iter()
        .map(|(name, statement, rel, f)| f().unwrap_or_else(|r| InequalityCheck::skipped(name.to_string(), statement, rel, r, s)))
        .collect()
}

/// Bounds for Dirichlet and buckling eigenvalues through `F = grad rho_p`
/// and the field conditions on it.
pub fn check_field_bounds(
    disc: &Discretization,
    dirichlet: Result<&SpectralResult, String>,
    buckling: Result<&SpectralResult, String>,
    k_max: usize,
    slack: f64,
    q: &QuadratureOptions,
) -> Vec<InequalityCheck> {
    const UPPER: &str = "lambda_k <= int (d_nu w)^2 <F,nu> / ((2 alpha + c_1 - c_2) int w^2)";
    const LOWER: &str = "Lambda_k >= int (Delta w)^2 <F,nu> / (2 alpha int |grad w|^2), c_1 = c_2";
    let skip_all = |reason: String| -> Vec<InequalityCheck> {
        (1..=k_max)
            .flat_map(|k| {
                [
                    InequalityCheck::skipped(indexed("field_dirichlet_upper", k), UPPER, Relation::Le, reason.clone(), slack),
                    InequalityCheck::skipped(indexed("field_buckling_lower", k), LOWER, Relation::Ge, reason.clone(), slack),
                ]
            })
            .collect()
    };
    let (d, b) = match (dirichlet, buckling) {
        (Ok(d), Ok(b)) => (d, b),
        (Err(e), _) | (_, Err(e)) => return skip_all(e),
    };
    let f = VectorField::grad_rho(&disc.domain);
    let report = match rellich::field_bound_check(disc, &f, d, b, q) {
        Ok(r) => r,
        Err(e) => return skip_all(format!("field bound evaluation failed: {e}")),
    };
    let mut out = Vec::new();
    for (base, statement, relation, outcome) in
        [("field_dirichlet_upper", UPPER, Relation::Le, &report.dirichlet_upper), ("field_buckling_lower", LOWER, Relation::Ge, &report.buckling_lower)]
    {
        for k in 1..=k_max {
            let name = indexed(base, k);
            out.push(match outcome {
                BoundOutcome::Skipped(reason) => InequalityCheck::skipped(name, statement, relation, format!("hypothesis not met: {reason}"), slack),
                BoundOutcome::Evaluated(rows) => match rows.get(k - 1) {
                    None => InequalityCheck::skipped(name, statement, relation, format!("insufficient spectrum length: {k}"), slack),
                    Some(row) => {
                        let c = &report.conditions;
                        let inputs = [row.lhs, row.rhs, c.alpha, c.c1_div, c.c2_div];
                        // Dirichlet: lhs = lambda, rhs = bound; buckling: lhs = bound, rhs = Lambda
                        match relation {
                            Relation::Le => InequalityCheck::compare(name, statement, relation, row.lhs, row.rhs, &inputs, slack),
                            Relation::Ge => InequalityCheck::compare(name, statement, relation, row.rhs, row.lhs, &inputs, slack),
                        }
                    }
                },
            });
        }
    }
    out
}

/// Multiplies one computed eigenvalue, to exercise failure reporting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Corruption {
    pub kind: ProblemKind,
    /// One-based eigenvalue index.
    pub index: usize,
    pub factor: f64,
}

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub domain: Domain,
    pub levels: Vec<usize>,
    pub k_max: usize,
    pub slack: f64,
    pub order: usize,
    pub mass_degree: usize,
    pub solver: SolverOptions,
    pub quadrature: QuadratureOptions,
    pub corruption: Option<Corruption>,
}

impl SuiteConfig {
    pub fn new(domain: Domain, levels: Vec<usize>) -> Self {
        Self {
            domain,
            levels,
            k_max: 4,
            slack: 0.02,
            order: 2,
            mass_degree: 4,
            solver: SolverOptions::default(),
            quadrature: QuadratureOptions::default(),
            corruption: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
}

impl Summary {
    fn of(checks: &[InequalityCheck]) -> Self {
        let count = |v| checks.iter().filter(|c| c.verdict == v).count();
        Self { total: checks.len(), passed: count(Verdict::Pass), failed: count(Verdict::Fail), skipped: count(Verdict::Skipped) }
    }

    fn add(&mut self, o: &Summary) {
        self.total += o.total;
        self.passed += o.passed;
        self.failed += o.failed;
        self.skipped += o.skipped;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityReport {
    pub domain: String,
    pub domain_fingerprint: String,
    pub level: usize,
    pub dof_count: usize,
    pub geometry: Option<GeometricQuantities>,
    pub constants: Option<ComparisonConstants>,
    /// Sorted by name.
    pub checks: Vec<InequalityCheck>,
    pub summary: Summary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub reports: Vec<InequalityReport>,
    pub summary: Summary,
}

impl SuiteReport {
    pub fn failures(&self) -> impl Iterator<Item = (usize, &InequalityCheck)> {
        self.reports.iter().flat_map(|r| r.checks.iter().filter(|c| c.verdict == Verdict::Fail).map(move |c| (r.level, c)))
    }
}

/// Problems the suite needs; the clamped plate enters no inequality.
pub const SUITE_PROBLEMS: [ProblemKind; 6] = [
    ProblemKind::Dirichlet,
    ProblemKind::Neumann,
    ProblemKind::Steklov,
    ProblemKind::Bsteklov1,
    ProblemKind::Bsteklov2,
    ProblemKind::Buckling,
];

fn domain_fingerprint(domain: &Domain, level: usize) -> String {
    let text = format!("{domain:?}/level={level}");
    let mut h = Sha256::new();
    h.update(text.as_bytes());
    h.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect()
}

struct Level {
    level: usize,
    disc: Result<Discretization, String>,
    geometry: Result<GeometricQuantities, String>,
    results: BTreeMap<ProblemKind, Result<SpectralResult, String>>,
    spectra: SpectrumSet,
}

/// Computes every spectrum once per level, then runs all checks. Component
/// failures become skips of the dependent checks.
pub fn run_suite(config: &SuiteConfig) -> SuiteReport {
    // enough eigenvalues that the clusters entering the checks are complete
    let k_solve = config.k_max + 4;
    let mut levels: Vec<Level> = Vec::new();
    for &level in &config.levels {
        let disc = config
            .domain
            .mesh(level)
            .map_err(|e| e.to_string())
            .and_then(|m| Discretization::new(&config.domain, &m, config.order, config.mass_degree).map_err(|e| e.to_string()));
        let geometry = match &disc {
            Ok(d) => geometric_quantities(&config.domain, &d.space.mesh).map_err(|e| e.to_string()),
            Err(e) => Err(e.clone()),
        };
        let mut results = BTreeMap::new();
        match &disc {
            Ok(d) => {
                for (kind, r) in SUITE_PROBLEMS.iter().zip(problems::solve_many(&SUITE_PROBLEMS, d, k_solve, &config.solver)) {
                    results.insert(*kind, r.map_err(|e| e.to_string()));
                }
            }
            Err(e) => {
                for kind in SUITE_PROBLEMS {
                    results.insert(kind, Err(e.clone()));
                }
            }
        }
        let mut spectra: SpectrumSet = results.iter().map(|(k, r)| (*k, r.as_ref().map(Spectrum::from_result).map_err(|e| e.clone()))).collect();
        if let Some(c) = config.corruption {
            if let Some(Ok(s)) = spectra.get_mut(&c.kind) {
                if let Some(v) = c.index.checked_sub(1).and_then(|i| s.values.get_mut(i)) {
                    *v *= c.factor;
                }
            }
        }
        levels.push(Level { level, disc, geometry, results, spectra });
    }

    // multiplicities seen across levels
    let seen = |kind: ProblemKind| -> Vec<BTreeSet<usize>> {
        (1..=k_solve)
            .map(|k| {
                levels
                    .iter()
                    .filter_map(|l| match l.spectra.get(&kind) {
                        Some(Ok(s)) => s.multiplicity(k),
                        _ => None,
                    })
                    .collect()
            })
            .collect()
    };
    let lambda_m = seen(ProblemKind::Dirichlet);
    let mu_m = seen(ProblemKind::Neumann);
    let mu2_m = mu_m.get(1).cloned().unwrap_or_default();

    let mut reports = Vec::new();
    let mut total = Summary::default();
    for l in &levels {
        let kappa = config.domain.metric.kappa;
        let mut checks = check_xi_lower_bounds(&l.spectra, config.k_max, config.slack);
        let constants = l.geometry.as_ref().ok().and_then(|g| {
            CurvatureData::constant(2, kappa, g.r_max).ok().map(ComparisonConstants::evaluate)
        });
        match &l.geometry {
            Ok(g) => {
                let ctx = CheckContext {
                    slack: config.slack,
                    geometry: g,
                    metric_kappa: kappa,
                    euclidean: config.domain.metric.is_euclidean(),
                    constants: constants.as_ref(),
                };
                checks.push(check_sigma2_lower_bound(&l.spectra, &ctx));
                checks.extend(check_lambda_eta_bounds(&l.spectra, &ctx, config.k_max, &lambda_m));
                checks.extend(check_xi_upper_bounds(&l.spectra, &ctx, config.k_max, &mu_m));
                checks.extend(check_centroid_bounds(&l.spectra, &ctx, &mu2_m));
                checks.extend(check_planar_table(&l.spectra, &ctx));
            }
            Err(e) => {
                // same check list with everything geometric skipped
                let dummy = GeometricQuantities {
                    r_max: f64::NAN,
                    h_min: f64::NAN,
                    h_max: f64::NAN,
                    volume: f64::NAN,
                    boundary_length: f64::NAN,
                    inertia2: f64::NAN,
                    centroid_residual: None,
                    diameter: f64::NAN,
                    star_shaped: false,
                    samples_per_edge: 0,
                };
                let ctx = CheckContext { slack: config.slack, geometry: &dummy, metric_kappa: kappa, euclidean: false, constants: None };
                let reason = format!("geometry failed: {e}");
                let mut geo = vec![check_sigma2_lower_bound(&l.spectra, &ctx)];
                geo.extend(check_lambda_eta_bounds(&l.spectra, &ctx, config.k_max, &lambda_m));
                geo.extend(check_xi_upper_bounds(&l.spectra, &ctx, config.k_max, &mu_m));
                geo.extend(check_centroid_bounds(&l.spectra, &ctx, &mu2_m));
                geo.extend(check_planar_table(&l.spectra, &ctx));
                checks.extend(geo.into_iter().map(|c| InequalityCheck::skipped(c.name, c.statement, c.relation, reason.clone(), config.slack)));
            }
        }
        match &l.disc {
            Ok(d) => {
                let get = |k: ProblemKind| match l.results.get(&k) {
                    Some(Ok(r)) => Ok(r),
                    Some(Err(e)) => Err(format!("{} solve failed: {e}", k.name())),
                    None => Err(format!("{} spectrum not computed", k.name())),
                };
                let mut field = check_field_bounds(d, get(ProblemKind::Dirichlet), get(ProblemKind::Buckling), config.k_max, config.slack, &config.quadrature);
                if let Some(c) = config.corruption {
                    // the field bounds read eigenvalues from the solver results
                    for chk in field.iter_mut() {
                        let hit = (c.kind == ProblemKind::Dirichlet && chk.name == indexed("field_dirichlet_upper", c.index))
                            || (c.kind == ProblemKind::Buckling && chk.name == indexed("field_buckling_lower", c.index));
                        if hit && chk.verdict != Verdict::Skipped {
                            let (lhs, rhs) = (chk.lhs * c.factor, chk.rhs);
                            *chk = InequalityCheck::compare(chk.name.clone(), chk.statement, chk.relation, lhs, rhs, &[lhs, rhs], config.slack);
                        }
                    }
                }
                checks.extend(field);
            }
            Err(e) => {
                let reason = format!("discretization failed: {e}");
                for k in 1..=config.k_max {
                    checks.push(InequalityCheck::skipped(
                        indexed("field_dirichlet_upper", k),
                        "lambda_k <= int (d_nu w)^2 <F,nu> / ((2 alpha + c_1 - c_2) int w^2)",
                        Relation::Le,
                        reason.clone(),
                        config.slack,
                    ));
                    checks.push(InequalityCheck::skipped(
                        indexed("field_buckling_lower", k),
                        "Lambda_k >= int (Delta w)^2 <F,nu> / (2 alpha int |grad w|^2), c_1 = c_2",
                        Relation::Ge,
                        reason.clone(),
                        config.slack,
                    ));
                }
            }
        }
        checks.sort_by(|a, b| a.name.cmp(&b.name));
        let summary = Summary::of(&checks);
        total.add(&summary);
        reports.push(InequalityReport {
            domain: config.domain.name.clone(),
            domain_fingerprint: domain_fingerprint(&config.domain, l.level),
            level: l.level,
            dof_count: l.disc.as_ref().map(|d| d.dof_count()).unwrap_or(0),
            geometry: l.geometry.as_ref().ok().cloned(),
            constants,
            checks,
            summary,
        });
    }
    SuiteReport { reports, summary: total }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spectrum(kind: ProblemKind, values: &[f64], clusters: &[(usize, usize)]) -> Result<Spectrum, String> {
        Ok(Spectrum { kind, values: values.to_vec(), clusters: clusters.to_vec() })
    }

    fn disk_like() -> SpectrumSet {
        let mut s = SpectrumSet::new();
        s.insert(ProblemKind::Neumann, spectrum(ProblemKind::Neumann, &[0.0, 3.39, 3.39, 9.33], &[(0, 1), (1, 2), (3, 1)]));
        s.insert(ProblemKind::Steklov, spectrum(ProblemKind::Steklov, &[0.0, 1.0, 1.0, 2.0], &[(0, 1), (1, 2), (3, 1)]));
        s.insert(ProblemKind::Bsteklov2, spectrum(ProblemKind::Bsteklov2, &[0.0, 4.0, 4.0, 24.0], &[(0, 1), (1, 2), (3, 1)]));
        s
    }

    #[test]
    fn widening_rule() {
        assert!(holds(Relation::Le, 1.0, 1.0, 0.0));
        assert!(holds(Relation::Le, 1.03, 1.0, 0.02));
        assert!(!holds(Relation::Le, 1.05, 1.0, 0.02));
        assert!(holds(Relation::Ge, 0.97, 1.0, 0.02));
        assert!(holds(Relation::Le, 5.0, f64::INFINITY, 0.0));
    }

    #[test]
    fn first_index_reduces_to_zero() {
        let checks = check_xi_lower_bounds(&disk_like(), 1, 0.02);
        for c in &checks {
            assert_eq!((c.lhs, c.rhs, c.verdict), (0.0, 0.0, Verdict::Pass), "{}", c.name);
        }
    }

    #[test]
    fn short_spectrum_is_skipped() {
        let checks = check_xi_lower_bounds(&disk_like(), 6, 0.02);
        let c = checks.iter().find(|c| c.name == "xi_lower_mu_k_sigma_2[k=06]").unwrap();
        assert_eq!(c.verdict, Verdict::Skipped);
        assert!(c.reason.as_ref().unwrap().contains("insufficient"));
    }

    #[test]
    fn worst_candidate_is_reported() {
        let mk = |m, lhs: f64| (m, InequalityCheck::compare("x".into(), "s", Relation::Le, lhs, 1.0, &[lhs], 0.0));
        let c = InequalityCheck::from_candidates(vec![mk(1, 0.5), mk(2, 2.0)]);
        assert_eq!(c.verdict, Verdict::Fail);
        assert_eq!(c.candidates.len(), 2);
    }

    #[test]
    fn kernel_eigenvalue_snaps_to_zero() {
        let d = Domain::disk(1.0).unwrap();
        let disc = Discretization::new(&d, &d.mesh(1).unwrap(), 2, 4).unwrap();
        let r = problems::solve(ProblemKind::Neumann, &disc, 3, &SolverOptions::default()).unwrap();
        let s = Spectrum::from_result(&r);
        assert_eq!(s.values[0], 0.0);
        assert_eq!(s.multiplicity(2), Some(2));
    }
}
