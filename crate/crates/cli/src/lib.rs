//! Command-line front end of the spectral lab.
//!
//! Exit codes: 0 when everything checked passes, 1 when an inequality or
//! identity check fails, 2 for usage and configuration errors, 3 for
//! numerical failures.

pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use speclab_core::constants::CurvatureData;
use thiserror::Error;

use crate::commands::CommandOutput;
use crate::config::RunConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] speclab_core::Error),
    #[error("output error: {0}")]
    Output(String),
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_numerical() => 3,
            _ => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "speclab", version, about = "Finite element spectra, eigenvalue inequalities and Rellich identities")]
pub struct Cli {
    /// TOML run configuration; built-in defaults when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory, overriding `output.dir`.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Mesh levels: `N` for levels 1..=N, or a list such as `2,3,4`.
    #[arg(long, global = true, value_name = "N", value_parser = parse_levels)]
    pub levels: Option<LevelList>,
    /// Relative discretization slack of the inequality checks.
    #[arg(long, global = true, value_name = "X")]
    pub slack: Option<f64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigenvalue tables for the configured problems and levels.
    Spectra,
    /// Runs the eigenvalue inequality suite.
    CheckInequalities,
    /// Curvature comparison constants.
    Constants {
        /// Dimension.
        #[arg(long)]
        n: Option<usize>,
        /// Lower sectional curvature bound.
        #[arg(long, allow_hyphen_values = true)]
        kappa1: Option<f64>,
        /// Upper sectional curvature bound.
        #[arg(long, allow_hyphen_values = true)]
        kappa2: Option<f64>,
        /// Radius of the ball containing the domain.
        #[arg(long)]
        r_max: Option<f64>,
    },
    /// Rellich identity residuals and plate boundary formulas.
    VerifyRellich,
    /// Mesh statistics and geometric quantities.
    Geometry,
    /// Eigenvalue convergence study with observed orders.
    Convergence,
}

/// Parsed `--levels` argument.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelList(pub Vec<usize>);

fn parse_levels(s: &str) -> Result<LevelList, String> {
    let parts: Result<Vec<usize>, _> = s.split(',').map(|p| p.trim().parse::<usize>()).collect();
    let parts = parts.map_err(|e| format!("invalid level list '{s}': {e}"))?;
    match parts.as_slice() {
        [] => Err("empty level list".into()),
        [0] => Err("level count must be positive".into()),
        [n] if !s.contains(',') => Ok(LevelList((1..=*n).collect())),
        _ => Ok(LevelList(parts)),
    }
}

/// Merges the command-line overrides into the configuration and validates it.
pub fn resolve_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(LevelList(levels)) = &cli.levels {
        config.mesh.levels = levels.clone();
        config.check.levels = levels.clone();
    }
    if let Some(s) = cli.slack {
        config.check.slack = s;
    }
    if let Some(out) = &cli.out {
        config.output.dir = out.display().to_string();
    }
    if let Command::Constants { n, kappa1, kappa2, r_max } = &cli.command {
        let c = &mut config.constants;
        c.n = n.unwrap_or(c.n);
        c.kappa1 = kappa1.unwrap_or(c.kappa1);
        c.kappa2 = kappa2.unwrap_or(c.kappa2);
        c.r_max = r_max.unwrap_or(c.r_max);
    }
    config.validate()?;
    Ok(config)
}

/// Runs one command without touching the disk.
pub fn execute(command: &Command, config: &RunConfig) -> Result<CommandOutput, CliError> {
    match command {
        Command::Spectra => commands::spectra(config),
        Command::CheckInequalities => commands::check_inequalities(config),
        Command::Constants { .. } => {
            let data: CurvatureData = config.curvature_data()?;
            commands::constants(config, data)
        }
        Command::VerifyRellich => commands::verify_rellich(config),
        Command::Geometry => commands::geometry(config),
        Command::Convergence => commands::convergence(config),
    }
}

/// Full run: resolve, execute, write outputs. Returns the process exit code.
pub fn run(cli: &Cli) -> u8 {
    let result = resolve_config(cli).and_then(|config| {
        let out = execute(&cli.command, &config)?;
        let written = out.files.commit(std::path::Path::new(&config.output.dir))?;
        Ok((out, written))
    });
    match result {
        Ok((out, written)) => {
            print!("{}", out.summary);
            for p in written {
                println!("wrote {}", p.display());
            }
            if out.passed {
                0
            } else {
                println!("FAILED");
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_arguments() {
        assert_eq!(parse_levels("3").unwrap().0, vec![1, 2, 3]);
        assert_eq!(parse_levels("2,4").unwrap().0, vec![2, 4]);
        assert_eq!(parse_levels("5,").ok(), None);
        assert!(parse_levels("0").is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Config("x".into()).exit_code(), 2);
        let numerical = speclab_core::Error::Eigen(speclab_core::eigen::EigenError::IndefiniteMass);
        assert_eq!(CliError::Core(numerical).exit_code(), 3);
    }
}
