use std::path::PathBuf;

use clap::Args;
use hyptutte::SolverConfig;
use serde::Deserialize;

use crate::run::Failure;

/// Solver settings read from a TOML file. Missing keys keep their defaults.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub tau: Option<f64>,
    pub eps: Option<f64>,
    pub max_iters: Option<usize>,
    pub backtrack: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Default, Args)]
pub struct SolverArgs {
    /// TOML file with any of tau, eps, max_iters, backtrack, seed
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Step size in (0, 1]
    #[arg(long)]
    pub tau: Option<f64>,
    /// Stop when the max normalized residual drops below this
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Step shrink factor on a rejected sweep
    #[arg(long)]
    pub backtrack: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

impl SolverArgs {
    /// Defaults, then the config file, then flags.
    pub fn resolve(&self) -> Result<SolverConfig, Failure> {
        let file = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
                toml::from_str::<FileConfig>(&text)
                    .map_err(|e| Failure::new(1, format!("{}: {e}", path.display())))?
            }
            None => FileConfig::default(),
        };
        let d = SolverConfig::default();
        let cfg = SolverConfig {
            tau: self.tau.or(file.tau).unwrap_or(d.tau),
            eps: self.eps.or(file.eps).unwrap_or(d.eps),
            max_iters: self.max_iters.or(file.max_iters).unwrap_or(d.max_iters),
            backtrack: self.backtrack.or(file.backtrack).unwrap_or(d.backtrack),
            seed: self.seed.or(file.seed).unwrap_or(d.seed),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
