//! Command-line front end for `subarcs-core`: configuration files, the
//! subcommands, and JSON/CSV/SVG emission.

pub mod commands;
pub mod config;
pub mod output;
pub mod sampling;
pub mod svg;

use std::path::PathBuf;

pub use commands::{run, Command, Outcome};
pub use config::{parse_config, ConfigError, ParseError, RunConfig};

/// Command-line values that replace the matching configuration keys.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub depth: Option<usize>,
    pub eps: Option<f64>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) -> Result<(), ConfigError> {
        for (key, v) in [("eps", self.eps), ("tol", self.tol)] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(ConfigError {
                        line: 0,
                        key: format!("--{key}"),
                        message: format!("{key} must be positive"),
                    });
                }
            }
        }
        if let Some(d) = self.depth {
            cfg.depth = d;
        }
        if let Some(e) = self.eps {
            cfg.eps = e;
        }
        if let Some(t) = self.tol {
            cfg.tol = t;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(o) = &self.out {
            cfg.out = o.clone();
        }
        Ok(())
    }
}
