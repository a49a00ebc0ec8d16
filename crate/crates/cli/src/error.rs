use std::path::PathBuf;

use chaoslab_core::ChaosError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}", describe(.0))]
    Core(#[from] ChaosError),

    #[error("config: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Input { path: String, source: ChaosError },

    #[error("{0}")]
    Usage(String),
}

fn describe(e: &ChaosError) -> String {
    match e {
        ChaosError::Capacity { what, .. } => {
            let cap = match *what {
                "outcome enumeration" => "enumeration cap (--cap-enum)",
                "chaos decomposition" | "Hoeffding decomposition" => "Stroock cap",
                "factorized fourth moment" => "factorized-support cap",
                _ => "horizon limit",
            };
            format!("{e} [{cap}]")
        }
        other => other.to_string(),
    }
}
