use std::io;

use thiserror::Error;

use crate::balance::SolveTrace;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("tangent vector has (near) zero length")]
    ZeroVector,

    #[error("isometry does not preserve the upper sheet")]
    NotOrthochronous,

    #[error("matrix reverses orientation (det < 0)")]
    OrientationReversing,

    #[error("genus must be at least 2, got {0}")]
    GenusTooSmall(usize),

    #[error("edge ({0}, {1}) is degenerate (length {2:e})")]
    DegenerateEdge(usize, usize, f64),

    #[error("face {0} is degenerate")]
    DegenerateFace(usize),

    #[error("mapping is not embedded: {0}")]
    NotEmbedded(String),

    #[error("deck labels differ on directed edge ({0}, {1}); mappings are in different homotopy classes")]
    LabelMismatch(usize, usize),

    #[error("solver did not converge after {} sweeps (final residual {:e}){}", .0.sweeps, .0.final_residual(), .0.t.map(|t| format!(" at t = {t}")).unwrap_or_default())]
    NoConvergence(Box<SolveTrace>),

    #[error("invalid complex: {0}")]
    InvalidComplex(String),

    #[error("weights must be positive: {0}")]
    InvalidWeights(String),

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown generator word {0:?}")]
    BadWord(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}
