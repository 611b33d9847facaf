use dish_core::ModelError;
use dish_sim::SimError;
use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum ExperimentError {
    #[error("unknown figure '{0}' (expected one of {list})", list = crate::FigureId::ALL.map(|f| f.label()).join(", "))]
    UnknownFigure(String),

    #[error("sweep grid is empty")]
    EmptyGrid,

    #[error("invalid sweep: {0}")]
    Sweep(String),

    #[error("not enough data: {0}")]
    Insufficient(String),

    #[error(transparent)]
    Model(#[from] ModelError),

    #[error(transparent)]
    Sim(#[from] SimError),
}

impl ExperimentError {
    pub fn code(&self) -> &'static str {
        match self {
            ExperimentError::UnknownFigure(_) => "unknown-figure",
            ExperimentError::EmptyGrid => "empty-grid",
            ExperimentError::Sweep(_) => "sweep",
            ExperimentError::Insufficient(_) => "insufficient-data",
            ExperimentError::Model(e) => e.code(),
            ExperimentError::Sim(e) => e.code(),
        }
    }
}

pub type Result<T> = std::result::Result<T, ExperimentError>;
