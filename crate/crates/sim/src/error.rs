use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(
        "no connected topology after {attempts} attempts at density {density} per R²; \
         try a higher density"
    )]
    Disconnected { density: f64, attempts: usize },
}

impl SimError {
    pub fn code(&self) -> &'static str {
        match self {
            SimError::Config(_) => "config",
            SimError::Disconnected { .. } => "disconnected",
        }
    }
}

pub type Result<T> = std::result::Result<T, SimError>;
