use dish_core::ModelError;
use dish_experiments::ExperimentError;
use dish_sim::SimError;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, files or values; exit status 2.
    Usage(String),
    Model(ModelError),
    Sim(SimError),
    Experiment(ExperimentError),
    Io(String),
}

impl CliError {
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Model(e) => e.code(),
            CliError::Sim(e) => e.code(),
            CliError::Experiment(e) => e.code(),
            CliError::Io(_) => "io",
        }
    }

    pub fn exit_status(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Sim(SimError::Config(_)) => 2,
            CliError::Experiment(
                ExperimentError::UnknownFigure(_) | ExperimentError::EmptyGrid | ExperimentError::Sweep(_),
            ) => 2,
            CliError::Experiment(ExperimentError::Sim(SimError::Config(_))) => 2,
            _ => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Io(m) => f.write_str(m),
            CliError::Model(e) => e.fmt(f),
            CliError::Sim(e) => e.fmt(f),
            CliError::Experiment(e) => e.fmt(f),
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Model(e)
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        CliError::Sim(e)
    }
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        CliError::Experiment(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
