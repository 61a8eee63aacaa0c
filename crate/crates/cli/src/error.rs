use flatflow_core::analysis::AnalysisError;
use flatflow_core::catalog::CatalogError;
use flatflow_core::field::FieldError;
use flatflow_core::flow::FlowError;
use flatflow_core::geometry::GeometryError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("geometry: {0}")]
    Geometry(String),
    #[error("solver: {0}")]
    Solver(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Geometry(_) => 3,
            CliError::Solver(_) => 4,
            CliError::Verification(_) => 5,
        }
    }
}

impl From<GeometryError> for CliError {
    fn from(e: GeometryError) -> Self {
        CliError::Geometry(e.to_string())
    }
}

impl From<CatalogError> for CliError {
    fn from(e: CatalogError) -> Self {
        match e {
            CatalogError::InvalidArea(_) | CatalogError::InvalidCap(_) => CliError::Config(e.to_string()),
            _ => CliError::Geometry(e.to_string()),
        }
    }
}

impl From<FieldError> for CliError {
    fn from(e: FieldError) -> Self {
        CliError::Solver(e.to_string())
    }
}

impl From<FlowError> for CliError {
    fn from(e: FlowError) -> Self {
        match e {
            FlowError::InvalidConfig(_) | FlowError::InitialArea { .. } => CliError::Config(e.to_string()),
            FlowError::Geometry(g) => g.into(),
            _ => CliError::Solver(e.to_string()),
        }
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::Flow(f) | AnalysisError::Run { error: f, .. } => f.into(),
            AnalysisError::Catalog(c) => c.into(),
            AnalysisError::Geometry(g) => g.into(),
            AnalysisError::Field(f) => f.into(),
            AnalysisError::Precondition(_) | AnalysisError::InvalidArgument(_) => {
                CliError::Config(e.to_string())
            }
            _ => CliError::Verification(e.to_string()),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.into())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.into())
    }
}
