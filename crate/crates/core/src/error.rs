use thiserror::Error;

pub type Result<T> = std::result::Result<T, MetroError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetroError {
    #[error("DimensionError: {0}")]
    Dimension(String),
    #[error("TruncationError: Fock tail mass {tail:e} beyond cutoff {cutoff} exceeds 1e-12")]
    Truncation { cutoff: usize, tail: f64 },
    #[error("SizeError: product dimension {0} exceeds 2^16")]
    Size(usize),
    #[error("ArityError: {0}")]
    Arity(String),
    #[error("CompletenessError: {0}")]
    Completeness(String),
    #[error("NotHermitianError: deviation {0:e} from conjugate transpose")]
    NotHermitian(f64),
    #[error("NormalizationError: state norm {0} differs from 1")]
    Normalization(f64),
    #[error("DegenerateError: outcome {outcome} has zero probability but derivative {derivative:e}")]
    Degenerate { outcome: usize, derivative: f64 },
    #[error("NoInformationError: Fisher information {0} is not positive")]
    NoInformation(f64),
    #[error("NoResourceError: resource count {0} vanishes; no resources available to estimate the phase")]
    NoResource(f64),
    #[error("SharpGeneratorError: generator spread {0} vanishes on this state")]
    SharpGenerator(f64),
    #[error("FlatSignalError: signal slope {0:e} vanishes")]
    FlatSignal(f64),
    #[error("WindowError: likelihood maximized at window edge {0}")]
    Window(f64),
    #[error("SchemaError: {0}")]
    Schema(String),
    #[error("IoError: {0}")]
    Io(String),
}

impl MetroError {
    /// Stable error-kind name, used in CLI messages and JSON `<field>_err` notes.
    pub fn kind(&self) -> &'static str {
        match self {
            MetroError::Dimension(_) => "DimensionError",
            MetroError::Truncation { .. } => "TruncationError",
            MetroError::Size(_) => "SizeError",
            MetroError::Arity(_) => "ArityError",
            MetroError::Completeness(_) => "CompletenessError",
            MetroError::NotHermitian(_) => "NotHermitianError",
            MetroError::Normalization(_) => "NormalizationError",
            MetroError::Degenerate { .. } => "DegenerateError",
            MetroError::NoInformation(_) => "NoInformationError",
            MetroError::NoResource(_) => "NoResourceError",
            MetroError::SharpGenerator(_) => "SharpGeneratorError",
            MetroError::FlatSignal(_) => "FlatSignalError",
            MetroError::Window(_) => "WindowError",
            MetroError::Schema(_) => "SchemaError",
            MetroError::Io(_) => "IoError",
        }
    }
}

impl From<std::io::Error> for MetroError {
    fn from(e: std::io::Error) -> Self {
        MetroError::Io(e.to_string())
    }
}
