use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot parse configuration: {0}")]
    Parse(String),
    #[error("invalid configuration:\n  - {}", .0.join("\n  - "))]
    Invalid(Vec<String>),
    #[error("io error: {0}")]
    Io(String),
    #[error("{driver} driver failed: {source}")]
    Driver {
        driver: &'static str,
        #[source]
        source: Box<CliError>,
    },
    #[error(transparent)]
    Core(#[from] srcid::Error),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
