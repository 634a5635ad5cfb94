use thiserror::Error;

/// Runner failures, each mapped to a process exit status.
#[derive(Debug, Error)]
pub enum CliError {
    /// Scenario or command-line problem (exit 2).
    #[error("configuration error: {0}")]
    Config(String),
    /// A numerical module failed (exit 3).
    #[error("numerical failure in {module}: {source}")]
    Numeric {
        module: &'static str,
        #[source]
        source: eqlab_core::Error,
    },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Numeric { .. } => 3,
        }
    }
}

/// Tags core errors with the module that raised them.
pub trait InModule<T> {
    fn in_module(self, module: &'static str) -> Result<T, CliError>;
}

impl<T> InModule<T> for eqlab_core::Result<T> {
    fn in_module(self, module: &'static str) -> Result<T, CliError> {
        self.map_err(|source| CliError::Numeric { module, source })
    }
}
