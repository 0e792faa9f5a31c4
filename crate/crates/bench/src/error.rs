use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("run failed: {0}")]
    Run(String),
    #[error("malformed input: {0}")]
    Input(String),
    #[error("{failed} of {total} runs failed")]
    Partial { failed: usize, total: usize },
}

impl BenchError {
    /// 1 for anything that stops the harness before or outside the runs, 2 for failed runs.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Partial { .. } | Self::Run(_) => 2,
            _ => 1,
        }
    }
}

impl From<std::io::Error> for BenchError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.to_string())
    }
}

impl From<csv::Error> for BenchError {
    fn from(e: csv::Error) -> Self {
        Self::Io(e.to_string())
    }
}
