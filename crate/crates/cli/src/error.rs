use std::path::PathBuf;

pub const EXIT_OK: u8 = 0;
pub const EXIT_VALIDATION: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_IO: u8 = 3;
pub const EXIT_AMBIGUOUS: u8 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] qtransfer::Error),
    #[error("crossing search at N = {n}: {source}")]
    Ambiguous { n: usize, source: qtransfer::Error },
    #[error("cannot write {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Core(qtransfer::Error::Ambiguous { .. }) | CliError::Ambiguous { .. } => EXIT_AMBIGUOUS,
            CliError::Core(_) => EXIT_INPUT,
            CliError::Io { .. } => EXIT_IO,
        }
    }
}
