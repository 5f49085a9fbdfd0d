use std::io;
use std::path::{Path, PathBuf};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] semdrift_core::Error),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    /// A file exists but does not hold what its format promises.
    #[error("{}: {message}", path.display())]
    Format { path: PathBuf, message: String },

    /// Bad input data that is not a file-format problem, such as an empty corpus.
    #[error("{0}")]
    Data(String),

    #[error("{0}")]
    Usage(String),
}

impl Error {
    pub fn io(path: impl AsRef<Path>, source: io::Error) -> Self {
        Error::Io {
            path: path.as_ref().to_path_buf(),
            source,
        }
    }

    pub fn format(path: impl AsRef<Path>, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.as_ref().to_path_buf(),
            message: message.into(),
        }
    }

    /// 1 for usage and configuration errors, 2 for data errors, 3 for numeric failure.
    pub fn exit_code(&self) -> i32 {
        use semdrift_core::Error as C;
        match self {
            Error::Usage(_) => 1,
            Error::Core(e) => match e.root() {
                C::InvalidConfig(_) | C::OverlappingPools(_) | C::DimensionMismatch { .. } => 1,
                C::NumericFailure { .. } => 3,
                _ => 2,
            },
            Error::Io { .. } | Error::Format { .. } | Error::Data(_) => 2,
        }
    }
}

/// Attaches a path to IO errors.
pub(crate) trait IoContext<T> {
    fn at(self, path: impl AsRef<Path>) -> Result<T>;
}

impl<T> IoContext<T> for io::Result<T> {
    fn at(self, path: impl AsRef<Path>) -> Result<T> {
        self.map_err(|e| Error::io(path, e))
    }
}
