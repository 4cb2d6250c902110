use std::fmt;

/// Command failure, classified by exit code.
#[derive(Debug)]
pub enum Failure {
    /// An oracle or verification check did not pass (exit 1).
    Verification(String),
    /// Bad flags, unreadable or malformed inputs (exit 2).
    Input(anyhow::Error),
    /// Output could not be written (exit 3).
    Io(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Verification(_) => 1,
            Failure::Input(_) => 2,
            Failure::Io(_) => 3,
        }
    }

    pub fn input(msg: impl fmt::Display) -> Self {
        Failure::Input(anyhow::anyhow!("{msg}"))
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Verification(msg) => write!(f, "verification failed: {msg}"),
            Failure::Input(e) => write!(f, "input error: {e:#}"),
            Failure::Io(e) => write!(f, "I/O error: {e:#}"),
        }
    }
}

pub type CmdResult<T = ()> = Result<T, Failure>;

pub trait Classify<T> {
    fn input_err(self, context: impl fmt::Display) -> CmdResult<T>;
    fn io_err(self, context: impl fmt::Display) -> CmdResult<T>;
}

impl<T, E> Classify<T> for Result<T, E>
where
    E: std::error::Error + Send + Sync + 'static,
{
    fn input_err(self, context: impl fmt::Display) -> CmdResult<T> {
        self.map_err(|e| Failure::Input(anyhow::Error::new(e).context(context.to_string())))
    }

    fn io_err(self, context: impl fmt::Display) -> CmdResult<T> {
        self.map_err(|e| Failure::Io(anyhow::Error::new(e).context(context.to_string())))
    }
}
