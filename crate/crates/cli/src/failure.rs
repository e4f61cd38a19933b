use std::fmt;

/// A command failure and the exit code it maps to.
#[derive(Debug)]
pub enum Failure {
    /// Malformed or out-of-domain input (exit 2).
    Input(String),
    /// The numerics did not settle (exit 3).
    Numerical(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Input(m) => write!(f, "input error: {m}"),
            Failure::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<jm_core::Error> for Failure {
    fn from(e: jm_core::Error) -> Self {
        match e {
            jm_core::Error::Numerical(_) => Failure::Numerical(e.to_string()),
            other => Failure::Input(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

pub type Outcome<T> = Result<T, Failure>;
