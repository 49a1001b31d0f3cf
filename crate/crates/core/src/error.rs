use crate::chain::Violation;

/// Errors produced by chain construction, exact analysis, oracles, and samplers.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid chain: {}", format_violations(.0))]
    InvalidSpec(Vec<Violation>),

    #[error("unknown model `{0}`")]
    UnknownModel(String),

    #[error("bad parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("budget exceeded: {0}")]
    Budget(String),

    #[error("numerical inconsistency: {0}")]
    Numerical(String),

    #[error("malformed model document: {0}")]
    Document(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn format_violations(vs: &[Violation]) -> String {
    let msgs: Vec<String> = vs.iter().map(|v| v.to_string()).collect();
    msgs.join("; ")
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
