use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("sentence {sentence} (starting at line {line}): head relation contains a cycle")]
    HeadCycle { sentence: usize, line: usize },

    #[error("lexicon is empty, cannot build a unigram distribution")]
    EmptyLexicon,

    #[error("non-finite {what} while training on instance {instance}")]
    NonFinite { what: &'static str, instance: usize },

    #[error("unsupported model version {found} (expected {expected})")]
    ModelVersion { found: u32, expected: u32 },

    #[error("inconsistent model: {0}")]
    ModelShape(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{0}")]
    Data(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
