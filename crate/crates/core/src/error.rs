use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown generator symbol '{symbol}' at line {line}, column {column}")]
    UnknownGenerator {
        line: usize,
        column: usize,
        symbol: char,
    },
    #[error("presentation has no generators")]
    EmptyGenerators,
    #[error("duplicate generator name '{0}'")]
    DuplicateGenerator(String),
    #[error("relator on line {line} freely reduces to the empty word")]
    DegenerateRelator { line: usize },
    #[error("budget exhausted: {0}")]
    Budget(String),
    #[error("ball size budget exceeded at radius {radius} ({vertices} vertices reached)")]
    BallBudget { radius: u32, vertices: usize },
    #[error("rewriting system is not confluent and no oracle is available")]
    NotConfluent,
    #[error("presentation fails the C'(1/6) condition and carries no augmentation")]
    SmallCancellation,
    #[error("unknown model '{0}'")]
    UnknownModel(String),
    #[error("model '{0}' is not finitely presented; 2-complex operations are unavailable")]
    NotFinitelyPresented(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("not found: {0}")]
    NotFound(String),
    #[error("unsound oracle: {0}")]
    UnsoundOracle(String),
}

pub type Result<T> = std::result::Result<T, Error>;
