#[derive(Debug, thiserror::Error)]
pub enum AnalyticsError {
    #[error("no included records to analyze")]
    Empty,
    #[error("factor {0} has a single level; at least two are needed")]
    SingleLevel(String),
    #[error("design has {rows} rows but {cols} columns")]
    TooFewRows { rows: usize, cols: usize },
    #[error("design is rank deficient; dependent columns: {}", .0.join(", "))]
    RankDeficient(Vec<String>),
    #[error("response must be 0 or 1, found {0}")]
    NonBinary(f64),
    #[error("lambda must be finite and non-negative, got {0}")]
    BadLambda(f64),
    #[error("no convergence after {0} iterations")]
    NotConverged(usize),
    #[error("need more than {degree} distinct x values, got {distinct}")]
    Underdetermined { degree: usize, distinct: usize },
    #[error("{0} names for {1} columns")]
    NameMismatch(usize, usize),
    #[error("report output: {0}")]
    Io(#[from] std::io::Error),
    #[error("report output: {0}")]
    Csv(#[from] csv::Error),
}
