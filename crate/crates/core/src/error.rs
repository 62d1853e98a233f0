use thiserror::Error;

/// Errors surfaced by configuration validation, the solver, and the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("dependency cycle involving class {0}")]
    Cycle(u32),

    #[error("unknown class id {0}")]
    UnknownClass(u32),

    #[error("schedule missing slot {slot} for class {class}")]
    MissingSchedule { class: u32, slot: usize },

    #[error("solver precondition violated: {0}")]
    Precondition(String),

    #[error("exhaustive-search guard exceeded: {0}")]
    OracleGuard(String),
}

pub type Result<T> = std::result::Result<T, Error>;
