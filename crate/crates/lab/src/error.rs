use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] libor_core::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl LabError {
    /// Process exit status: 2 for anything the config could fix, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        use libor_core::Error as E;
        match self {
            LabError::Config(_) | LabError::Csv(_) => 2,
            LabError::Model(
                E::InvalidParameter { .. }
                | E::MomentDomain { .. }
                | E::FitInfeasible { .. }
                | E::UnsupportedScheme(_)
                | E::StepTooLarge { .. }
                | E::NonPositiveBond { .. },
            ) => 2,
            _ => 1,
        }
    }
}
