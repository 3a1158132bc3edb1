use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] directwf::Error),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    /// Process exit status.
    pub fn exit_code(&self) -> i32 {
        use directwf::Error as E;
        match self {
            CliError::Config(_) | CliError::Io { .. } => 2,
            CliError::Core(e) => match e {
                E::OrthogonalPostselection { .. }
                | E::ZeroReferenceWeakValue
                | E::VanishingPostselectionComponent { .. } => 3,
                E::NegativeDiscriminant { .. } => 4,
                E::AllTrialsRejected { .. } => 5,
                _ => 2,
            },
        }
    }

    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        use directwf::Error as E;
        match self {
            CliError::Config(_) => "config",
            CliError::Io { .. } => "io",
            CliError::Core(e) => match e {
                E::OrthogonalPostselection { .. } => "orthogonal_postselection",
                E::ZeroReferenceWeakValue => "zero_reference_weak_value",
                E::VanishingPostselectionComponent { .. } => "vanishing_postselection_component",
                E::NegativeDiscriminant { .. } => "inversion_failure",
                E::AllTrialsRejected { .. } => "all_trials_rejected",
                E::DimensionMismatch { .. } => "dimension",
                _ => "config",
            },
        }
    }

    /// `error code=<code> exit=<status> message="<text>"` on one line.
    pub fn report_line(&self) -> String {
        let message = self.to_string().replace(['\n', '\r'], " ").replace('"', "'");
        format!(
            "error code={} exit={} message=\"{}\"",
            self.code(),
            self.exit_code(),
            message
        )
    }
}
