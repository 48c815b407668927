use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("could not place tree {index} of {requested} without overlap after {attempts} attempts")]
    Placement {
        index: usize,
        requested: usize,
        attempts: usize,
    },
    #[error("innovation covariance is singular for target {target_id}")]
    SingularInnovation { target_id: u32 },
    #[error("observation references unknown target {target_id}")]
    UnknownTarget { target_id: u32 },
    #[error("joint search needs {required} rollouts per agent, budget is {budget}")]
    BudgetExceeded { required: u128, budget: u64 },
    #[error("invalid {field}: {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error("empty input")]
    EmptyInput,
}

impl Error {
    pub fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Invalid {
            field,
            reason: reason.into(),
        }
    }
}
