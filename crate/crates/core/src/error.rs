use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid channel parameter: {0}")]
    InvalidChannel(&'static str),
    #[error("invalid schedule: {0}")]
    InvalidSchedule(&'static str),
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
    #[error("blocklength {0} outside the supported range")]
    BlocklengthTooLarge(u32),
    #[error("operation requires the {0} channel")]
    WrongChannel(&'static str),
    #[error("RCU series did not drop below 1/2 by n = {0}")]
    Divergence(u32),
    #[error("no packing possible: 2^k exceeds 2^n")]
    NoPacking,
    #[error("requested accuracy unattainable, estimated error {estimate:e}")]
    AccuracyUnattainable { estimate: f64 },
    #[error("final-attempt error probability {0} is not below one")]
    CertainFailure(f64),
    #[error("no schedule under the blocklength cap meets the outage constraint")]
    Infeasible,
    #[error("trial aborted after {0} rounds")]
    RoundsExceeded(u32),
}
