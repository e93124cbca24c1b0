//! Trial planning and machine-observer sessions.
//!
//! A plan fixes which (sequence, quadruple) trials run, how often, in what
//! order and with which presentation flips. Sessions execute a plan against
//! an observer and record canonical responses.

mod clock;
mod plan;
mod pool;
mod session;

pub use clock::{Clock, LogicalClock, SystemClock};
pub use plan::{
    build_plan, enumerate_quadruples, Presentation, ScheduledTrial, TrialPlan,
};
pub use pool::pool_responses;
pub use session::{
    run_machine_session, save_session, sidecar_path, SequenceSource, SessionError, SessionRecord,
    SessionSummary,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TrialsError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unknown sequence {0}")]
    MissingSequence(String),
    #[error("failed to load sequence {id}: {message}")]
    Load { id: String, message: String },
}
