//! Challenge platform: authenticated score submission with phase and quota
//! enforcement, hidden-key evaluation, an append-only submission log and an
//! anonymised leaderboard, served over HTTP.
//!
//! [`Platform`] holds all domain logic and is usable without the HTTP
//! layer; [`http::router`] wraps it in an axum application.

mod clock;
mod config;
pub mod http;
mod keystore;
mod platform;
pub mod store;

pub use clock::{Clock, ManualClock, SystemClock};
pub use config::{
    ConfigError, PhaseConfig, PhaseName, PlatformConfig, ServerConfig, TaskConfig, TeamConfig,
};
pub use keystore::{load_key_store, EvalContext, KeyStoreError, ScoringError};
pub use platform::{
    progress_series, team_alias, LeaderboardEntry, Platform, PlatformError, ProgressPoint,
    ProgressSeries, Submission, SubmissionResults, SubmissionStatus, SubmitError,
};
