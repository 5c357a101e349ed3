//! Experiment harness: configuration loading, seeded experiment execution
//! with CSV metrics, multi-scheme comparisons, solver cross-checks, and
//! hotboot pretraining.

pub mod compare;
pub mod config;
pub mod experiment;
pub mod metrics;
pub mod oracle_check;
pub mod pretrain;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] config::ConfigError),
    #[error(transparent)]
    Offload(#[from] mecrl_core::offload::OffloadError),
    #[error(transparent)]
    Auth(#[from] mecrl_core::auth::AuthError),
    #[error(transparent)]
    Net(#[from] mecrl_core::agents::NetError),
    #[error(transparent)]
    Oracle(#[from] mecrl_core::oracle::OracleError),
    #[error(transparent)]
    Quant(#[from] mecrl_core::quant::QuantError),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
}
