//! Hybrid Holt + wavelet neural forecasting for daily epidemic counts.
//!
//! The crate covers the full pipeline: CSV ingestion ([`series`]), base
//! forecasters ([`forecasters`]), the Haar MODWT ([`wavelet`]), time-delay
//! networks and their wavelet ensemble ([`neural`]), residual-remodelling
//! hybrids ([`hybrid`]), constant-sum regional adjustment ([`adjust`]),
//! rolling-window monitoring and shelf life ([`evaluate`]), and
//! reproduction-number estimation ([`epi`]). [`cli`] wires them into the
//! `epicast` binary.

pub mod adjust;
pub mod cli;
pub mod epi;
pub mod error;
pub mod evaluate;
pub mod forecasters;
pub mod hybrid;
pub mod models;
pub mod neural;
pub mod optim;
pub mod plot;
pub mod series;
pub mod wavelet;

pub use error::{Error, Result};
pub use models::{FittedModel, ModelSpec};
pub use series::UnivariateSeries;
