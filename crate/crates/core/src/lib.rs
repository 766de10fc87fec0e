//! Evidential reasoning for funding selection.
//!
//! Historical assessments are calibrated into belief distributions per grade
//! ([`calibration`]), experts are weighted by their review track record
//! ([`reliability`]), and assessments are fused with the ER rule
//! ([`evidence`], [`aggregation`]) into a funding probability that is ranked
//! against the additive baseline ([`ranking`]). [`config`], [`io`] and [`cli`]
//! wire this into a command-line pipeline over CSV and JSON files.

pub mod aggregation;
pub mod calibration;
pub mod case_study;
pub mod cli;
pub mod config;
pub mod error;
pub mod evidence;
pub mod io;
pub mod ranking;
pub mod reliability;

pub use error::{Error, Result};
