//! Fault localization and failure diagnosis from execution features.

pub mod cli;
pub mod diagnosis;
pub mod error;
pub mod features;
pub mod localize;
pub mod sbfl;
pub mod study;
pub mod trace;

pub use error::{Error, Result};
