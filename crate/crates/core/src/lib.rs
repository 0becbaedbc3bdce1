//! Spectral simulation of the Zakharov–Rubenchik system on a periodic interval.

pub mod cli;
pub mod closed_forms;
pub mod config;
pub mod error;
pub mod evolution;
pub mod experiments;
pub mod fit;
pub mod grid;
pub mod model;
pub mod output;
pub mod quadrature;
pub mod record;

pub use error::{Result, ZrError};
