//! Spectra of random geometric graphs on compact Lie groups and rank-one symmetric spaces.

pub mod error;
pub mod gaussian;
pub mod geometry;
pub mod moments;
pub mod poisson;
pub mod bessel;
pub mod circuits;
pub mod cli;
pub mod crystal;
pub mod quad;
pub mod rankone;
pub mod rootdata;
pub mod spectra;

pub use error::{Error, Result};
