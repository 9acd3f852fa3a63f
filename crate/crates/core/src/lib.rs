//! Pseudo-spectral simulation of the simplified Ericksen–Leslie system on the
//! periodic box, with Littlewood–Paley diagnostics.

pub mod cli_io;
pub mod diagnostics;
pub mod error;
pub mod initial_data;
pub mod littlewood_paley;
pub mod par;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};
