//! Polar coding for m-user binary-input multiple access channels with a
//! joint successive-cancellation decoder.
//!
//! The crate covers the whole pipeline: channel tables and uniform rate
//! regions ([`channel`]), single-user polarization ([`polar`]), decoding
//! orders of length-`L` base codes and their rate tuples ([`base_code`]),
//! length-`N` MAC polar codes built on a base code ([`mac_code`]), the joint
//! decoder ([`decoder`]) and the Monte Carlo / command-line drivers ([`sim`]).

pub mod base_code;
pub mod channel;
pub mod decoder;
pub mod error;
pub mod mac_code;
pub mod polar;
mod sc;
pub mod sim;

pub use error::{Error, Result};
