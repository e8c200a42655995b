//! Channel coding for DNA data storage.

pub mod bfa;
pub mod channel;
pub mod config;
pub mod editecc;
pub mod error;
pub mod formats;
pub mod fountain;
pub mod gf2;
pub mod mt19937;
pub mod pipeline;
pub mod quatseq;
pub mod srt;
pub mod sweep;

pub use error::{Error, Result};
